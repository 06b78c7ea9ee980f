// SPDX-License-Identifier: Apache-2.0

mod common;

use alpine::split::{split_cluster_pieces, MAX_SPLIT_DEPTH};
use alpine::{fits_in_reference, split_cluster, ClassConfig, Point2, SplitParams};

fn car() -> SplitParams {
    SplitParams::for_class(&ClassConfig::semantickitti(), 1).unwrap()
}

#[test]
fn car_defaults() {
    let p = car();
    assert_eq!(p.reference_box, (4.4, 1.8));
    assert_eq!((p.margin, p.epsilon, p.k), (0.3, 1e-3, 32));
    assert!(MAX_SPLIT_DEPTH >= 32);
}

#[test]
fn fit_predicate_examples() {
    let params = car();
    assert!(fits_in_reference(&[Point2::new(1.0, 1.0)], &params).unwrap());
    assert!(fits_in_reference(&common::grid(0.0, 0.0, 5.5, 1.0, 0.25), &params).unwrap());
    assert!(!fits_in_reference(&common::grid(0.0, 0.0, 9.0, 2.0, 0.25), &params).unwrap());
    assert!(fits_in_reference(&[], &params).is_err());
}

#[test]
fn conforming_cluster_is_unchanged() {
    let p = common::grid(0.0, 0.0, 4.0, 1.7, 0.1);
    assert_eq!(split_cluster(&p, &car(), 1.8).unwrap(), vec![(0..p.len()).collect::<Vec<_>>()]);
}

#[test]
fn two_parked_cars_split_at_the_gap() {
    let (p, first) = common::two_car_fixture();
    let pieces = split_cluster_pieces(&p, &car(), 1.8).unwrap();
    assert_eq!(pieces.len(), 2);
    assert!(pieces.iter().all(|s| s.fits));
    let subsets = common::canonical_subsets(pieces.into_iter().map(|s| s.indices).collect());
    assert_eq!(subsets, vec![(0..first).collect::<Vec<_>>(), (first..p.len()).collect()]);
}

#[test]
fn crafted_scenes_recover_every_blob() {
    let c = ClassConfig::semantickitti();
    for s in common::crafted_suite(&c, 20, 99) {
        let params = SplitParams::for_class(&c, s.class_id).unwrap();
        let t = c.class_threshold(s.class_id).unwrap();
        let pieces = split_cluster_pieces(&s.scene.points, &params, t).unwrap();
        assert!(pieces.iter().all(|p| p.fits), "class {} gaps {:?}", s.class_id, s.gaps);
        let found = common::canonical_subsets(pieces.into_iter().map(|p| p.indices).collect());
        let mut expect = vec![Vec::new(); s.gaps.len() + 1];
        for (i, &b) in s.scene.blob.iter().enumerate() {
            expect[b as usize].push(i);
        }
        assert_eq!(found, common::canonical_subsets(expect));
    }
}

#[test]
fn result_is_a_partition() {
    let mut rng = common::rng(17);
    for _ in 0..20 {
        let p = common::clustered_points(&mut rng, 300, 6.0);
        let subsets = split_cluster(&p, &car(), 1.8).unwrap();
        let mut all: Vec<usize> = subsets.iter().flatten().copied().collect();
        assert!(subsets.iter().all(|s| !s.is_empty()));
        all.sort_unstable();
        assert_eq!(all, (0..p.len()).collect::<Vec<_>>());
    }
}

#[test]
fn unsplittable_line_terminates() {
    // Evenly spaced collinear points: every threshold gives 1 or n components.
    let p: Vec<Point2> = (0..200).map(|i| Point2::new(0.05 * i as f64, 0.0)).collect();
    let pieces = split_cluster_pieces(&p, &car(), 1.8).unwrap();
    let total: usize = pieces.iter().map(|s| s.indices.len()).sum();
    assert_eq!(total, p.len());
}

#[test]
fn invalid_parameters() {
    let p = [Point2::new(0.0, 0.0)];
    assert!(split_cluster(&p, &car(), 0.0).is_err());
    let mut bad = car();
    bad.epsilon = 0.0;
    assert!(split_cluster(&p, &bad, 1.8).is_err());
    bad = car();
    bad.margin = -0.1;
    assert!(split_cluster(&p, &bad, 1.8).is_err());
    assert!(split_cluster(&[], &car(), 1.8).unwrap().is_empty());
}

#[test]
fn deterministic() {
    let (p, _) = common::two_car_fixture();
    assert_eq!(split_cluster(&p, &car(), 1.8).unwrap(), split_cluster(&p, &car(), 1.8).unwrap());
}
