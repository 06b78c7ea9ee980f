// SPDX-License-Identifier: Apache-2.0

mod common;

use alpine::oracle::radius_cluster_bruteforce;
use alpine::synth::{generate_scene, SceneParams};
use alpine::{cluster_class, cluster_scan, edge_threshold, project_bev, ClassConfig, PointCloud, ThresholdMode};

fn blobs(gap: f64) -> PointCloud {
    // Two car-labeled 3 x 1.5 m blobs sampled every 0.3 m.
    let mut xyz = Vec::new();
    for x0 in [0.0, 3.0 + gap] {
        for p in common::grid(x0, 10.0, 3.0, 1.5, 0.3) {
            xyz.push([p.x as f32, p.y as f32, 0.5]);
        }
    }
    let n = xyz.len();
    xyz.push([0.0, -5.0, -1.7]);
    let mut semantic = vec![1; n];
    semantic.push(9);
    PointCloud::new(xyz, semantic).unwrap()
}

#[test]
fn projection() {
    let c = ClassConfig::semantickitti();
    let cloud = PointCloud::new(vec![[1.0, 2.0, 3.0], [1.0, 2.0, 9.0], [5.0, 5.0, 0.0]], vec![1, 1, 9]).unwrap();
    let (p, idx) = project_bev(&cloud, 1, &c).unwrap();
    assert_eq!(p[0], p[1]);
    assert_eq!((p[0].x, p[0].y), (1.0, 2.0));
    assert_eq!(idx, vec![0, 1]);
    assert!(project_bev(&cloud, 4, &c).unwrap().0.is_empty());
}

#[test]
fn class_thresholds() {
    let mut c = ClassConfig::semantickitti();
    assert_eq!(edge_threshold(&c, 1, 5.0, 40.0).unwrap(), 1.8);
    assert_eq!(edge_threshold(&c, 4, 5.0, 40.0).unwrap(), 3.0);
    c = c.with_thing(30, "test", 5.0, 2.0);
    c.threshold_mode = ThresholdMode::RangeProportional { coefficient: 0.01 };
    assert!((edge_threshold(&c, 30, 10.0, 30.0).unwrap() - 0.6).abs() < 1e-12);
    assert!(edge_threshold(&c, 9, 1.0, 1.0).is_err());
}

#[test]
fn separated_blobs_give_two_components() {
    let c = ClassConfig::semantickitti();
    let cloud = blobs(5.0);
    let cc = cluster_class(&cloud, 1, &c).unwrap();
    assert_eq!(cc.components.component_count, 2);
    let oracle = radius_cluster_bruteforce(&cc.points, 1.8).unwrap();
    assert_eq!(common::canonical(&cc.components.labels), common::canonical(&oracle.labels));

    let labels = cluster_scan(&cloud, &c, true).unwrap();
    let half = (cloud.len() - 1) / 2;
    assert!(labels.instance[..half].iter().all(|&i| i == 1));
    assert!(labels.instance[half..cloud.len() - 1].iter().all(|&i| i == 2));
    assert_eq!(labels.instance[cloud.len() - 1], 0);
}

#[test]
fn close_blobs_merge_before_splitting() {
    let c = ClassConfig::semantickitti();
    let cc = cluster_class(&blobs(1.0), 1, &c).unwrap();
    assert_eq!(cc.components.component_count, 1);
}

#[test]
fn isolated_point_is_an_instance() {
    let c = ClassConfig::semantickitti();
    let cloud = PointCloud::new(vec![[3.0, 3.0, 0.0]], vec![6]).unwrap();
    assert_eq!(cluster_class(&cloud, 6, &c).unwrap().components.component_count, 1);
    assert_eq!(cluster_scan(&cloud, &c, true).unwrap().instance, vec![1]);
}

#[test]
fn all_stuff_scan_has_no_instances() {
    let c = ClassConfig::semantickitti();
    let cloud = PointCloud::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], vec![9, 13]).unwrap();
    assert_eq!(cluster_scan(&cloud, &c, true).unwrap().instance, vec![0, 0]);
}

#[test]
fn ids_follow_class_then_first_appearance() {
    let c = ClassConfig::semantickitti();
    // Person first in cloud order, then two cars.
    let cloud = PointCloud::new(
        vec![[0.0, 0.0, 0.0], [20.0, 0.0, 0.0], [10.0, 0.0, 0.0], [20.5, 0.0, 0.0]],
        vec![6, 1, 1, 1],
    )
    .unwrap();
    assert_eq!(cluster_scan(&cloud, &c, false).unwrap().instance, vec![3, 1, 2, 1]);
}

#[test]
fn full_scan_end_to_end() {
    let c = ClassConfig::semantickitti();
    let scene = generate_scene(&SceneParams::default(), &c).unwrap();
    assert_eq!(scene.cloud.len(), 120_000);
    let labels = cluster_scan(&scene.cloud, &c, true).unwrap();
    assert_eq!(labels.semantic, scene.cloud.semantic);
    assert!(common::distinct_instances(&labels.instance) >= scene.objects.len() / 2);
}

#[test]
fn range_proportional_mode_widens_far_edges() {
    let mut c = ClassConfig::semantickitti();
    // Pairs 0.5 m apart, one near and one far.
    let cloud = PointCloud::new(
        vec![[5.0, 0.0, 0.0], [5.5, 0.0, 0.0], [40.0, 0.0, 0.0], [40.5, 0.0, 0.0]],
        vec![6; 4],
    )
    .unwrap();
    assert_eq!(cluster_class(&cloud, 6, &c).unwrap().components.component_count, 2);
    c.threshold_mode = ThresholdMode::RangeProportional { coefficient: 0.05 };
    // Person t_c = 0.8: the near edge allows 0.22 m, the far one 1.62 m.
    assert_eq!(cluster_class(&cloud, 6, &c).unwrap().components.component_count, 3);
}

#[test]
fn oracle_equivalence_spot_check() {
    let c = ClassConfig::semantickitti();
    let mut rng = common::rng(77);
    for _ in 0..10 {
        let cloud = common::random_scan(&mut rng, &c);
        for class_id in c.thing_ids() {
            let n = cloud.semantic.iter().filter(|&&s| s == class_id).count();
            if n == 0 {
                continue;
            }
            let mut ck = c.clone();
            ck.k = (n - 1).max(1);
            let cc = cluster_class(&cloud, class_id, &ck).unwrap();
            let t = c.class_threshold(class_id).unwrap();
            let oracle = radius_cluster_bruteforce(&cc.points, t).unwrap();
            assert_eq!(common::canonical(&cc.components.labels), common::canonical(&oracle.labels));
        }
    }
}
