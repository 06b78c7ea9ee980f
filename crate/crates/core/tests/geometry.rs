// SPDX-License-Identifier: Apache-2.0

mod common;

use std::f64::consts::{FRAC_PI_6, PI};

use alpine::geometry::{convex_hull, fit_min_area_box, HullKind, KdTree2, Point2};
use alpine::oracle::{hull_bruteforce, knn_linear_scan, min_box_sweep};
use rand::Rng;

fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
    v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
}

#[test]
fn empty_and_singleton_trees() {
    let empty = KdTree2::build(&[]).unwrap();
    assert!(empty.is_empty());
    let one = pts(&[(0.0, 0.0)]);
    let tree = KdTree2::build(&one).unwrap();
    assert_eq!(tree.len(), 1);
    assert!(tree.knn(0, 1).unwrap().is_empty());
}

#[test]
fn collinear_nearest() {
    let p = pts(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)]);
    let tree = KdTree2::build(&p).unwrap();
    let n = tree.knn(0, 1).unwrap();
    assert_eq!(n.len(), 1);
    assert_eq!((n[0].index, n[0].distance), (1, 1.0));
}

#[test]
fn knn_matches_linear_scan_on_uniform_cloud() {
    let mut rng = common::rng(11);
    let p: Vec<Point2> = (0..1000)
        .map(|_| Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
        .collect();
    let tree = KdTree2::build(&p).unwrap();
    for _ in 0..50 {
        let q = rng.random_range(0..p.len());
        let k = rng.random_range(1..=64);
        assert_eq!(tree.knn(q, k).unwrap(), knn_linear_scan(&p, q, k));
    }
}

#[test]
fn knn_on_grid_with_ties() {
    // Integer grid: many equal distances, resolved by index.
    let p = common::grid(0.0, 0.0, 9.0, 9.0, 1.0);
    let tree = KdTree2::build(&p).unwrap();
    for q in [0, 5, 55, 99] {
        for k in [1, 4, 8, 33] {
            assert_eq!(tree.knn(q, k).unwrap(), knn_linear_scan(&p, q, k));
        }
    }
}

#[test]
fn hull_of_square_with_center() {
    let p = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]);
    let h = convex_hull(&p).unwrap();
    assert_eq!(h.kind, HullKind::Polygon);
    assert_eq!(h.vertices.len(), 4);
    assert!(!h.vertices.contains(&Point2::new(0.5, 0.5)));
}

#[test]
fn hull_of_triangle() {
    let p = pts(&[(0.0, 0.0), (2.0, 0.0), (1.0, 1.5)]);
    let h = convex_hull(&p).unwrap();
    assert_eq!(h.vertices.len(), 3);
    for v in &p {
        assert!(h.vertices.contains(v));
    }
}

#[test]
fn hull_matches_bruteforce_in_disk() {
    let mut rng = common::rng(3);
    for _ in 0..20 {
        let p: Vec<Point2> = (0..200)
            .map(|_| {
                let (r, a): (f64, f64) = (rng.random_range(0.0f64..1.0).sqrt() * 10.0, rng.random_range(0.0..2.0 * PI));
                Point2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let mut got = convex_hull(&p).unwrap().vertices;
        got.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        assert_eq!(got, hull_bruteforce(&p).unwrap());
        let h = convex_hull(&p).unwrap();
        assert!(p.iter().all(|&q| h.contains(q, 1e-9)));
    }
}

#[test]
fn degenerate_hulls() {
    let h = convex_hull(&pts(&[(1.0, 1.0), (1.0, 1.0)])).unwrap();
    assert_eq!(h.kind, HullKind::Point);
    let h = convex_hull(&pts(&[(0.0, 0.0), (2.0, 2.0), (1.0, 1.0), (3.0, 3.0)])).unwrap();
    assert_eq!(h.kind, HullKind::Segment);
    assert!(h.is_degenerate());
    assert_eq!(h.vertices.len(), 2);
}

#[test]
fn axis_aligned_rectangle_box() {
    let b = fit_min_area_box(&pts(&[(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)])).unwrap();
    assert!((b.center.x - 2.0).abs() < 1e-12 && (b.center.y - 1.0).abs() < 1e-12);
    assert!((b.half_length - 2.0).abs() < 1e-12 && (b.half_width - 1.0).abs() < 1e-12);
    assert!(b.yaw.abs() < 1e-12);
}

#[test]
fn rotated_rectangle_box() {
    let (s, c) = FRAC_PI_6.sin_cos();
    let p: Vec<Point2> = [(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)]
        .iter()
        .map(|&(x, y)| Point2::new(c * x - s * y, s * x + c * y))
        .collect();
    let b = fit_min_area_box(&p).unwrap();
    assert!((b.half_length - 2.0).abs() < 1e-9 && (b.half_width - 1.0).abs() < 1e-9);
    assert!((b.yaw - FRAC_PI_6).abs() < 1e-9);
    assert!((b.area() - 8.0).abs() < 1e-9);
}

#[test]
fn box_beats_dense_sweep() {
    let mut rng = common::rng(5);
    for _ in 0..20 {
        let p: Vec<Point2> = (0..100)
            .map(|_| Point2::new(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0)))
            .collect();
        let b = fit_min_area_box(&p).unwrap();
        let sweep = min_box_sweep(&p, 0.1f64.to_radians()).unwrap();
        assert!(b.area() <= sweep.area() * (1.0 + 1e-6));
        assert!(p.iter().all(|&q| b.contains(q, 1e-9)));
    }
}

#[test]
fn degenerate_boxes() {
    let b = fit_min_area_box(&pts(&[(3.0, 4.0)])).unwrap();
    assert_eq!((b.length(), b.width()), (0.0, 0.0));
    assert_eq!((b.center.x, b.center.y), (3.0, 4.0));
    let b = fit_min_area_box(&pts(&[(0.0, 0.0), (3.0, 4.0), (1.5, 2.0)])).unwrap();
    assert!((b.length() - 5.0).abs() < 1e-12);
    assert!(b.width().abs() < 1e-12);
    assert!(fit_min_area_box(&[]).is_err());
}

#[test]
fn box_is_equivariant_under_rigid_motion() {
    let mut rng = common::rng(9);
    let p: Vec<Point2> = (0..60)
        .map(|_| Point2::new(rng.random_range(0.0..4.0), rng.random_range(0.0..1.5)))
        .collect();
    let base = fit_min_area_box(&p).unwrap();
    for _ in 0..10 {
        let (a, tx, ty) = (rng.random_range(0.0..2.0 * PI), rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let (s, c) = a.sin_cos();
        let moved: Vec<Point2> = p.iter().map(|q| Point2::new(c * q.x - s * q.y + tx, s * q.x + c * q.y + ty)).collect();
        let b = fit_min_area_box(&moved).unwrap();
        assert!((b.half_length - base.half_length).abs() < 1e-9);
        assert!((b.half_width - base.half_width).abs() < 1e-9);
        let expect = Point2::new(c * base.center.x - s * base.center.y + tx, s * base.center.x + c * base.center.y + ty);
        assert!(b.center.distance(expect) < 1e-9);
    }
}
