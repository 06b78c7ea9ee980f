// SPDX-License-Identifier: Apache-2.0

mod common;

use alpine::geometry::{KdTree2, Point2};
use alpine::graph::{
    build_threshold_graph, connected_components, for_each_threshold_edge, threshold_components, AdjacencyGraph,
    ConstantThreshold, KnnGraph,
};
use alpine::oracle::{bfs_components, radius_graph_bruteforce};
use rand::Rng;

#[test]
fn threshold_cuts_long_edges() {
    let p = [Point2::new(0.0, 0.0), Point2::new(5.0, 0.0)];
    assert!(build_threshold_graph(&p, 1, &ConstantThreshold(3.0)).unwrap().edges.is_empty());
    let p = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0)];
    assert_eq!(build_threshold_graph(&p, 1, &ConstantThreshold(3.0)).unwrap().edges, vec![(0, 1)]);
}

#[test]
fn edge_at_threshold_is_kept() {
    let p = [Point2::new(0.0, 0.0), Point2::new(0.3, 0.4)];
    assert_eq!(build_threshold_graph(&p, 1, &ConstantThreshold(0.5)).unwrap().edges.len(), 1);
}

#[test]
fn full_k_equals_radius_graph() {
    let mut rng = common::rng(21);
    let p = common::clustered_points(&mut rng, 500, 10.0);
    for t in [0.1, 0.5, 1.5] {
        let g = build_threshold_graph(&p, 499, &ConstantThreshold(t)).unwrap();
        assert_eq!(g, radius_graph_bruteforce(&p, t).unwrap());
    }
}

#[test]
fn components_basics() {
    let g = AdjacencyGraph::from_pairs(4, []);
    let c = connected_components(&g);
    assert_eq!((c.labels, c.component_count), (vec![0, 1, 2, 3], 4));
    let g = AdjacencyGraph::from_pairs(3, [(0, 1), (2, 1)]);
    assert_eq!(connected_components(&g).component_count, 1);
}

#[test]
fn union_find_matches_bfs() {
    let mut rng = common::rng(4);
    for _ in 0..100 {
        let n = rng.random_range(1..=200);
        let m = rng.random_range(0..=n);
        let pairs: Vec<(usize, usize)> = (0..m).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        let g = AdjacencyGraph::from_pairs(n, pairs);
        let a = connected_components(&g);
        let b = bfs_components(&g);
        assert_eq!(common::canonical(&a.labels), common::canonical(&b.labels));
        assert_eq!(a.component_count, b.component_count);
    }
}

#[test]
fn directed_edges_are_symmetrized() {
    // Point 2 is far from both, but 0 and 1 are in its k = 1 list only one way.
    let p = [Point2::new(0.0, 0.0), Point2::new(0.1, 0.0), Point2::new(1.0, 0.0)];
    let tree = KdTree2::build(&p).unwrap();
    let mut directed = Vec::new();
    for_each_threshold_edge(&tree, 1, &ConstantThreshold(2.0), |u, v, _| directed.push((u, v))).unwrap();
    assert!(directed.contains(&(2, 1)) && !directed.contains(&(1, 2)));
    let g = build_threshold_graph(&p, 1, &ConstantThreshold(2.0)).unwrap();
    assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
}

#[test]
fn per_pair_threshold_rule() {
    let p = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
    // Only the pair (1, 2) is allowed a long edge.
    let rule = |u: usize, v: usize| if u.min(v) == 1 && u.max(v) == 2 { 1.0 } else { 0.5 };
    let g = build_threshold_graph(&p, 2, &rule).unwrap();
    assert_eq!(g.edges, vec![(1, 2)]);
}

#[test]
fn raising_threshold_never_adds_components() {
    let mut rng = common::rng(8);
    let p = common::clustered_points(&mut rng, 400, 15.0);
    let tree = KdTree2::build(&p).unwrap();
    let knn = KnnGraph::build(&tree, 16).unwrap();
    let mut last = usize::MAX;
    for i in 1..40 {
        let t = 0.05 * i as f64;
        let c = knn.components_at(t);
        assert!(c.component_count <= last);
        assert_eq!(c, threshold_components(&tree, 16, &ConstantThreshold(t)).unwrap());
        last = c.component_count;
    }
}

#[test]
fn permuting_points_permutes_partition() {
    let mut rng = common::rng(13);
    let p = common::clustered_points(&mut rng, 300, 12.0);
    let mut perm: Vec<usize> = (0..p.len()).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let q: Vec<Point2> = perm.iter().map(|&i| p[i]).collect();
    // With k covering everything, ties in the kNN lists cannot matter.
    let t = ConstantThreshold(0.7);
    let a = threshold_components(&KdTree2::build(&p).unwrap(), 299, &t).unwrap();
    let b = threshold_components(&KdTree2::build(&q).unwrap(), 299, &t).unwrap();
    let a_permuted: Vec<u32> = perm.iter().map(|&i| a.labels[i]).collect();
    assert_eq!(common::canonical(&a_permuted), common::canonical(&b.labels));
}
