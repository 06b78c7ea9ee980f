// SPDX-License-Identifier: Apache-2.0

//! Brute-force references for the verification suites.
//!
//! Each function is the slow, obviously-correct version of a production
//! path: all-pairs radius graph for clustering, BFS for components, a dense
//! orientation sweep for box fitting, and enumeration for segment matching.

use std::collections::{BTreeMap, VecDeque};

use crate::cluster::InstanceLabeling;
use crate::config::ClassConfig;
use crate::error::{Error, Result};
use crate::geometry::{aligned_box_at, cross, KdTree2, Neighbor, OrientedBox2D, Point2};
use crate::graph::{AdjacencyGraph, ComponentLabeling};
use crate::metrics::segment_overlaps;

pub const MAX_BRUTEFORCE_POINTS: usize = 5000;
pub const MAX_EXHAUSTIVE_SEGMENTS: usize = 10;

/// kNN by sorting all distances, same exclusion and tie rules as [`KdTree2::knn`].
pub fn knn_linear_scan(points: &[Point2], query_index: usize, k: usize) -> Vec<Neighbor> {
    let q = points[query_index];
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != query_index)
        .map(|(i, p)| (p.distance_squared(q), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter()
        .map(|(d2, index)| Neighbor {
            index,
            distance: d2.sqrt(),
        })
        .collect()
}

/// Components by breadth-first search over an adjacency list.
pub fn bfs_components(graph: &AdjacencyGraph) -> ComponentLabeling {
    let n = graph.node_count;
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &graph.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut labels = vec![u32::MAX; n];
    let mut count = 0u32;
    for start in 0..n {
        if labels[start] != u32::MAX {
            continue;
        }
        labels[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if labels[v] == u32::MAX {
                    labels[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    ComponentLabeling {
        labels,
        component_count: count as usize,
    }
}

/// All pairs `u < v` at distance `<= t`.
pub fn radius_graph_bruteforce(points: &[Point2], t: f64) -> Result<AdjacencyGraph> {
    if points.len() > MAX_BRUTEFORCE_POINTS {
        return Err(Error::contract(format!(
            "brute-force radius graph refused for {} > {MAX_BRUTEFORCE_POINTS} points",
            points.len()
        )));
    }
    let mut edges = Vec::new();
    for u in 0..points.len() {
        for v in u + 1..points.len() {
            if points[u].distance(points[v]) <= t {
                edges.push((u, v));
            }
        }
    }
    Ok(AdjacencyGraph {
        node_count: points.len(),
        edges,
    })
}

/// Components of the exact radius graph `{(u, v) : d(u, v) <= t}`.
pub fn radius_cluster_bruteforce(points: &[Point2], t: f64) -> Result<ComponentLabeling> {
    Ok(bfs_components(&radius_graph_bruteforce(points, t)?))
}

/// Hull vertices by the all-pairs half-plane test: `(i, j)` is a hull edge
/// when no point lies strictly to its right and collinear points lie within
/// it. Returns the distinct vertices in ascending `(x, y)` order.
pub fn hull_bruteforce(points: &[Point2]) -> Result<Vec<Point2>> {
    if points.is_empty() || points.len() > 1000 {
        return Err(Error::contract("brute-force hull needs 1 to 1000 points"));
    }
    let mut distinct: Vec<Point2> = points.to_vec();
    distinct.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    distinct.dedup();
    if distinct.len() == 1 {
        return Ok(distinct);
    }
    let within = |a: Point2, b: Point2, p: Point2| {
        let d = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
        d >= 0.0 && d <= a.distance_squared(b)
    };
    let mut vertices = Vec::new();
    for (i, &a) in distinct.iter().enumerate() {
        for (j, &b) in distinct.iter().enumerate() {
            if i == j {
                continue;
            }
            let edge = distinct.iter().all(|&p| {
                let c = cross(a, b, p);
                c > 0.0 || (c == 0.0 && within(a, b, p))
            });
            if edge {
                vertices.push(a);
                vertices.push(b);
            }
        }
    }
    vertices.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    vertices.dedup();
    Ok(vertices)
}

/// Minimum-area axis-aligned box over orientations `0, step, 2 step, ...`
/// up to a quarter turn, rotated back.
pub fn min_box_sweep(points: &[Point2], angle_step: f64) -> Result<OrientedBox2D> {
    if points.is_empty() || !(angle_step > 0.0) {
        return Err(Error::contract("sweep needs points and a positive step"));
    }
    let steps = (std::f64::consts::FRAC_PI_2 / angle_step).ceil() as usize;
    let mut best: Option<(f64, OrientedBox2D)> = None;
    for i in 0..steps {
        let candidate = aligned_box_at(points, i as f64 * angle_step);
        if best.is_none_or(|(a, _)| candidate.0 < a) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one orientation").1)
}

/// Largest set of disjoint `(pred, gt)` pairs with IoU > 0.5, found by
/// enumeration. Ties in size are broken by the larger IoU sum. Sorted by pair.
pub fn match_exhaustive(
    pred: &InstanceLabeling,
    gt: &InstanceLabeling,
    class_id: u32,
    config: &ClassConfig,
) -> Result<Vec<(u32, u32)>> {
    let ov = segment_overlaps(pred, gt, class_id, config)?;
    if ov.pred_areas.len() > MAX_EXHAUSTIVE_SEGMENTS || ov.gt_areas.len() > MAX_EXHAUSTIVE_SEGMENTS {
        return Err(Error::contract("too many segments for exhaustive matching"));
    }
    let preds: Vec<u32> = ov.pred_areas.keys().copied().collect();
    let gts: Vec<u32> = ov.gt_areas.keys().copied().collect();
    let iou: BTreeMap<(u32, u32), f64> = preds
        .iter()
        .flat_map(|&p| gts.iter().map(move |&g| (p, g)))
        .map(|(p, g)| ((p, g), ov.iou(p, g)))
        .collect();

    let mut best: (usize, f64, Vec<(u32, u32)>) = (0, 0.0, Vec::new());
    let mut current = Vec::new();
    let mut used = vec![false; gts.len()];
    enumerate(0, &preds, &gts, &iou, &mut used, &mut current, 0.0, &mut best);
    let mut pairs = best.2;
    pairs.sort_unstable();
    Ok(pairs)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    i: usize,
    preds: &[u32],
    gts: &[u32],
    iou: &BTreeMap<(u32, u32), f64>,
    used: &mut [bool],
    current: &mut Vec<(u32, u32)>,
    sum: f64,
    best: &mut (usize, f64, Vec<(u32, u32)>),
) {
    if i == preds.len() {
        if current.len() > best.0 || (current.len() == best.0 && sum > best.1) {
            *best = (current.len(), sum, current.clone());
        }
        return;
    }
    enumerate(i + 1, preds, gts, iou, used, current, sum, best);
    for (j, &g) in gts.iter().enumerate() {
        let v = iou[&(preds[i], g)];
        if !used[j] && v > 0.5 {
            used[j] = true;
            current.push((preds[i], g));
            enumerate(i + 1, preds, gts, iou, used, current, sum + v, best);
            current.pop();
            used[j] = false;
        }
    }
}

/// Sanity check used by the suites: `knn` agrees with the linear scan.
pub fn knn_matches_linear_scan(tree: &KdTree2<'_>, query_index: usize, k: usize) -> bool {
    tree.knn(query_index, k).ok() == Some(knn_linear_scan(tree.points(), query_index, k))
}
