// SPDX-License-Identifier: Apache-2.0

//! Scene builders shared by the integration tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use alpine::synth::{merged_blobs, BlobScene};
use alpine::{ClassConfig, Point2, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relabels by first appearance so that equal partitions compare equal.
pub fn canonical(labels: &[u32]) -> Vec<u32> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len() as u32;
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Canonical form of a list of index subsets: sorted subsets, sorted list.
pub fn canonical_subsets(mut subsets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for s in &mut subsets {
        s.sort_unstable();
    }
    subsets.sort();
    subsets
}

/// Rectangular grid of points with corner `(x0, y0)` and the given step.
pub fn grid(x0: f64, y0: f64, length: f64, width: f64, step: f64) -> Vec<Point2> {
    let nx = (length / step).round() as usize;
    let ny = (width / step).round() as usize;
    let mut v = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            v.push(Point2::new(x0 + i as f64 * step, y0 + j as f64 * step));
        }
    }
    v
}

/// Two 4 x 1.8 m cars parked bumper to bumper 0.5 m apart, sampled every
/// 0.2 m. Returns the points and the number belonging to the first car.
pub fn two_car_fixture() -> (Vec<Point2>, usize) {
    let mut p = grid(0.0, 0.0, 4.0, 1.8, 0.2);
    let first = p.len();
    p.extend(grid(4.5, 0.0, 4.0, 1.8, 0.2));
    (p, first)
}

/// Gaussian-ish blobs of points, uniform noise mixed in.
pub fn clustered_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Point2> {
    let blobs = rng.random_range(1..=6);
    let centers: Vec<(f64, f64, f64)> = (0..blobs)
        .map(|_| {
            (
                rng.random_range(-extent..extent),
                rng.random_range(-extent..extent),
                rng.random_range(0.2..2.0),
            )
        })
        .collect();
    (0..n)
        .map(|_| {
            if rng.random_bool(0.1) {
                Point2::new(rng.random_range(-extent..extent), rng.random_range(-extent..extent))
            } else {
                let (cx, cy, s) = centers[rng.random_range(0..blobs)];
                Point2::new(cx + s * rng.random_range(-1.0..1.0), cy + s * rng.random_range(-1.0..1.0))
            }
        })
        .collect()
}

/// Random scan with up to 4 thing classes of up to 500 points each, plus
/// stuff points. Coordinates are stored in `f32` like real scans.
pub fn random_scan(rng: &mut ChaCha8Rng, config: &ClassConfig) -> PointCloud {
    let things = config.thing_ids();
    let stuff = config.stuff_ids();
    let n_classes = rng.random_range(1..=4.min(things.len()));
    let mut classes = things.clone();
    for i in 0..n_classes {
        let j = rng.random_range(i..classes.len());
        classes.swap(i, j);
    }
    let mut xyz = Vec::new();
    let mut semantic = Vec::new();
    for &c in &classes[..n_classes] {
        let n = rng.random_range(1..=500);
        for p in clustered_points(rng, n, 25.0) {
            xyz.push([p.x as f32, p.y as f32, rng.random_range(-2.0f32..2.0)]);
            semantic.push(c);
        }
    }
    for _ in 0..rng.random_range(0..300) {
        xyz.push([
            rng.random_range(-30.0f32..30.0),
            rng.random_range(-30.0f32..30.0),
            rng.random_range(-2.0f32..0.0),
        ]);
        semantic.push(stuff[rng.random_range(0..stuff.len())]);
    }
    // Shuffle so classes interleave in cloud order.
    for i in (1..xyz.len()).rev() {
        let j = rng.random_range(0..=i);
        xyz.swap(i, j);
        semantic.swap(i, j);
    }
    PointCloud::new(xyz, semantic).expect("valid cloud")
}

/// A crafted merged-object scene and how it was built.
pub struct CraftedScene {
    pub class_id: u32,
    pub gaps: Vec<f64>,
    pub scene: BlobScene,
}

/// Pairs and triples of reference-box-sized blobs. Gaps are drawn in
/// `[0.1 t_c, 0.9 t_c)`, consecutive gaps at least `0.05 t_c` apart, and
/// each blob is sampled at a third of the smallest gap (at most 0.1 m) so
/// that it stays connected well below the gap.
pub fn crafted_suite(config: &ClassConfig, count: usize, seed: u64) -> Vec<CraftedScene> {
    let mut rng = rng(seed);
    let things = config.thing_ids();
    (0..count)
        .map(|i| {
            let class_id = things[rng.random_range(0..things.len())];
            let tc = config.class_threshold(class_id).unwrap();
            let mut gaps = vec![rng.random_range(0.1..0.9) * tc];
            if rng.random_bool(0.5) {
                loop {
                    let g = rng.random_range(0.1..0.9) * tc;
                    if (g - gaps[0]).abs() >= 0.05 * tc {
                        gaps.push(g);
                        break;
                    }
                }
            }
            let spacing = (gaps.iter().copied().fold(f64::INFINITY, f64::min) / 3.0).min(0.1);
            let scene = merged_blobs(config, class_id, &gaps, rng.random_bool(0.5), spacing, seed ^ i as u64)
                .expect("valid blob scene");
            CraftedScene { class_id, gaps, scene }
        })
        .collect()
}

/// Points of thing classes whose instance assignment differs between two
/// labelings of the same cloud, after matching instances one-to-one by
/// largest overlap. Returns `(differing, thing points)`.
pub fn differing_points(a: &[u32], b: &[u32], semantic: &[u32], config: &ClassConfig) -> (usize, usize) {
    let mut overlap: HashMap<(u32, u32, u32), usize> = HashMap::new();
    let mut total = 0;
    for i in 0..a.len() {
        if config.is_thing(semantic[i]) {
            total += 1;
            *overlap.entry((semantic[i], a[i], b[i])).or_default() += 1;
        }
    }
    let mut pairs: Vec<_> = overlap.into_iter().collect();
    pairs.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    let (mut used_a, mut used_b) = (HashSet::new(), HashSet::new());
    let mut agreeing = 0;
    for ((s, x, y), n) in pairs {
        if !used_a.contains(&(s, x)) && !used_b.contains(&(s, y)) {
            used_a.insert((s, x));
            used_b.insert((s, y));
            agreeing += n;
        }
    }
    (total - agreeing, total)
}

pub fn distinct_instances(instance: &[u32]) -> usize {
    instance.iter().filter(|&&i| i > 0).collect::<HashSet<_>>().len()
}

/// Random prediction/ground-truth pair over the classes of `config`, with at
/// most `max_segments` instances per thing class on each side. The
/// prediction is derived from the ground truth by merging, splitting and
/// relabeling runs of points so that IoUs land on both sides of 0.5.
pub fn random_labeling_pair(
    rng: &mut ChaCha8Rng,
    config: &ClassConfig,
    n: usize,
    max_segments: u32,
) -> (alpine::InstanceLabeling, alpine::InstanceLabeling) {
    let classes: Vec<u32> = config.classes().map(|c| c.id).collect();
    let mut gt_sem = Vec::with_capacity(n);
    let mut gt_inst = Vec::with_capacity(n);
    for _ in 0..n {
        let s = if rng.random_bool(0.05) {
            config.ignore_label
        } else {
            classes[rng.random_range(0..classes.len())]
        };
        gt_sem.push(s);
        gt_inst.push(if config.is_thing(s) { rng.random_range(1..=max_segments) } else { 0 });
    }
    let mut pred_sem = gt_sem.clone();
    let mut pred_inst = gt_inst.clone();
    for i in 0..n {
        if rng.random_bool(0.15) {
            pred_sem[i] = classes[rng.random_range(0..classes.len())];
        }
        pred_inst[i] = if config.is_thing(pred_sem[i]) {
            if rng.random_bool(0.25) {
                rng.random_range(1..=max_segments)
            } else {
                gt_inst[i].clamp(1, max_segments)
            }
        } else {
            0
        };
    }
    (
        alpine::InstanceLabeling::new(pred_sem, pred_inst).unwrap(),
        alpine::InstanceLabeling::new(gt_sem, gt_inst).unwrap(),
    )
}
