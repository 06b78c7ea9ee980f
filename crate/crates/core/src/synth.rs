// SPDX-License-Identifier: Apache-2.0

//! Deterministic synthetic LiDAR scans with ground truth.
//!
//! A spinning multi-beam sensor is ray cast against a flat ground, a
//! surrounding wall, and box-shaped objects of the SemanticKITTI thing
//! classes. Point density therefore falls off with range the way a real
//! ring-pattern sensor does. Labels use the SemanticKITTI train ids of
//! [`ClassConfig::semantickitti`].

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cluster::{InstanceLabeling, PointCloud};
use crate::config::ClassConfig;
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const ROAD: u32 = 9;
pub const SIDEWALK: u32 = 11;
pub const BUILDING: u32 = 13;
pub const VEGETATION: u32 = 15;
pub const TERRAIN: u32 = 17;
pub const CAR: u32 = 1;

/// Object heights per thing class, meters.
const HEIGHTS: [(u32, f64); 8] = [
    (1, 1.5),
    (2, 1.1),
    (3, 1.2),
    (4, 3.5),
    (5, 3.0),
    (6, 1.75),
    (7, 1.75),
    (8, 1.6),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub seed: u64,
    pub beams: usize,
    pub azimuth_steps: usize,
    pub elevation_max_deg: f64,
    pub elevation_min_deg: f64,
    /// Sensor height above the ground, meters.
    pub sensor_height: f64,
    /// Objects to place, as `(class id, count)`.
    pub objects: Vec<(u32, usize)>,
    /// Object footprints are the class reference box scaled per side by a
    /// factor drawn from this range.
    pub size_scale: (f64, f64),
    pub min_range: f64,
    pub max_range: f64,
    /// Minimum BEV clearance between the bounding circles of two objects.
    pub min_gap: f64,
    /// Keep objects in disjoint azimuth sectors so none occludes another,
    /// turned broadside to the sensor.
    pub separable: bool,
    /// Adds two cars parked side by side with this BEV gap.
    pub pair_gap: Option<f64>,
    /// Standard deviation of the range noise, meters.
    pub range_noise: f64,
    /// Extrude objects above the sensor so that no roof is scanned. Roof
    /// returns are sparse and can sit farther than the class threshold from
    /// the visible sides.
    pub tall_objects: bool,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            seed: 0,
            beams: 64,
            azimuth_steps: 1875,
            elevation_max_deg: 2.0,
            elevation_min_deg: -24.8,
            sensor_height: 1.73,
            objects: vec![(1, 12), (2, 3), (3, 2), (4, 2), (5, 2), (6, 6), (7, 2), (8, 1)],
            size_scale: (0.85, 1.1),
            min_range: 4.0,
            max_range: 40.0,
            min_gap: 0.5,
            separable: false,
            pair_gap: None,
            range_noise: 0.01,
            tall_objects: false,
        }
    }
}

impl SceneParams {
    /// Objects well apart, in disjoint sectors, no larger than the reference
    /// boxes: every object is recovered exactly by the clustering.
    pub fn separable(seed: u64) -> Self {
        SceneParams {
            seed,
            objects: vec![(1, 5), (2, 2), (3, 1), (4, 1), (5, 1), (6, 4), (7, 1), (8, 1)],
            size_scale: (0.75, 0.9),
            min_range: 8.0,
            min_gap: 3.5,
            separable: true,
            tall_objects: true,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.beams >= 1
            && self.azimuth_steps >= 1
            && self.elevation_max_deg > self.elevation_min_deg
            && self.sensor_height > 0.0
            && self.size_scale.0 > 0.0
            && self.size_scale.0 <= self.size_scale.1
            && self.min_range > 0.0
            && self.min_range < self.max_range
            && self.max_range <= 45.0
            && self.min_gap >= 0.0
            && self.range_noise >= 0.0
            && self.pair_gap.is_none_or(|g| g > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::contract(format!("invalid scene parameters {self:?}")))
        }
    }
}

/// One placed object.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedObject {
    pub class_id: u32,
    pub instance: u32,
    pub center: (f64, f64),
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub yaw: f64,
}

impl PlacedObject {
    fn radius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    fn range(&self) -> f64 {
        self.center.0.hypot(self.center.1)
    }

    fn azimuth_interval(&self) -> (f64, f64) {
        let az = self.center.1.atan2(self.center.0);
        let half = (self.radius() / self.range()).min(1.0).asin();
        (az - half, az + half)
    }

    /// Ray parameter of the first hit of a ray from the origin, if any.
    fn intersect(&self, dir: [f64; 3], ground_z: f64) -> Option<f64> {
        let (s, c) = self.yaw.sin_cos();
        let (ox, oy) = (-self.center.0, -self.center.1);
        let o = [c * ox + s * oy, -s * ox + c * oy, -ground_z];
        let d = [c * dir[0] + s * dir[1], -s * dir[0] + c * dir[1], dir[2]];
        let lo = [-0.5 * self.length, -0.5 * self.width, 0.0];
        let hi = [0.5 * self.length, 0.5 * self.width, self.height];
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for a in 0..3 {
            if d[a].abs() < 1e-12 {
                if o[a] < lo[a] || o[a] > hi[a] {
                    return None;
                }
            } else {
                let (ta, tb) = ((lo[a] - o[a]) / d[a], (hi[a] - o[a]) / d[a]);
                t0 = t0.max(ta.min(tb));
                t1 = t1.min(ta.max(tb));
            }
        }
        (t0 <= t1 && t0 > 0.0).then_some(t0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub cloud: PointCloud,
    pub gt: InstanceLabeling,
    pub objects: Vec<PlacedObject>,
}

fn height_of(class_id: u32) -> f64 {
    HEIGHTS
        .iter()
        .find(|(c, _)| *c == class_id)
        .map_or(1.5, |(_, h)| *h)
}

fn wall_radius(az: f64) -> f64 {
    55.0 + 5.0 * (3.0 * az).sin()
}

fn angle_overlap(a: (f64, f64), b: (f64, f64), margin: f64) -> bool {
    // Compare on the circle by shifting b's center next to a's.
    let ca = 0.5 * (a.0 + a.1);
    let cb = 0.5 * (b.0 + b.1);
    let delta = (cb - ca + PI).rem_euclid(TAU) - PI;
    delta.abs() < 0.5 * (a.1 - a.0) + 0.5 * (b.1 - b.0) + margin
}

fn place_objects(params: &SceneParams, config: &ClassConfig, rng: &mut ChaCha8Rng) -> Result<Vec<PlacedObject>> {
    let mut objects: Vec<PlacedObject> = Vec::new();
    let fits = |o: &PlacedObject, objects: &[PlacedObject]| {
        o.range() - o.radius() > 2.0
            && objects.iter().all(|q| {
                let d = (o.center.0 - q.center.0).hypot(o.center.1 - q.center.1);
                d >= o.radius() + q.radius() + params.min_gap
                    && !(params.separable
                        && angle_overlap(o.azimuth_interval(), q.azimuth_interval(), 1f64.to_radians()))
            })
    };

    let height = |class_id| {
        if params.tall_objects {
            params.sensor_height + 1.0
        } else {
            height_of(class_id)
        }
    };
    if let Some(gap) = params.pair_gap {
        let (length, width) = config
            .reference_box(CAR)
            .ok_or_else(|| Error::contract("class table has no car class"))?;
        let (length, width) = (0.95 * length, 0.95 * width);
        let az = rng.random_range(0.0..TAU);
        let range = 12.0;
        let (ux, uy) = (az.cos(), az.sin());
        let offset = 0.5 * (width + gap);
        for side in [-1.0, 1.0] {
            objects.push(PlacedObject {
                class_id: CAR,
                instance: 0,
                center: (range * ux - side * offset * uy, range * uy + side * offset * ux),
                length,
                width,
                height: height(CAR),
                yaw: az,
            });
        }
    }

    for &(class_id, count) in &params.objects {
        let (rl, rw) = config
            .reference_box(class_id)
            .ok_or_else(|| Error::contract(format!("class {class_id} is not a thing class")))?;
        for _ in 0..count {
            for _attempt in 0..200 {
                let range = rng.random_range(params.min_range..params.max_range);
                let az = rng.random_range(0.0..TAU);
                let (s0, s1) = params.size_scale;
                let o = PlacedObject {
                    class_id,
                    instance: 0,
                    center: (range * az.cos(), range * az.sin()),
                    length: rl * rng.random_range(s0..=s1),
                    width: rw * rng.random_range(s0..=s1),
                    height: height(class_id),
                    yaw: rng.random_range(0.0..PI),
                };
                // Broadside to the sensor: long sides seen end-on return
                // sparse columns that may not connect.
                let o = if params.separable {
                    PlacedObject {
                        yaw: az + 0.5 * PI + rng.random_range(-0.25..0.25),
                        ..o
                    }
                } else {
                    o
                };
                if fits(&o, &objects) {
                    objects.push(o);
                    break;
                }
            }
        }
    }
    for (i, o) in objects.iter_mut().enumerate() {
        o.instance = i as u32 + 1;
    }
    Ok(objects)
}

fn ground_class(x: f64, y: f64) -> u32 {
    let _ = x;
    match y.abs() {
        a if a < 7.0 => ROAD,
        a if a < 10.0 => SIDEWALK,
        _ => TERRAIN,
    }
}

/// Generates one scan. Identical parameters give identical scenes.
pub fn generate_scene(params: &SceneParams, config: &ClassConfig) -> Result<SyntheticScene> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let objects = place_objects(params, config, &mut rng)?;
    let noise = Normal::new(0.0, params.range_noise.max(1e-12)).expect("valid sigma");
    let ground_z = -params.sensor_height;

    // Lasers of a spinning head fire at staggered azimuths, so one column of
    // returns is not a perfect vertical stack.
    let step = TAU / params.azimuth_steps as f64;
    let beam_offsets: Vec<f64> = (0..params.beams)
        .map(|_| rng.random_range(-0.5..0.5) * step)
        .collect();
    let intervals: Vec<(f64, f64)> = objects.iter().map(PlacedObject::azimuth_interval).collect();
    let n = params.beams * params.azimuth_steps;
    let mut xyz = Vec::with_capacity(n);
    let mut semantic = Vec::with_capacity(n);
    let mut instance = Vec::with_capacity(n);
    let mut candidates = Vec::with_capacity(objects.len());

    for a in 0..params.azimuth_steps {
        let column = step * a as f64;
        candidates.clear();
        candidates.extend(
            (0..objects.len()).filter(|&i| angle_overlap((column, column), intervals[i], step)),
        );
        for b in 0..params.beams {
            let az = column + beam_offsets[b];
            let (saz, caz) = az.sin_cos();
            let frac = if params.beams == 1 { 0.0 } else { b as f64 / (params.beams - 1) as f64 };
            let el = (params.elevation_max_deg
                + frac * (params.elevation_min_deg - params.elevation_max_deg))
                .to_radians();
            let (sel, cel) = el.sin_cos();
            let dir = [cel * caz, cel * saz, sel];

            // Wall first, then ground and objects if closer.
            let mut t = wall_radius(az) / cel;
            let mut label = (if (az * 4.0).sin() > 0.0 { BUILDING } else { VEGETATION }, 0);
            if sel < 0.0 {
                let tg = ground_z / sel;
                if tg < t {
                    t = tg;
                    label = (ground_class(tg * dir[0], tg * dir[1]), 0);
                }
            }
            for &i in &candidates {
                if let Some(to) = objects[i].intersect(dir, ground_z) {
                    if to < t {
                        t = to;
                        label = (objects[i].class_id, objects[i].instance);
                    }
                }
            }
            let r = t + noise.sample(&mut rng) * f64::from(params.range_noise > 0.0);
            xyz.push([(r * dir[0]) as f32, (r * dir[1]) as f32, (r * dir[2]) as f32]);
            semantic.push(label.0);
            instance.push(label.1);
        }
    }

    // Occlusion can hide an object entirely; keep instance ids dense.
    let mut seen = vec![0u32; objects.len() + 1];
    let mut next = 1;
    for id in instance.iter_mut().filter(|i| **i > 0) {
        let slot = &mut seen[*id as usize];
        if *slot == 0 {
            *slot = next;
            next += 1;
        }
        *id = *slot;
    }
    let objects = objects
        .into_iter()
        .filter(|o| seen[o.instance as usize] > 0)
        .map(|o| PlacedObject {
            instance: seen[o.instance as usize],
            ..o
        })
        .collect();

    Ok(SyntheticScene {
        gt: InstanceLabeling::new(semantic.clone(), instance)?,
        cloud: PointCloud::new(xyz, semantic)?,
        objects,
    })
}

/// A crafted BEV scene of reference-box-sized blobs of one class placed in
/// a row, consecutive rectangles separated by `gap`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobScene {
    pub points: Vec<Point2>,
    /// Blob index of every point.
    pub blob: Vec<u32>,
    /// Footprints as `(length, width)`.
    pub sizes: Vec<(f64, f64)>,
}

/// Generates `gaps.len() + 1` filled rectangular blobs of `class_id`, each
/// sized between 80% and 100% of the class reference box per side and
/// sampled on a grid of step `spacing` with jitter of a quarter step. Blobs
/// are laid side by side (`side_by_side`) or end to end, consecutive
/// rectangles separated by the given BEV clearances, then the whole row is
/// rotated by a random yaw.
pub fn merged_blobs(
    config: &ClassConfig,
    class_id: u32,
    gaps: &[f64],
    side_by_side: bool,
    spacing: f64,
    seed: u64,
) -> Result<BlobScene> {
    let (rl, rw) = config
        .reference_box(class_id)
        .ok_or_else(|| Error::contract(format!("class {class_id} is not a thing class")))?;
    if gaps.iter().any(|g| !(*g >= 0.0 && g.is_finite())) || !(spacing > 0.0 && spacing <= rw) {
        return Err(Error::contract(format!("invalid blob scene: gaps {gaps:?}, spacing {spacing}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let yaw = rng.random_range(0.0..PI);
    let (syaw, cyaw) = yaw.sin_cos();
    let mut points = Vec::new();
    let mut blob = Vec::new();
    let mut sizes = Vec::new();
    let mut offset = 0.0;
    for b in 0..=gaps.len() {
        let length = rl * rng.random_range(0.8..=1.0);
        let width = rw * rng.random_range(0.8..=1.0);
        let nx = (length / spacing).ceil() as usize;
        let ny = (width / spacing).ceil() as usize;
        let (sx, sy) = (length / nx as f64, width / ny as f64);
        for i in 0..=nx {
            for j in 0..=ny {
                // Jitter stays inside the rectangle.
                let u = ((i as f64 + rng.random_range(-0.25..0.25)) * sx).clamp(0.0, length);
                let v = ((j as f64 + rng.random_range(-0.25..0.25)) * sy).clamp(0.0, width);
                let (x, y) = if side_by_side { (u, offset + v) } else { (offset + u, v) };
                points.push(Point2::new(cyaw * x - syaw * y, syaw * x + cyaw * y));
                blob.push(b as u32);
            }
        }
        offset += if side_by_side { width } else { length } + gaps.get(b).copied().unwrap_or(0.0);
        sizes.push((length, width));
    }
    Ok(BlobScene { points, blob, sizes })
}
