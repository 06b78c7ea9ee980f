// SPDX-License-Identifier: Apache-2.0

//! Per-class BEV clustering of a semantically labeled scan.
//!
//! Each thing class is handled on its own: its points are projected onto the
//! (x, y) plane, linked to their `k` nearest neighbors when closer than the
//! class threshold, and every connected component becomes one instance.
//! Optionally, components larger than the class reference box are split
//! further (see [`crate::split`]).

use crate::config::{ClassConfig, ThresholdMode};
use crate::error::{Error, Result};
use crate::geometry::{KdTree2, Point2};
use crate::graph::{threshold_components, ComponentLabeling, EdgeThreshold};
use crate::split::{split_cluster, SplitParams};

/// A scan: sensor-frame coordinates in meters and one semantic id per point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub xyz: Vec<[f32; 3]>,
    pub semantic: Vec<u32>,
}

impl PointCloud {
    pub fn new(xyz: Vec<[f32; 3]>, semantic: Vec<u32>) -> Result<Self> {
        if xyz.len() != semantic.len() {
            return Err(Error::CountMismatch {
                left: "coordinates".into(),
                left_len: xyz.len(),
                right: "semantic labels".into(),
                right_len: semantic.len(),
            });
        }
        if let Some(i) = xyz.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite coordinate at point {i}")));
        }
        Ok(PointCloud { xyz, semantic })
    }

    pub fn len(&self) -> usize {
        self.xyz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xyz.is_empty()
    }

    pub fn bev(&self, i: usize) -> Point2 {
        let [x, y, _] = self.xyz[i];
        Point2::new(x as f64, y as f64)
    }
}

/// Panoptic labels: a semantic id and an instance id per point. Instance 0
/// means "no instance".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceLabeling {
    pub semantic: Vec<u32>,
    pub instance: Vec<u32>,
}

impl InstanceLabeling {
    pub fn new(semantic: Vec<u32>, instance: Vec<u32>) -> Result<Self> {
        if semantic.len() != instance.len() {
            return Err(Error::CountMismatch {
                left: "semantic labels".into(),
                left_len: semantic.len(),
                right: "instance labels".into(),
                right_len: instance.len(),
            });
        }
        Ok(InstanceLabeling { semantic, instance })
    }

    pub fn len(&self) -> usize {
        self.semantic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantic.is_empty()
    }

    /// Keeps only the points selected by `mask`.
    pub fn select(&self, mask: &[bool]) -> InstanceLabeling {
        let keep = |v: &[u32]| {
            v.iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(&x, _)| x)
                .collect()
        };
        InstanceLabeling {
            semantic: keep(&self.semantic),
            instance: keep(&self.instance),
        }
    }
}

/// BEV coordinates of the points of one class, in cloud order, with their
/// indices into the cloud.
pub fn project_bev(
    cloud: &PointCloud,
    class_id: u32,
    config: &ClassConfig,
) -> Result<(Vec<Point2>, Vec<usize>)> {
    if config.class(class_id).is_none() {
        return Err(Error::contract(format!("class {class_id} is not in the class table")));
    }
    let indices: Vec<usize> = (0..cloud.len())
        .filter(|&i| cloud.semantic[i] == class_id)
        .collect();
    let points = indices.iter().map(|&i| cloud.bev(i)).collect();
    Ok((points, indices))
}

/// Maximum edge length between two points of `class_id` whose BEV ranges
/// are `range_u` and `range_v`.
pub fn edge_threshold(
    config: &ClassConfig,
    class_id: u32,
    range_u: f64,
    range_v: f64,
) -> Result<f64> {
    let t = config
        .class_threshold(class_id)
        .ok_or_else(|| Error::contract(format!("class {class_id} is not a thing class")))?;
    Ok(match config.threshold_mode {
        ThresholdMode::Constant => t,
        ThresholdMode::RangeProportional { coefficient } => coefficient * t * range_u.max(range_v),
    })
}

/// Threshold rule for one class over a fixed point set.
struct ClassThreshold {
    class_threshold: f64,
    mode: ThresholdMode,
    ranges: Vec<f64>,
    bound: f64,
}

impl ClassThreshold {
    fn new(class_threshold: f64, mode: ThresholdMode, points: &[Point2]) -> Self {
        let ranges: Vec<f64> = match mode {
            ThresholdMode::Constant => Vec::new(),
            ThresholdMode::RangeProportional { .. } => points.iter().map(|p| p.norm()).collect(),
        };
        let bound = match mode {
            ThresholdMode::Constant => class_threshold,
            ThresholdMode::RangeProportional { coefficient } => {
                let max_range = ranges.iter().copied().fold(0.0, f64::max);
                coefficient * class_threshold * max_range
            }
        };
        ClassThreshold {
            class_threshold,
            mode,
            ranges,
            bound,
        }
    }
}

impl EdgeThreshold for ClassThreshold {
    fn max_distance(&self, u: usize, v: usize) -> f64 {
        match self.mode {
            ThresholdMode::Constant => self.class_threshold,
            ThresholdMode::RangeProportional { coefficient } => {
                coefficient * self.class_threshold * self.ranges[u].max(self.ranges[v])
            }
        }
    }

    fn bound(&self) -> Option<f64> {
        Some(self.bound)
    }
}

/// Components of one thing class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassClusters {
    pub class_id: u32,
    /// BEV points of the class, in cloud order.
    pub points: Vec<Point2>,
    /// Cloud index of each entry of `points`.
    pub indices: Vec<usize>,
    pub components: ComponentLabeling,
}

pub fn cluster_class(cloud: &PointCloud, class_id: u32, config: &ClassConfig) -> Result<ClassClusters> {
    let t = config
        .class_threshold(class_id)
        .ok_or_else(|| Error::contract(format!("class {class_id} is not a thing class")))?;
    let (points, indices) = project_bev(cloud, class_id, config)?;
    let tree = KdTree2::build(&points)?;
    let rule = ClassThreshold::new(t, config.threshold_mode, &points);
    let components = threshold_components(&tree, config.k, &rule)?;
    Ok(ClassClusters {
        class_id,
        points,
        indices,
        components,
    })
}

/// Runs the clustering on every thing class and assigns instance ids.
///
/// Instance ids are dense from 1, ordered by class id and then by the first
/// point of each instance. Stuff points and points of classes outside the
/// table get instance 0. The semantic array is copied unchanged.
pub fn cluster_scan(cloud: &PointCloud, config: &ClassConfig, enable_split: bool) -> Result<InstanceLabeling> {
    config.validate()?;
    let mut instance = vec![0u32; cloud.len()];
    let mut next_id = 1u32;
    for class_id in config.thing_ids() {
        let clusters = cluster_class(cloud, class_id, config)?;
        if clusters.points.is_empty() {
            continue;
        }
        let local = if enable_split {
            split_components(&clusters, config)?
        } else {
            clusters.components.labels.clone()
        };
        let renumbered = ComponentLabeling::from_keys(local);
        for (&cloud_index, &label) in clusters.indices.iter().zip(&renumbered.labels) {
            instance[cloud_index] = next_id + label;
        }
        next_id += renumbered.component_count as u32;
    }
    Ok(InstanceLabeling {
        semantic: cloud.semantic.clone(),
        instance,
    })
}

/// Splits every component of a class; returns a class-local label per point.
fn split_components(clusters: &ClassClusters, config: &ClassConfig) -> Result<Vec<u32>> {
    let params = SplitParams::for_class(config, clusters.class_id)
        .ok_or_else(|| Error::contract(format!("class {} has no reference box", clusters.class_id)))?;
    let t = config.class_threshold(clusters.class_id).expect("thing class");
    let mut labels = vec![0u32; clusters.points.len()];
    let mut next = 0u32;
    for group in clusters.components.groups() {
        let pts: Vec<Point2> = group.iter().map(|&i| clusters.points[i]).collect();
        for subset in split_cluster(&pts, &params, t)? {
            for j in subset {
                labels[group[j]] = next;
            }
            next += 1;
        }
    }
    Ok(labels)
}
