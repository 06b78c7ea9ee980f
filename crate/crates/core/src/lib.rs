// SPDX-License-Identifier: Apache-2.0

//! Training-free panoptic instance extraction for LiDAR scans.
//!
//! Given per-point semantic predictions, every thing class is projected to
//! the bird's-eye view, linked through a thresholded kNN graph, and split
//! into connected components; components that are too large for their class
//! can be refined by box splitting. The [`metrics`] module scores the result
//! with the usual panoptic measures.
//!
//! ```
//! use alpine::{cluster_scan, ClassConfig, PointCloud};
//!
//! let config = ClassConfig::semantickitti();
//! let cloud = PointCloud::new(
//!     vec![[10.0, 0.0, 0.0], [10.5, 0.0, 0.0], [20.0, 0.0, 0.0]],
//!     vec![1, 1, 1],
//! )?;
//! let labels = cluster_scan(&cloud, &config, true)?;
//! assert_eq!(labels.instance, vec![1, 1, 2]);
//! # Ok::<(), alpine::Error>(())
//! ```

pub mod cli;
pub mod cluster;
pub mod config;
mod error;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod metrics;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod split;
pub mod synth;

pub use cluster::{cluster_class, cluster_scan, edge_threshold, project_bev, InstanceLabeling, PointCloud};
pub use config::{ClassConfig, ClassKind, SmallSegments, ThresholdMode};
pub use error::{Error, Result};
pub use geometry::{convex_hull, fit_min_area_box, KdTree2, OrientedBox2D, Point2};
pub use metrics::{panoptic_quality, PanopticReport};
pub use split::{fits_in_reference, split_cluster, SplitParams};
