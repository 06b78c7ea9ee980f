// SPDX-License-Identifier: Apache-2.0

//! 2-D geometric kernels on the BEV plane: kNN search, convex hull and
//! minimum-area box fitting.

mod bbox;
mod hull;
mod kdtree;

pub use bbox::{aligned_box_at, fit_min_area_box, normalize_yaw, OrientedBox2D};
pub use hull::{convex_hull, cross, ConvexHull, HullKind, COLLINEAR_EPS};
pub use kdtree::{KdTree2, Neighbor};

use crate::error::{Error, Result};

/// A point in the BEV plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn distance_squared(self, other: Point2) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        self.distance_squared(other).sqrt()
    }

    /// Distance to the origin, i.e. the BEV range of a sensor-frame point.
    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub(crate) fn coord(self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }
}

pub(crate) fn check_finite(points: &[Point2]) -> Result<()> {
    match points.iter().position(|p| !p.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!(
            "non-finite coordinate at point {i}: ({}, {})",
            points[i].x, points[i].y
        ))),
        None => Ok(()),
    }
}
