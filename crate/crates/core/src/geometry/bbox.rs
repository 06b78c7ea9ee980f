// SPDX-License-Identifier: Apache-2.0

//! Minimum-area enclosing rectangle by hull-edge rotation.

use std::f64::consts::{FRAC_PI_2, PI};

use super::hull::{convex_hull, HullKind};
use super::Point2;
use crate::error::Result;

/// A rotated rectangle in the BEV plane.
///
/// Canonical form: `half_length >= half_width >= 0` and `yaw` in `[0, π)`,
/// where `yaw` is the direction of the long side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox2D {
    pub center: Point2,
    pub half_length: f64,
    pub half_width: f64,
    pub yaw: f64,
}

impl OrientedBox2D {
    /// Builds a canonical box from a center, extents along `yaw` and its
    /// perpendicular, in any order.
    pub fn new(center: Point2, half_a: f64, half_b: f64, yaw: f64) -> Self {
        let (half_length, half_width, yaw) = if half_b > half_a {
            (half_b, half_a, yaw + FRAC_PI_2)
        } else {
            (half_a, half_b, yaw)
        };
        OrientedBox2D {
            center,
            half_length,
            half_width,
            yaw: normalize_yaw(yaw),
        }
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_length * self.half_width
    }

    /// Expresses `p` in the box frame (long axis along +x).
    pub fn to_local(&self, p: Point2) -> Point2 {
        let (s, c) = self.yaw.sin_cos();
        let (dx, dy) = (p.x - self.center.x, p.y - self.center.y);
        Point2::new(c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let q = self.to_local(p);
        q.x.abs() <= self.half_length + tol && q.y.abs() <= self.half_width + tol
    }

    pub fn corners(&self) -> [Point2; 4] {
        let (s, c) = self.yaw.sin_cos();
        let (l, w) = (self.half_length, self.half_width);
        [(l, w), (-l, w), (-l, -w), (l, -w)].map(|(u, v)| {
            Point2::new(self.center.x + c * u - s * v, self.center.y + s * u + c * v)
        })
    }
}

/// Maps an angle onto `[0, π)`, the period of a rectangle's orientation.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let y = yaw.rem_euclid(PI);
    if y >= PI {
        0.0
    } else {
        y
    }
}

/// Axis-aligned bounds of `points` after rotating them by `-theta`,
/// returned as `(area, box)` with the box already rotated back.
pub fn aligned_box_at(points: &[Point2], theta: f64) -> (f64, OrientedBox2D) {
    let (s, c) = theta.sin_cos();
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let x = c * p.x + s * p.y;
        let y = -s * p.x + c * p.y;
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
    let center = Point2::new(c * cx - s * cy, s * cx + c * cy);
    let area = (xmax - xmin) * (ymax - ymin);
    (
        area,
        OrientedBox2D::new(center, 0.5 * (xmax - xmin), 0.5 * (ymax - ymin), theta),
    )
}

/// Smallest-area rectangle enclosing `points`.
///
/// For every convex hull edge the hull is rotated so that the edge lies on
/// the x-axis and its axis-aligned bounds are measured; the smallest of those
/// boxes is returned (first one on exact ties). Hull vertices carry the
/// extremes of the whole cloud, so only they are rotated.
///
/// A single distinct point gives a zero-extent box; collinear input gives a
/// zero-width box along the segment.
pub fn fit_min_area_box(points: &[Point2]) -> Result<OrientedBox2D> {
    let hull = convex_hull(points)?;
    let v = &hull.vertices;
    match hull.kind {
        HullKind::Point => Ok(OrientedBox2D {
            center: v[0],
            half_length: 0.0,
            half_width: 0.0,
            yaw: 0.0,
        }),
        HullKind::Segment => {
            let (a, b) = (v[0], v[1]);
            let yaw = (b.y - a.y).atan2(b.x - a.x);
            Ok(OrientedBox2D::new(
                Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)),
                0.5 * a.distance(b),
                0.0,
                yaw,
            ))
        }
        HullKind::Polygon => {
            let mut best: Option<(f64, OrientedBox2D)> = None;
            for (a, b) in hull.edges() {
                let theta = (b.y - a.y).atan2(b.x - a.x);
                let candidate = aligned_box_at(v, theta);
                if best.is_none_or(|(area, _)| candidate.0 < area) {
                    best = Some(candidate);
                }
            }
            Ok(best.expect("polygon hull has edges").1)
        }
    }
}
