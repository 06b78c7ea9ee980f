// SPDX-License-Identifier: Apache-2.0

use super::{check_finite, Point2};
use crate::error::{Error, Result};

/// Cross-product tolerance below which three points count as collinear.
pub const COLLINEAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HullKind {
    /// All input points coincide.
    Point,
    /// All input points lie on one line.
    Segment,
    Polygon,
}

/// Convex hull with vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    pub vertices: Vec<Point2>,
    pub kind: HullKind,
}

impl ConvexHull {
    /// Hull edges as `(from, to)` pairs following the vertex order. A segment
    /// hull yields its two directed edges, a point hull none.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        let count = if n < 2 { 0 } else { n };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn is_degenerate(&self) -> bool {
        self.kind != HullKind::Polygon
    }

    /// True when `p` lies inside or on the hull, up to `tol` of signed distance.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.kind {
            HullKind::Point => self.vertices[0].distance(p) <= tol,
            HullKind::Segment => {
                segment_distance(self.vertices[0], self.vertices[1], p) <= tol
            }
            HullKind::Polygon => self.edges().all(|(a, b)| {
                let len = a.distance(b);
                cross(a, b, p) / len >= -tol
            }),
        }
    }
}

/// Twice the signed area of triangle (o, a, b); positive for a left turn.
#[inline]
pub fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a.distance(p);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    Point2::new(a.x + t * dx, a.y + t * dy).distance(p)
}

/// Andrew's monotone chain. Duplicate points are removed first and collinear
/// boundary points are dropped from the result.
pub fn convex_hull(points: &[Point2]) -> Result<ConvexHull> {
    if points.is_empty() {
        return Err(Error::contract("convex hull of an empty point set"));
    }
    check_finite(points)?;

    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    sorted.dedup();

    if sorted.len() == 1 {
        return Ok(ConvexHull {
            vertices: sorted,
            kind: HullKind::Point,
        });
    }

    let mut hull: Vec<Point2> = Vec::with_capacity(2 * sorted.len());
    for &p in &sorted {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_EPS
        {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in sorted.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= COLLINEAR_EPS
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        // All points collinear: keep the two extreme points.
        let (first, last) = (sorted[0], sorted[sorted.len() - 1]);
        return Ok(ConvexHull {
            vertices: vec![first, last],
            kind: HullKind::Segment,
        });
    }
    Ok(ConvexHull {
        vertices: hull,
        kind: HullKind::Polygon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn square_with_center() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]);
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.kind, HullKind::Polygon);
        assert_eq!(h.vertices.len(), 4);
        assert!(!h.vertices.contains(&Point2::new(0.5, 0.5)));
        assert_eq!(h.edges().count(), 4);
    }

    #[test]
    fn triangle_is_ccw() {
        let p = pts(&[(0.0, 0.0), (0.0, 2.0), (3.0, 0.0)]);
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.vertices.len(), 3);
        let v = &h.vertices;
        assert!(cross(v[0], v[1], v[2]) > 0.0);
    }

    #[test]
    fn collinear_boundary_points_removed() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (1.0, 2.0)]);
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.vertices.len(), 4);
    }

    #[test]
    fn degenerate_inputs() {
        let h = convex_hull(&pts(&[(1.0, 1.0), (1.0, 1.0)])).unwrap();
        assert_eq!(h.kind, HullKind::Point);
        assert_eq!(h.edges().count(), 0);

        let h = convex_hull(&pts(&[(0.0, 0.0), (2.0, 2.0), (1.0, 1.0), (3.0, 3.0)])).unwrap();
        assert_eq!(h.kind, HullKind::Segment);
        assert_eq!(h.vertices, pts(&[(0.0, 0.0), (3.0, 3.0)]));
        assert!(h.contains(Point2::new(1.5, 1.5), 1e-9));
        assert!(!h.contains(Point2::new(1.5, 1.6), 1e-9));

        assert!(matches!(convex_hull(&[]), Err(Error::Contract(_))));
    }
}
