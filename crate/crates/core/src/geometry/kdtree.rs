// SPDX-License-Identifier: Apache-2.0

//! Static 2-D tree for exact k-nearest-neighbor queries in the BEV plane.
//!
//! The tree is built once over an immutable point slice and stores only a
//! permutation of the input indices plus split planes, so every result maps
//! straight back to the caller's indexing. Results are ordered by ascending
//! squared distance and ties are broken by the lower original index, which
//! makes every query fully deterministic.

use super::{check_finite, Point2};
use crate::error::Result;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree2<'a> {
    points: &'a [Point2],
    order: Vec<u32>,
    nodes: Vec<Node>,
}

/// One kNN result: the neighbor's index into the tree's point slice and its
/// Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl<'a> KdTree2<'a> {
    /// Builds the tree. Rejects non-finite coordinates.
    pub fn build(points: &'a [Point2]) -> Result<Self> {
        check_finite(points)?;
        assert!(points.len() < u32::MAX as usize, "too many points for a KdTree2");
        let mut tree = KdTree2 {
            points,
            order: (0..points.len() as u32).collect(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        let id = self.nodes.len() as u32;
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return id;
        }

        // Split along the axis of largest spread.
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for &i in &self.order[start..end] {
            let p = self.points[i as usize];
            lo[0] = lo[0].min(p.x);
            hi[0] = hi[0].max(p.x);
            lo[1] = lo[1].min(p.y);
            hi[1] = hi[1].max(p.y);
        }
        let axis = usize::from(hi[1] - lo[1] > hi[0] - lo[0]);
        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let (pa, pb) = (points[a as usize].coord(axis), points[b as usize].coord(axis));
            pa.total_cmp(&pb).then(a.cmp(&b))
        });
        let value = points[self.order[mid] as usize].coord(axis);

        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id as usize] = Node::Split {
            axis: axis as u8,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &'a [Point2] {
        self.points
    }

    /// The `k` nearest neighbors of the point at `query_index`, excluding the
    /// query point itself. Coincident points are reported at distance 0.
    pub fn knn(&self, query_index: usize, k: usize) -> Result<Vec<Neighbor>> {
        self.knn_within(query_index, k, f64::INFINITY)
    }

    /// Like [`KdTree2::knn`] but only reports neighbors at distance
    /// `<= max_distance`. The result is exactly the prefix of the unbounded
    /// kNN list whose distances do not exceed the bound.
    pub fn knn_within(
        &self,
        query_index: usize,
        k: usize,
        max_distance: f64,
    ) -> Result<Vec<Neighbor>> {
        let mut out = Vec::with_capacity(k.min(self.len()));
        self.knn_within_into(query_index, k, max_distance, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`KdTree2::knn_within`] for hot loops.
    pub(crate) fn knn_within_into(
        &self,
        query_index: usize,
        k: usize,
        max_distance: f64,
        scratch: &mut Vec<(f64, u32)>,
        out: &mut Vec<Neighbor>,
    ) -> Result<()> {
        if query_index >= self.len() {
            return Err(crate::Error::contract(format!(
                "query index {query_index} out of range for {} points",
                self.len()
            )));
        }
        if k == 0 {
            return Err(crate::Error::contract("k must be at least 1"));
        }
        out.clear();
        scratch.clear();
        // Inflated so that rounding in `max * max` never drops a point with
        // `sqrt(d2) <= max`; the exact test is applied below.
        let bound = if max_distance.is_finite() {
            max_distance * max_distance * (1.0 + 8.0 * f64::EPSILON)
        } else {
            f64::INFINITY
        };
        let mut search = Search {
            query: self.points[query_index],
            skip: query_index as u32,
            k,
            bound,
            best: scratch,
        };
        self.search(0, &mut search);
        out.extend(
            search
                .best
                .iter()
                .map(|&(d2, i)| Neighbor {
                    index: i as usize,
                    distance: d2.sqrt(),
                })
                .take_while(|n| n.distance <= max_distance),
        );
        Ok(())
    }

    fn search(&self, node: u32, s: &mut Search<'_>) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    if i != s.skip {
                        s.offer(self.points[i as usize].distance_squared(s.query), i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = s.query.coord(axis as usize) - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, s);
                // `<=`: a point on the far side at equal distance may still win
                // the index tie-break.
                if diff * diff <= s.worst() {
                    self.search(far, s);
                }
            }
        }
    }
}

struct Search<'s> {
    query: Point2,
    skip: u32,
    k: usize,
    bound: f64,
    best: &'s mut Vec<(f64, u32)>,
}

impl Search<'_> {
    fn worst(&self) -> f64 {
        if self.best.len() < self.k {
            self.bound
        } else {
            self.best[self.best.len() - 1].0
        }
    }

    #[inline]
    fn offer(&mut self, d2: f64, index: u32) {
        if d2 > self.bound {
            return;
        }
        let key = (d2, index);
        if self.best.len() == self.k {
            let last = self.best[self.k - 1];
            if !less(key, last) {
                return;
            }
            self.best.pop();
        }
        let pos = self.best.partition_point(|&e| less(e, key));
        self.best.insert(pos, key);
    }
}

#[inline]
fn less(a: (f64, u32), b: (f64, u32)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}
