// SPDX-License-Identifier: Apache-2.0

//! Box splitting: recursively re-cluster components that do not fit the
//! margin-enlarged reference box of their class, by binary search on the
//! clustering threshold.

use crate::config::ClassConfig;
use crate::error::{Error, Result};
use crate::geometry::{fit_min_area_box, KdTree2, Point2};
use crate::graph::KnnGraph;

/// Recursion depth after which the current subset is returned as is.
pub const MAX_SPLIT_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    /// Reference footprint `(length, width)` in meters.
    pub reference_box: (f64, f64),
    /// Proportional enlargement applied to both sides of the reference box.
    pub margin: f64,
    /// Smallest threshold step of the dichotomy, in meters.
    pub epsilon: f64,
    pub k: usize,
}

impl SplitParams {
    pub fn for_class(config: &ClassConfig, class_id: u32) -> Option<Self> {
        Some(SplitParams {
            reference_box: config.reference_box(class_id)?,
            margin: config.margin,
            epsilon: config.epsilon,
            k: config.k,
        })
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.reference_box;
        if !(a >= 0.0 && b >= 0.0 && self.margin >= 0.0 && self.epsilon > 0.0 && self.k >= 1) {
            return Err(Error::contract(format!("invalid split parameters {self:?}")));
        }
        Ok(())
    }

    /// Sides of the enlarged reference box, longest first.
    pub fn limits(&self) -> (f64, f64) {
        let (a, b) = self.reference_box;
        let (long, short) = if a >= b { (a, b) } else { (b, a) };
        (long * (1.0 + self.margin), short * (1.0 + self.margin))
    }
}

/// Whether the minimum-area box of `points` fits in the enlarged reference
/// box, comparing long side to long side and short side to short side.
pub fn fits_in_reference(points: &[Point2], params: &SplitParams) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::contract("fit test on an empty cluster"));
    }
    let b = fit_min_area_box(points)?;
    let (long, short) = params.limits();
    Ok(b.length() <= long && b.width() <= short)
}

/// One output subset of [`split_cluster_pieces`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPiece {
    /// Indices into the input point slice, ascending.
    pub indices: Vec<usize>,
    /// False when the subset still exceeds the reference box because the
    /// dichotomy hit its precision floor or the depth limit.
    pub fits: bool,
}

/// Splits one connected component into subsets that fit the reference box.
///
/// `threshold` is the threshold the component was produced at. Returns a
/// partition of `0..points.len()`.
pub fn split_cluster(points: &[Point2], params: &SplitParams, threshold: f64) -> Result<Vec<Vec<usize>>> {
    Ok(split_cluster_pieces(points, params, threshold)?
        .into_iter()
        .map(|p| p.indices)
        .collect())
}

/// [`split_cluster`] with a per-subset flag telling whether it fits.
pub fn split_cluster_pieces(points: &[Point2], params: &SplitParams, threshold: f64) -> Result<Vec<SplitPiece>> {
    params.validate()?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::contract(format!("split threshold must be > 0, got {threshold}")));
    }
    let mut out = Vec::new();
    if points.is_empty() {
        return Ok(out);
    }
    let subset: Vec<usize> = (0..points.len()).collect();
    split_recursive(points, subset, params, threshold, 0, &mut out)?;
    Ok(out)
}

fn split_recursive(
    all: &[Point2],
    subset: Vec<usize>,
    params: &SplitParams,
    threshold: f64,
    depth: usize,
    out: &mut Vec<SplitPiece>,
) -> Result<()> {
    let points: Vec<Point2> = subset.iter().map(|&i| all[i]).collect();
    if fits_in_reference(&points, params)? {
        out.push(SplitPiece { indices: subset, fits: true });
        return Ok(());
    }
    if depth >= MAX_SPLIT_DEPTH || subset.len() < 2 {
        out.push(SplitPiece { indices: subset, fits: false });
        return Ok(());
    }

    let tree = KdTree2::build(&points)?;
    let graph = KnnGraph::build(&tree, params.k)?;
    let mut t = threshold / 2.0;
    let mut dt = t;
    loop {
        dt /= 2.0;
        let components = graph.components_at(t);
        let count = components.component_count;
        if count == 2 || dt < params.epsilon {
            if count == 1 {
                out.push(SplitPiece { indices: subset, fits: false });
                return Ok(());
            }
            for group in components.groups() {
                let child = group.into_iter().map(|j| subset[j]).collect();
                split_recursive(all, child, params, t, depth + 1, out)?;
            }
            return Ok(());
        }
        if count == 1 {
            t -= dt;
        } else {
            t += dt;
        }
    }
}
