// SPDX-License-Identifier: Apache-2.0

//! Semantic and panoptic evaluation: per-class IoU and mIoU, PQ/SQ/RQ with
//! IoU > 0.5 segment matching, PQ†, and range-binned reports.
//!
//! Ground-truth points carrying the configured ignore label are void: they
//! are removed before anything is counted. Thing segments are identified by
//! their non-zero instance id within a class; each stuff class forms a single
//! segment per scan. Scores are fractions in `[0, 1]`.
//!
//! Multi-scan evaluation accumulates integer counts and IoU sums in a
//! [`PanopticAccumulator`] and divides once at the end.

mod report;

use std::collections::BTreeMap;

use crate::cluster::{InstanceLabeling, PointCloud};
use crate::config::{ClassConfig, SmallSegments};
use crate::error::{Error, Result};

pub use report::{format_report_kv, format_report_table, ClassMetrics, PanopticReport};

/// Fixed-point scale of accumulated IoU sums, so that merging accumulators is
/// exact and order independent.
const IOU_SCALE: f64 = 18446744073709551616.0; // 2^64

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::contract(format!(
            "prediction has {a} points but ground truth has {b}"
        )));
    }
    Ok(())
}

/// Per-class IoU (`None` when the class is absent from both prediction and
/// ground truth) and the mean over defined classes.
#[derive(Debug, Clone, PartialEq)]
pub struct IouReport {
    pub per_class: BTreeMap<u32, Option<f64>>,
    pub miou: f64,
}

pub fn iou_per_class(pred_semantic: &[u32], gt_semantic: &[u32], config: &ClassConfig) -> Result<IouReport> {
    check_lengths(pred_semantic.len(), gt_semantic.len())?;
    let mut inter: BTreeMap<u32, u64> = BTreeMap::new();
    let mut union: BTreeMap<u32, u64> = BTreeMap::new();
    for (&p, &g) in pred_semantic.iter().zip(gt_semantic) {
        if g == config.ignore_label {
            continue;
        }
        if p == g {
            *inter.entry(g).or_default() += 1;
            *union.entry(g).or_default() += 1;
        } else {
            *union.entry(g).or_default() += 1;
            *union.entry(p).or_default() += 1;
        }
    }
    let per_class: BTreeMap<u32, Option<f64>> = config
        .classes()
        .map(|c| {
            let u = union.get(&c.id).copied().unwrap_or(0);
            let i = inter.get(&c.id).copied().unwrap_or(0);
            (c.id, (u > 0).then(|| i as f64 / u as f64))
        })
        .collect();
    let defined: Vec<f64> = per_class.values().flatten().copied().collect();
    Ok(IouReport {
        miou: mean(&defined),
        per_class,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// A matched (true positive) pair of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMatch {
    pub class_id: u32,
    pub pred_instance: u32,
    pub gt_instance: u32,
    pub intersection: u64,
    pub union: u64,
    pub iou: f64,
}

/// Segment areas and pairwise overlaps of one class, void points removed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentOverlaps {
    pub pred_areas: BTreeMap<u32, u64>,
    pub gt_areas: BTreeMap<u32, u64>,
    pub intersections: BTreeMap<(u32, u32), u64>,
}

impl SegmentOverlaps {
    pub fn iou(&self, pred: u32, gt: u32) -> f64 {
        let i = self.intersections.get(&(pred, gt)).copied().unwrap_or(0);
        let u = self.pred_areas[&pred] + self.gt_areas[&gt] - i;
        i as f64 / u as f64
    }
}

/// Collects segments of `class_id`. Thing segments are keyed by instance id
/// (instance 0 is not a segment); a stuff class is one segment keyed 0.
pub fn segment_overlaps(
    pred: &InstanceLabeling,
    gt: &InstanceLabeling,
    class_id: u32,
    config: &ClassConfig,
) -> Result<SegmentOverlaps> {
    check_lengths(pred.len(), gt.len())?;
    let thing = config.is_thing(class_id);
    let key = |sem: u32, inst: u32| -> Option<u32> {
        if sem != class_id {
            None
        } else if !thing {
            Some(0)
        } else if inst > 0 {
            Some(inst)
        } else {
            None
        }
    };
    let mut out = SegmentOverlaps::default();
    for i in 0..pred.len() {
        if gt.semantic[i] == config.ignore_label {
            continue;
        }
        let p = key(pred.semantic[i], pred.instance[i]);
        let g = key(gt.semantic[i], gt.instance[i]);
        if let Some(p) = p {
            *out.pred_areas.entry(p).or_default() += 1;
        }
        if let Some(g) = g {
            *out.gt_areas.entry(g).or_default() += 1;
        }
        if let (Some(p), Some(g)) = (p, g) {
            *out.intersections.entry((p, g)).or_default() += 1;
        }
    }
    Ok(out)
}

/// Outcome of matching one class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassMatching {
    pub tp: Vec<SegmentMatch>,
    /// Unmatched prediction segment ids.
    pub fp: Vec<u32>,
    /// Unmatched ground-truth segment ids.
    pub fn_: Vec<u32>,
}

/// Matches prediction and ground-truth segments of one class. A pair is a
/// true positive iff its IoU is strictly above 0.5, which makes the matching
/// unique.
///
/// Segments smaller than `config.min_segment_points` are handled according
/// to `config.small_segments`.
pub fn match_segments(
    pred: &InstanceLabeling,
    gt: &InstanceLabeling,
    class_id: u32,
    config: &ClassConfig,
) -> Result<ClassMatching> {
    let ov = segment_overlaps(pred, gt, class_id, config)?;
    let thing = config.is_thing(class_id);
    let min = config.min_segment_points as u64;
    let void_rule = config.small_segments == SmallSegments::Void;
    let ignored = |g: u32| void_rule && thing && ov.gt_areas[&g] < min;
    let size_filtered = |area: u64| !void_rule && area < min;

    let mut pred_used: BTreeMap<u32, bool> = ov.pred_areas.keys().map(|&k| (k, false)).collect();
    let mut gt_used: BTreeMap<u32, bool> = ov.gt_areas.keys().map(|&k| (k, false)).collect();
    let mut out = ClassMatching::default();
    for (&(p, g), &inter) in &ov.intersections {
        let union = ov.pred_areas[&p] + ov.gt_areas[&g] - inter;
        // IoU > 1/2  <=>  2 * inter > union, decided in integers.
        if 2 * inter <= union {
            continue;
        }
        let (pu, gu) = (pred_used.get_mut(&p).unwrap(), gt_used.get_mut(&g).unwrap());
        if *pu || *gu {
            return Err(Error::Invariant(format!(
                "class {class_id}: segment matched twice (pred {p}, gt {g})"
            )));
        }
        *pu = true;
        *gu = true;
        if ignored(g) {
            continue;
        }
        out.tp.push(SegmentMatch {
            class_id,
            pred_instance: p,
            gt_instance: g,
            intersection: inter,
            union,
            iou: inter as f64 / union as f64,
        });
    }
    for (&p, &used) in &pred_used {
        if used {
            continue;
        }
        let on_ignored: u64 = ov
            .intersections
            .range((p, 0)..=(p, u32::MAX))
            .filter(|(&(_, g), _)| ignored(g))
            .map(|(_, &n)| n)
            .sum();
        if 2 * on_ignored <= ov.pred_areas[&p] && !size_filtered(ov.pred_areas[&p]) {
            out.fp.push(p);
        }
    }
    out.fn_ = gt_used
        .iter()
        .filter(|(&g, &used)| !used && !ignored(g) && !size_filtered(ov.gt_areas[&g]))
        .map(|(&g, _)| g)
        .collect();
    Ok(out)
}

/// Exact per-class counters; summing two accumulators is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    /// Sum of TP IoUs in units of 2^-64.
    pub iou_sum_fixed: u128,
    /// Semantic intersection and union point counts.
    pub intersection: u64,
    pub union: u64,
}

impl ClassCounts {
    fn merge(&mut self, o: &ClassCounts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.iou_sum_fixed += o.iou_sum_fixed;
        self.intersection += o.intersection;
        self.union += o.union;
    }

    pub fn iou_sum(&self) -> f64 {
        self.iou_sum_fixed as f64 / IOU_SCALE
    }
}

/// Accumulates panoptic statistics over any number of scans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PanopticAccumulator {
    counts: BTreeMap<u32, ClassCounts>,
}

impl PanopticAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self, class_id: u32) -> ClassCounts {
        self.counts.get(&class_id).copied().unwrap_or_default()
    }

    pub fn add(&mut self, pred: &InstanceLabeling, gt: &InstanceLabeling, config: &ClassConfig) -> Result<()> {
        check_lengths(pred.len(), gt.len())?;
        let mut inter: BTreeMap<u32, u64> = BTreeMap::new();
        let mut union: BTreeMap<u32, u64> = BTreeMap::new();
        for (&p, &g) in pred.semantic.iter().zip(&gt.semantic) {
            if g == config.ignore_label {
                continue;
            }
            *union.entry(g).or_default() += 1;
            if p == g {
                *inter.entry(g).or_default() += 1;
            } else {
                *union.entry(p).or_default() += 1;
            }
        }
        for class in config.classes() {
            let m = match_segments(pred, gt, class.id, config)?;
            let c = self.counts.entry(class.id).or_default();
            c.tp += m.tp.len() as u64;
            c.fp += m.fp.len() as u64;
            c.fn_ += m.fn_.len() as u64;
            c.iou_sum_fixed += m
                .tp
                .iter()
                .map(|s| ((s.intersection as u128) << 64) / s.union as u128)
                .sum::<u128>();
            c.intersection += inter.get(&class.id).copied().unwrap_or(0);
            c.union += union.get(&class.id).copied().unwrap_or(0);
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &PanopticAccumulator) {
        for (&id, c) in &other.counts {
            self.counts.entry(id).or_default().merge(c);
        }
    }

    pub fn report(&self, config: &ClassConfig) -> PanopticReport {
        PanopticReport::from_counts(config, |id| self.counts(id))
    }
}

/// Full panoptic report for a single scan.
pub fn panoptic_quality(pred: &InstanceLabeling, gt: &InstanceLabeling, config: &ClassConfig) -> Result<PanopticReport> {
    let mut acc = PanopticAccumulator::new();
    acc.add(pred, gt, config)?;
    Ok(acc.report(config))
}

/// Half-open BEV range interval `[min, max)` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBin {
    pub min: f64,
    pub max: f64,
}

impl DistanceBin {
    pub fn contains(&self, range: f64) -> bool {
        range >= self.min && range < self.max
    }

    pub fn label(&self) -> String {
        if self.max.is_infinite() {
            format!("{}m+", self.min)
        } else {
            format!("{}-{}m", self.min, self.max)
        }
    }
}

/// `[0, 15)`, `[15, 30)` and `[30, inf)` meters.
pub fn default_bins() -> Vec<DistanceBin> {
    bins_from_edges(&[15.0, 30.0]).expect("valid edges")
}

/// Builds bins `[0, e0), [e0, e1), ..., [e_last, inf)` from inner edges.
pub fn bins_from_edges(edges: &[f64]) -> Result<Vec<DistanceBin>> {
    let mut bounds = vec![0.0];
    bounds.extend_from_slice(edges);
    bounds.push(f64::INFINITY);
    let bins: Vec<DistanceBin> = bounds
        .windows(2)
        .map(|w| DistanceBin { min: w[0], max: w[1] })
        .collect();
    validate_bins(&bins)?;
    Ok(bins)
}

/// Bins must be sorted, contiguous, and cover `[0, inf)` exactly.
pub fn validate_bins(bins: &[DistanceBin]) -> Result<()> {
    let bad = |m: &str| Err(Error::contract(format!("distance bins {bins:?}: {m}")));
    if bins.is_empty() {
        return bad("no bins");
    }
    if bins[0].min != 0.0 {
        return bad("first bin must start at 0");
    }
    if bins[bins.len() - 1].max != f64::INFINITY {
        return bad("last bin must be unbounded");
    }
    for b in bins {
        if !(b.min < b.max) {
            return bad("empty or inverted bin");
        }
    }
    for w in bins.windows(2) {
        if w[0].max != w[1].min {
            return bad("bins overlap or leave a gap");
        }
    }
    Ok(())
}

/// Per-bin accumulators for range-binned evaluation over many scans.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedAccumulator {
    pub bins: Vec<DistanceBin>,
    pub accumulators: Vec<PanopticAccumulator>,
}

impl BinnedAccumulator {
    pub fn new(bins: Vec<DistanceBin>) -> Result<Self> {
        validate_bins(&bins)?;
        let accumulators = vec![PanopticAccumulator::new(); bins.len()];
        Ok(BinnedAccumulator { bins, accumulators })
    }

    /// Assigns points to bins by BEV range and accumulates each bin on its own.
    pub fn add(
        &mut self,
        pred: &InstanceLabeling,
        gt: &InstanceLabeling,
        cloud: &PointCloud,
        config: &ClassConfig,
    ) -> Result<()> {
        check_lengths(pred.len(), gt.len())?;
        check_lengths(cloud.len(), gt.len())?;
        let ranges: Vec<f64> = (0..cloud.len()).map(|i| cloud.bev(i).norm()).collect();
        for (bin, acc) in self.bins.iter().zip(&mut self.accumulators) {
            let mask: Vec<bool> = ranges.iter().map(|&r| bin.contains(r)).collect();
            acc.add(&pred.select(&mask), &gt.select(&mask), config)?;
        }
        Ok(())
    }

    pub fn reports(&self, config: &ClassConfig) -> Vec<(DistanceBin, PanopticReport)> {
        self.bins
            .iter()
            .zip(&self.accumulators)
            .map(|(b, a)| (*b, a.report(config)))
            .collect()
    }
}

/// Panoptic reports computed independently on each range bin of one scan.
pub fn distance_binned_report(
    pred: &InstanceLabeling,
    gt: &InstanceLabeling,
    cloud: &PointCloud,
    bins: &[DistanceBin],
    config: &ClassConfig,
) -> Result<Vec<(DistanceBin, PanopticReport)>> {
    let mut acc = BinnedAccumulator::new(bins.to_vec())?;
    acc.add(pred, gt, cloud, config)?;
    Ok(acc.reports(config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ClassConfig {
        ClassConfig::default().with_thing(1, "car", 4.4, 1.8).with_stuff(9, "road")
    }

    fn lab(sem: &[u32], inst: &[u32]) -> InstanceLabeling {
        InstanceLabeling::new(sem.to_vec(), inst.to_vec()).unwrap()
    }

    #[test]
    fn iou_hand_count() {
        // pred 8 points, gt 10 points, overlap 6 -> 6 / 12.
        let mut pred = vec![9u32; 20];
        let mut gt = vec![9u32; 20];
        for p in pred.iter_mut().take(8) {
            *p = 1;
        }
        for g in gt.iter_mut().skip(2).take(10) {
            *g = 1;
        }
        let r = iou_per_class(&pred, &gt, &cfg()).unwrap();
        assert_eq!(r.per_class[&1], Some(0.5));
    }

    #[test]
    fn absent_class_excluded_from_miou() {
        let r = iou_per_class(&[9, 9], &[9, 9], &cfg()).unwrap();
        assert_eq!(r.per_class[&1], None);
        assert_eq!(r.miou, 1.0);
        assert!(iou_per_class(&[9], &[9, 9], &cfg()).is_err());
    }

    #[test]
    fn void_points_are_ignored() {
        let gt = lab(&[0, 0, 1, 1], &[0, 0, 1, 1]);
        let pred = lab(&[1, 1, 1, 1], &[5, 5, 5, 5]);
        let r = panoptic_quality(&pred, &gt, &cfg()).unwrap();
        assert_eq!(r.class(1).unwrap().tp, 1);
        assert_eq!(r.class(1).unwrap().iou, Some(1.0));
        assert_eq!(r.pq, 1.0);
    }

    #[test]
    fn split_object_one_tp_one_fp() {
        let gt = lab(&[1; 10], &[1; 10]);
        let mut inst = vec![1u32; 6];
        inst.extend([2; 4]);
        let pred = lab(&[1; 10], &inst);
        let m = match_segments(&pred, &gt, 1, &cfg()).unwrap();
        assert_eq!(m.tp.len(), 1);
        assert_eq!(m.tp[0].iou, 0.6);
        assert_eq!(m.fp, vec![2]);
        assert!(m.fn_.is_empty());
    }

    #[test]
    fn merge_at_exactly_half_is_not_a_match() {
        let mut gi = vec![1u32; 10];
        gi.extend([2; 10]);
        let gt = lab(&[1; 20], &gi);
        let pred = lab(&[1; 20], &[7; 20]);
        let m = match_segments(&pred, &gt, 1, &cfg()).unwrap();
        assert!(m.tp.is_empty());
        assert_eq!(m.fp, vec![7]);
        assert_eq!(m.fn_, vec![1, 2]);
    }

    #[test]
    fn small_segments_ignored() {
        let mut c = cfg();
        c.min_segment_points = 5;
        // gt: a 3-point object (ignored) and a 10-point object.
        let mut gi = vec![1u32; 3];
        gi.extend([2; 10]);
        let gt = lab(&[1; 13], &gi);
        let mut pi = vec![4u32; 3];
        pi.extend([8; 10]);
        let pred = lab(&[1; 13], &pi);
        let m = match_segments(&pred, &gt, 1, &c).unwrap();
        assert_eq!(m.tp.len(), 1);
        assert!(m.fp.is_empty() && m.fn_.is_empty());
    }

    #[test]
    fn size_filter_rule() {
        let mut c = cfg();
        c.min_segment_points = 5;
        c.small_segments = SmallSegments::SizeFilter;
        // Small matched pair counts; a small stray prediction and a small
        // missed object are neither FP nor FN; a large stray prediction is.
        let gt = lab(&[1; 20], &[1, 1, 1, 2, 2, 3, 3, 3, 3, 3, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let pred = lab(&[1; 20], &[4, 4, 4, 0, 0, 5, 5, 5, 5, 5, 5, 6, 6, 6, 6, 6, 6, 9, 9, 0]);
        let m = match_segments(&pred, &gt, 1, &c).unwrap();
        let tp: Vec<(u32, u32)> = m.tp.iter().map(|t| (t.pred_instance, t.gt_instance)).collect();
        assert_eq!(tp, vec![(4, 1), (5, 3)]);
        assert_eq!(m.fp, vec![6]);
        assert!(m.fn_.is_empty());
    }

    #[test]
    fn bins_validation() {
        assert!(validate_bins(&default_bins()).is_ok());
        let overlapping = [
            DistanceBin { min: 0.0, max: 20.0 },
            DistanceBin { min: 15.0, max: f64::INFINITY },
        ];
        assert!(validate_bins(&overlapping).is_err());
        assert!(bins_from_edges(&[30.0, 15.0]).is_err());
        assert!(validate_bins(&[DistanceBin { min: 1.0, max: f64::INFINITY }]).is_err());
    }

    #[test]
    fn accumulator_merge_is_exact() {
        let gt = lab(&[1, 1, 1, 9, 9], &[1, 1, 1, 0, 0]);
        let pred = lab(&[1, 1, 9, 9, 9], &[3, 3, 0, 0, 0]);
        let mut a = PanopticAccumulator::new();
        a.add(&pred, &gt, &cfg()).unwrap();
        let mut b = a.clone();
        b.merge(&a);
        let mut c = PanopticAccumulator::new();
        c.add(&pred, &gt, &cfg()).unwrap();
        c.add(&pred, &gt, &cfg()).unwrap();
        assert_eq!(b, c);
    }
}
