// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::{mean, ClassCounts};
use crate::config::ClassConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class_id: u32,
    pub name: String,
    pub is_thing: bool,
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    /// `None` when the class appears in neither prediction nor ground truth.
    pub iou: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ClassMetrics {
    /// Whether the class has at least one segment on either side.
    pub fn is_present(&self) -> bool {
        self.tp + self.fp + self.fn_ > 0
    }
}

/// Aggregate and per-class scores, as fractions in `[0, 1]`. Means skip
/// classes with no segment on either side; they are NaN when nothing is left.
#[derive(Debug, Clone, PartialEq)]
pub struct PanopticReport {
    pub classes: Vec<ClassMetrics>,
    pub pq: f64,
    pub pq_dagger: f64,
    pub sq: f64,
    pub rq: f64,
    pub miou: f64,
    pub pq_things: f64,
    pub pq_stuff: f64,
}

impl PanopticReport {
    pub(super) fn from_counts(config: &ClassConfig, counts: impl Fn(u32) -> ClassCounts) -> Self {
        let classes: Vec<ClassMetrics> = config
            .classes()
            .map(|c| {
                let n = counts(c.id);
                let sq = if n.tp > 0 { n.iou_sum() / n.tp as f64 } else { 0.0 };
                let denom = n.tp as f64 + 0.5 * n.fp as f64 + 0.5 * n.fn_ as f64;
                let rq = if denom > 0.0 { n.tp as f64 / denom } else { 0.0 };
                ClassMetrics {
                    class_id: c.id,
                    name: c.name.clone(),
                    is_thing: c.is_thing(),
                    pq: sq * rq,
                    sq,
                    rq,
                    iou: (n.union > 0).then(|| n.intersection as f64 / n.union as f64),
                    tp: n.tp,
                    fp: n.fp,
                    fn_: n.fn_,
                }
            })
            .collect();

        let present = || classes.iter().filter(|c| c.is_present());
        let collect = |f: &dyn Fn(&ClassMetrics) -> Option<f64>| -> f64 {
            mean(&present().filter_map(f).collect::<Vec<_>>())
        };
        let pq = collect(&|c| Some(c.pq));
        let sq = collect(&|c| Some(c.sq));
        let rq = collect(&|c| Some(c.rq));
        let pq_things = collect(&|c| c.is_thing.then_some(c.pq));
        let pq_stuff = collect(&|c| (!c.is_thing).then_some(c.pq));
        let pq_dagger = collect(&|c| if c.is_thing { Some(c.pq) } else { c.iou });
        let miou = mean(&classes.iter().filter_map(|c| c.iou).collect::<Vec<_>>());
        PanopticReport {
            classes,
            pq,
            pq_dagger,
            sq,
            rq,
            miou,
            pq_things,
            pq_stuff,
        }
    }

    pub fn class(&self, class_id: u32) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class_id == class_id)
    }

    pub fn total_tp(&self) -> u64 {
        self.classes.iter().map(|c| c.tp).sum()
    }
}

fn pct(v: f64) -> String {
    if v.is_nan() {
        "-".to_string()
    } else {
        format!("{:.1}", 100.0 * v)
    }
}

/// Human-readable per-class table followed by the aggregates, in percent.
pub fn format_report_table(report: &PanopticReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:<5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>7} {:>7}",
        "class", "kind", "PQ", "SQ", "RQ", "IoU", "TP", "FP", "FN"
    );
    for c in &report.classes {
        let present = c.is_present();
        let score = |v: f64| if present { pct(v) } else { "-".into() };
        let _ = writeln!(
            s,
            "{:<22} {:<5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>7} {:>7}",
            c.name,
            if c.is_thing { "thing" } else { "stuff" },
            score(c.pq),
            score(c.sq),
            score(c.rq),
            c.iou.map_or("-".into(), pct),
            c.tp,
            c.fp,
            c.fn_
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
        "PQ", "PQ†", "SQ", "RQ", "mIoU", "PQ_Th", "PQ_St"
    );
    let _ = writeln!(
        s,
        "{:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
        pct(report.pq),
        pct(report.pq_dagger),
        pct(report.sq),
        pct(report.rq),
        pct(report.miou),
        pct(report.pq_things),
        pct(report.pq_stuff)
    );
    s
}

/// Machine-readable `key=value` lines, percentages with six decimals.
/// Undefined values are written as `nan`.
pub fn format_report_kv(report: &PanopticReport, prefix: &str) -> String {
    let v = |x: f64| {
        if x.is_nan() {
            "nan".to_string()
        } else {
            format!("{:.6}", 100.0 * x)
        }
    };
    let mut s = String::new();
    for (key, value) in [
        ("pq", report.pq),
        ("pq_dagger", report.pq_dagger),
        ("sq", report.sq),
        ("rq", report.rq),
        ("miou", report.miou),
        ("pq_things", report.pq_things),
        ("pq_stuff", report.pq_stuff),
    ] {
        let _ = writeln!(s, "{prefix}{key}={}", v(value));
    }
    for c in &report.classes {
        let p = format!("{prefix}class.{}.", c.name);
        let present = c.is_present();
        let score = |x: f64| if present { v(x) } else { "nan".into() };
        let _ = writeln!(s, "{p}id={}", c.class_id);
        let _ = writeln!(s, "{p}pq={}", score(c.pq));
        let _ = writeln!(s, "{p}sq={}", score(c.sq));
        let _ = writeln!(s, "{p}rq={}", score(c.rq));
        let _ = writeln!(s, "{p}iou={}", c.iou.map_or("nan".into(), v));
        let _ = writeln!(s, "{p}tp={}", c.tp);
        let _ = writeln!(s, "{p}fp={}", c.fp);
        let _ = writeln!(s, "{p}fn={}", c.fn_);
    }
    s
}
