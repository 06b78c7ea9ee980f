// SPDX-License-Identifier: Apache-2.0

//! Class table and clustering parameters, plus the text format they are
//! stored in.
//!
//! The format is line oriented. `#` starts a comment. Sections are
//! `[global]`, `[class <id>]` and `[remap]`; every other non-blank line is
//! `key = value`.
//!
//! ```text
//! [global]
//! k = 32
//! margin = 0.30
//! epsilon = 0.001
//! threshold_mode = constant      # or range_proportional
//! range_coefficient = 0.01       # only read in range_proportional mode
//! ignore_label = 0
//! min_segment_points = 0
//! small_segments = void          # or size_filter
//!
//! [class 1]
//! name = car
//! kind = thing
//! length = 4.4
//! width = 1.8
//!
//! [class 9]
//! name = road
//! kind = stuff
//!
//! [remap]                        # raw label -> class id, optional
//! 10 = 1
//! ```
//!
//! When a `[remap]` section is present, raw labels missing from it map to the
//! ignore label.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 32;
pub const DEFAULT_MARGIN: f64 = 0.30;
pub const DEFAULT_EPSILON: f64 = 1e-3;

pub const SEMANTICKITTI_CONFIG: &str = include_str!("../configs/semantickitti.cfg");
pub const NUSCENES_CONFIG: &str = include_str!("../configs/nuscenes.cfg");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassKind {
    /// Countable objects with a reference footprint `length x width` (meters,
    /// `length >= width`).
    Thing { length: f64, width: f64 },
    Stuff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub id: u32,
    pub name: String,
    pub kind: ClassKind,
}

impl ClassInfo {
    pub fn is_thing(&self) -> bool {
        matches!(self.kind, ClassKind::Thing { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Edge threshold is the class threshold everywhere.
    Constant,
    /// Edge threshold is `coefficient * t_c * max(range_u, range_v)`.
    RangeProportional { coefficient: f64 },
}

/// How the metrics treat segments smaller than `min_segment_points`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmallSegments {
    /// Small ground-truth thing segments are void: never false negatives,
    /// predictions matching them are dropped, and unmatched predictions
    /// lying mostly on them are not false positives.
    #[default]
    Void,
    /// Matching ignores size; unmatched segments of any class, on either
    /// side, count as errors only when they have at least
    /// `min_segment_points` points. This is the public SemanticKITTI
    /// panoptic evaluator's convention.
    SizeFilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassConfig {
    classes: BTreeMap<u32, ClassInfo>,
    remap: Option<BTreeMap<u32, u32>>,
    pub k: usize,
    pub margin: f64,
    pub epsilon: f64,
    pub threshold_mode: ThresholdMode,
    /// Ground-truth label treated as void by the metrics.
    pub ignore_label: u32,
    /// Segments with fewer points are handled per `small_segments`.
    pub min_segment_points: usize,
    pub small_segments: SmallSegments,
}

impl Default for ClassConfig {
    fn default() -> Self {
        ClassConfig {
            classes: BTreeMap::new(),
            remap: None,
            k: DEFAULT_K,
            margin: DEFAULT_MARGIN,
            epsilon: DEFAULT_EPSILON,
            threshold_mode: ThresholdMode::Constant,
            ignore_label: 0,
            min_segment_points: 0,
            small_segments: SmallSegments::Void,
        }
    }
}

impl ClassConfig {
    /// The shipped SemanticKITTI table (train ids, raw-label remap included).
    pub fn semantickitti() -> Self {
        Self::parse(SEMANTICKITTI_CONFIG, "<builtin semantickitti.cfg>")
            .expect("builtin config parses")
    }

    pub fn nuscenes() -> Self {
        Self::parse(NUSCENES_CONFIG, "<builtin nuscenes.cfg>").expect("builtin config parses")
    }

    pub fn with_thing(mut self, id: u32, name: &str, length: f64, width: f64) -> Self {
        let (length, width) = if width > length { (width, length) } else { (length, width) };
        self.classes.insert(
            id,
            ClassInfo {
                id,
                name: name.to_string(),
                kind: ClassKind::Thing { length, width },
            },
        );
        self
    }

    pub fn with_stuff(mut self, id: u32, name: &str) -> Self {
        self.classes.insert(
            id,
            ClassInfo {
                id,
                name: name.to_string(),
                kind: ClassKind::Stuff,
            },
        );
        self
    }

    pub fn class(&self, id: u32) -> Option<&ClassInfo> {
        self.classes.get(&id)
    }

    /// All classes in ascending id order.
    pub fn classes(&self) -> impl Iterator<Item = &ClassInfo> {
        self.classes.values()
    }

    pub fn thing_ids(&self) -> Vec<u32> {
        self.classes().filter(|c| c.is_thing()).map(|c| c.id).collect()
    }

    pub fn stuff_ids(&self) -> Vec<u32> {
        self.classes().filter(|c| !c.is_thing()).map(|c| c.id).collect()
    }

    pub fn is_thing(&self, id: u32) -> bool {
        self.class(id).is_some_and(ClassInfo::is_thing)
    }

    /// Reference footprint `(length, width)` of a thing class.
    pub fn reference_box(&self, id: u32) -> Option<(f64, f64)> {
        match self.class(id)?.kind {
            ClassKind::Thing { length, width } => Some((length, width)),
            ClassKind::Stuff => None,
        }
    }

    /// Class threshold `t_c`: the smallest side of the reference box.
    pub fn class_threshold(&self, id: u32) -> Option<f64> {
        self.reference_box(id).map(|(l, w)| l.min(w))
    }

    pub fn remap(&self) -> Option<&BTreeMap<u32, u32>> {
        self.remap.as_ref()
    }

    pub fn set_remap(&mut self, remap: Option<BTreeMap<u32, u32>>) {
        self.remap = remap;
    }

    /// Maps a raw label to a class id through the remap table, if any.
    pub fn map_label(&self, raw: u32) -> u32 {
        match &self.remap {
            Some(map) => map.get(&raw).copied().unwrap_or(self.ignore_label),
            None => raw,
        }
    }

    pub fn map_labels(&self, raw: &[u32]) -> Vec<u32> {
        raw.iter().map(|&r| self.map_label(r)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::contract("k must be at least 1"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::contract(format!("margin must be >= 0, got {}", self.margin)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::contract(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if let ThresholdMode::RangeProportional { coefficient } = self.threshold_mode {
            if !(coefficient > 0.0 && coefficient.is_finite()) {
                return Err(Error::contract(format!(
                    "range coefficient must be > 0, got {coefficient}"
                )));
            }
        }
        for c in self.classes() {
            if let ClassKind::Thing { length, width } = c.kind {
                if !(width > 0.0 && length >= width && length.is_finite()) {
                    return Err(Error::contract(format!(
                        "class {} ({}): reference box {length} x {width} is invalid",
                        c.id, c.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the text format. `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        Parser::new(origin).run(text)
    }

    /// Serializes back into the text format accepted by [`ClassConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::from("[global]\n");
        s += &format!("k = {}\n", self.k);
        s += &format!("margin = {}\n", self.margin);
        s += &format!("epsilon = {}\n", self.epsilon);
        match self.threshold_mode {
            ThresholdMode::Constant => s += "threshold_mode = constant\n",
            ThresholdMode::RangeProportional { coefficient } => {
                s += "threshold_mode = range_proportional\n";
                s += &format!("range_coefficient = {coefficient}\n");
            }
        }
        s += &format!("ignore_label = {}\n", self.ignore_label);
        s += &format!("min_segment_points = {}\n", self.min_segment_points);
        if self.small_segments == SmallSegments::SizeFilter {
            s += "small_segments = size_filter\n";
        }
        for c in self.classes() {
            s += &format!("\n[class {}]\nname = {}\n", c.id, c.name);
            match c.kind {
                ClassKind::Thing { length, width } => {
                    s += &format!("kind = thing\nlength = {length}\nwidth = {width}\n")
                }
                ClassKind::Stuff => s += "kind = stuff\n",
            }
        }
        if let Some(map) = &self.remap {
            s += "\n[remap]\n";
            for (raw, id) in map {
                s += &format!("{raw} = {id}\n");
            }
        }
        s
    }
}

enum Section {
    None,
    Global,
    Class(u32),
    Remap,
}

#[derive(Default)]
struct PendingClass {
    line: usize,
    name: Option<String>,
    kind: Option<(bool, usize)>,
    length: Option<f64>,
    width: Option<f64>,
}

struct Parser<'a> {
    origin: &'a str,
    line: usize,
    config: ClassConfig,
    section: Section,
    pending: BTreeMap<u32, PendingClass>,
    coefficient: Option<(f64, usize)>,
    range_mode_line: Option<usize>,
}

impl<'a> Parser<'a> {
    fn new(origin: &'a str) -> Self {
        Parser {
            origin,
            line: 0,
            config: ClassConfig::default(),
            section: Section::None,
            pending: BTreeMap::new(),
            coefficient: None,
            range_mode_line: None,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    fn run(mut self, text: &str) -> Result<ClassConfig> {
        for (i, raw) in text.lines().enumerate() {
            self.line = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| self.err(self.line, "unterminated section header"))?;
                self.section_header(header.trim())?;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| self.err(self.line, format!("expected `key = value`, got `{line}`")))?;
            self.entry(key.trim(), value.trim())?;
        }
        self.finish()
    }

    fn section_header(&mut self, header: &str) -> Result<()> {
        let mut parts = header.split_whitespace();
        self.section = match (parts.next(), parts.next(), parts.next()) {
            (Some("global"), None, _) => Section::Global,
            (Some("remap"), None, _) => {
                self.config.remap.get_or_insert_with(BTreeMap::new);
                Section::Remap
            }
            (Some("class"), Some(id), None) => {
                let id: u32 = id
                    .parse()
                    .map_err(|_| self.err(self.line, format!("invalid class id `{id}`")))?;
                if self.pending.contains_key(&id) {
                    return Err(self.err(self.line, format!("class {id} defined twice")));
                }
                self.pending.insert(
                    id,
                    PendingClass {
                        line: self.line,
                        ..Default::default()
                    },
                );
                Section::Class(id)
            }
            _ => return Err(self.err(self.line, format!("unknown section `[{header}]`"))),
        };
        Ok(())
    }

    fn number<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| self.err(self.line, format!("invalid value `{value}` for `{key}`")))
    }

    fn entry(&mut self, key: &str, value: &str) -> Result<()> {
        let line = self.line;
        match self.section {
            Section::None => Err(self.err(line, "key outside of any section")),
            Section::Global => {
                match key {
                    "k" => self.config.k = self.number(key, value)?,
                    "margin" => self.config.margin = self.number(key, value)?,
                    "epsilon" => self.config.epsilon = self.number(key, value)?,
                    "ignore_label" => self.config.ignore_label = self.number(key, value)?,
                    "min_segment_points" => {
                        self.config.min_segment_points = self.number(key, value)?
                    }
                    "small_segments" => {
                        self.config.small_segments = match value {
                            "void" => SmallSegments::Void,
                            "size_filter" => SmallSegments::SizeFilter,
                            _ => {
                                return Err(self.err(
                                    line,
                                    format!("small_segments must be `void` or `size_filter`, got `{value}`"),
                                ))
                            }
                        }
                    }
                    "range_coefficient" => self.coefficient = Some((self.number(key, value)?, line)),
                    "threshold_mode" => match value {
                        "constant" => self.range_mode_line = None,
                        "range_proportional" => self.range_mode_line = Some(line),
                        _ => {
                            return Err(self.err(
                                line,
                                format!("threshold_mode must be `constant` or `range_proportional`, got `{value}`"),
                            ))
                        }
                    },
                    _ => return Err(self.err(line, format!("unknown global key `{key}`"))),
                }
                Ok(())
            }
            Section::Remap => {
                let raw: u32 = self.number("remap key", key)?;
                let id: u32 = self.number(key, value)?;
                self.config.remap.get_or_insert_with(BTreeMap::new).insert(raw, id);
                Ok(())
            }
            Section::Class(id) => {
                let parsed_len = if matches!(key, "length" | "width") {
                    let v: f64 = self.number(key, value)?;
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(self.err(line, format!("`{key}` must be a positive number")));
                    }
                    Some(v)
                } else {
                    None
                };
                let kind = match (key, value) {
                    ("kind", "thing") => Some((true, line)),
                    ("kind", "stuff") => Some((false, line)),
                    ("kind", _) => {
                        return Err(self.err(line, format!("kind must be `thing` or `stuff`, got `{value}`")))
                    }
                    _ => None,
                };
                let unknown = !matches!(key, "name" | "kind" | "length" | "width");
                if unknown {
                    return Err(self.err(line, format!("unknown class key `{key}`")));
                }
                let p = self.pending.get_mut(&id).expect("section registered");
                match key {
                    "name" => p.name = Some(value.to_string()),
                    "kind" => p.kind = kind,
                    "length" => p.length = parsed_len,
                    _ => p.width = parsed_len,
                }
                Ok(())
            }
        }
    }

    fn finish(mut self) -> Result<ClassConfig> {
        if let Some(line) = self.range_mode_line {
            let (coefficient, _) = self.coefficient.ok_or_else(|| {
                self.err(line, "range_proportional mode requires `range_coefficient`")
            })?;
            self.config.threshold_mode = ThresholdMode::RangeProportional { coefficient };
        }
        for (id, p) in std::mem::take(&mut self.pending) {
            let name = p.name.clone().unwrap_or_else(|| format!("class{id}"));
            let (thing, kind_line) = p
                .kind
                .ok_or_else(|| self.err(p.line, format!("class {id} has no `kind`")))?;
            if thing {
                let (length, width) = match (p.length, p.width) {
                    (Some(l), Some(w)) => (l, w),
                    _ => {
                        return Err(self.err(
                            kind_line,
                            format!("thing class {id} needs both `length` and `width`"),
                        ))
                    }
                };
                self.config = self.config.with_thing(id, &name, length, width);
            } else {
                if p.length.is_some() || p.width.is_some() {
                    return Err(self.err(kind_line, format!("stuff class {id} cannot have a box")));
                }
                self.config = self.config.with_stuff(id, &name);
            }
        }
        if self.config.class(self.config.ignore_label).is_some() {
            return Err(self.err(
                self.line,
                format!("ignore_label {} is also a class id", self.config.ignore_label),
            ));
        }
        let line = self.line;
        self.config
            .validate()
            .map_err(|e| self.err(line, e.to_string()))?;
        Ok(self.config)
    }
}
