// SPDX-License-Identifier: Apache-2.0

//! Scan and label files.
//!
//! * Binary scans: consecutive little-endian `f32` records `(x, y, z, intensity)`.
//! * Binary labels: one little-endian `u32` per point, semantic class in the
//!   low 16 bits and instance id in the high 16 bits.
//! * Text scenes: one point per line, `x y z semantic [instance]`, `#` comments.
//!   Every data line must have the same number of columns.

use std::fs;
use std::path::Path;

use crate::cluster::PointCloud;
use crate::error::{Error, Result};

const SCAN_RECORD: u64 = 16;
const LABEL_RECORD: u64 = 4;

/// Raw scan records, bit patterns preserved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scan {
    pub points: Vec<[f32; 4]>,
}

impl Scan {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pairs the coordinates with per-point semantic ids.
    pub fn to_cloud(&self, semantic: Vec<u32>) -> Result<PointCloud> {
        PointCloud::new(self.points.iter().map(|p| [p[0], p[1], p[2]]).collect(), semantic)
    }
}

fn read_bytes(path: &Path, record: u64) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let size = bytes.len() as u64;
    if size > 0 && size < record {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            size,
            record,
        });
    }
    if size % record != 0 {
        return Err(Error::Misaligned {
            path: path.to_path_buf(),
            size,
            record,
        });
    }
    Ok(bytes)
}

pub fn read_scan(path: impl AsRef<Path>) -> Result<Scan> {
    let bytes = read_bytes(path.as_ref(), SCAN_RECORD)?;
    let points = bytes
        .chunks_exact(SCAN_RECORD as usize)
        .map(|c| {
            std::array::from_fn(|i| f32::from_le_bytes(c[4 * i..4 * i + 4].try_into().unwrap()))
        })
        .collect();
    Ok(Scan { points })
}

pub fn write_scan(path: impl AsRef<Path>, points: &[[f32; 4]]) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(points.len() * SCAN_RECORD as usize);
    for p in points {
        for v in p {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn unpack_label(value: u32) -> (u32, u32) {
    (value & 0xFFFF, value >> 16)
}

pub fn pack_label(semantic: u32, instance: u32) -> u32 {
    debug_assert!(semantic <= 0xFFFF && instance <= 0xFFFF);
    (instance << 16) | semantic
}

/// Reads `(semantic, instance)` arrays from a binary label file.
pub fn read_labels(path: impl AsRef<Path>) -> Result<(Vec<u32>, Vec<u32>)> {
    let bytes = read_bytes(path.as_ref(), LABEL_RECORD)?;
    Ok(bytes
        .chunks_exact(LABEL_RECORD as usize)
        .map(|c| unpack_label(u32::from_le_bytes(c.try_into().unwrap())))
        .unzip())
}

/// Packs labels into 32-bit words. Fails on the first id that does not fit
/// in 16 bits.
pub fn encode_labels(semantic: &[u32], instance: &[u32]) -> Result<Vec<u8>> {
    if semantic.len() != instance.len() {
        return Err(Error::contract(format!(
            "{} semantic labels but {} instance labels",
            semantic.len(),
            instance.len()
        )));
    }
    let mut bytes = Vec::with_capacity(semantic.len() * 4);
    for (i, (&s, &n)) in semantic.iter().zip(instance).enumerate() {
        if s > 0xFFFF || n > 0xFFFF {
            return Err(Error::contract(format!(
                "label at index {i} does not fit in 16 bits (semantic {s}, instance {n})"
            )));
        }
        bytes.extend_from_slice(&pack_label(s, n).to_le_bytes());
    }
    Ok(bytes)
}

pub fn write_labels(path: impl AsRef<Path>, semantic: &[u32], instance: &[u32]) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_labels(semantic, instance)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// A text scene: the cloud plus instance ids when the file has a fifth column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextScene {
    pub cloud: PointCloud,
    pub instance: Option<Vec<u32>>,
}

pub fn read_text_scene(path: impl AsRef<Path>) -> Result<TextScene> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_text_scene(&text, &path.display().to_string())
}

pub fn parse_text_scene(text: &str, origin: &str) -> Result<TextScene> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut xyz = Vec::new();
    let mut semantic = Vec::new();
    let mut instance = Vec::new();
    let mut columns: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(err(line_no, format!("expected 4 or 5 columns, found {}", fields.len())));
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(err(line_no, format!("expected {c} columns like the first point, found {}", fields.len())))
            }
            _ => {}
        }
        let mut p = [0f32; 3];
        for (k, f) in fields[..3].iter().enumerate() {
            p[k] = f
                .parse::<f32>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line_no, format!("invalid coordinate `{f}`")))?;
        }
        xyz.push(p);
        semantic.push(
            fields[3]
                .parse()
                .map_err(|_| err(line_no, format!("invalid semantic id `{}`", fields[3])))?,
        );
        if let Some(f) = fields.get(4) {
            instance.push(f.parse().map_err(|_| err(line_no, format!("invalid instance id `{f}`")))?);
        }
    }
    let has_instances = columns == Some(5);
    Ok(TextScene {
        cloud: PointCloud::new(xyz, semantic)?,
        instance: has_instances.then_some(instance),
    })
}

pub fn format_text_scene(cloud: &PointCloud, instance: Option<&[u32]>) -> Result<String> {
    use std::fmt::Write;
    if let Some(inst) = instance {
        if inst.len() != cloud.len() {
            return Err(Error::contract("instance array length differs from cloud"));
        }
    }
    let mut s = String::from("# x y z semantic");
    s += if instance.is_some() { " instance\n" } else { "\n" };
    for i in 0..cloud.len() {
        let [x, y, z] = cloud.xyz[i];
        let _ = write!(s, "{x} {y} {z} {}", cloud.semantic[i]);
        if let Some(inst) = instance {
            let _ = write!(s, " {}", inst[i]);
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn write_text_scene(path: impl AsRef<Path>, cloud: &PointCloud, instance: Option<&[u32]>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_text_scene(cloud, instance)?).map_err(|e| Error::io(path, e))
}
