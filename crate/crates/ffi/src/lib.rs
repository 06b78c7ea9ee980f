// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `alpine` library.
//!
//! Every fallible function returns an [`AlpineStatus`]. On failure a message
//! is stored per thread and can be read with [`alpine_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.
//! Semantic labels crossing this boundary are class ids of the loaded
//! table; use [`alpine_config_map_labels`] to convert raw dataset labels.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use alpine::metrics::PanopticAccumulator;
use alpine::{ClassConfig, Error, InstanceLabeling, Point2, PointCloud};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlpineStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Internal = 5,
    Panic = 6,
}

/// Minimum-area box. `length >= width`; `yaw` in `[0, pi)` is the
/// direction of the long side.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlpineBox {
    pub center_x: f64,
    pub center_y: f64,
    pub length: f64,
    pub width: f64,
    pub yaw: f64,
}

/// Aggregate scores as fractions in `[0, 1]`; NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlpineSummary {
    pub pq: f64,
    pub pq_dagger: f64,
    pub sq: f64,
    pub rq: f64,
    pub miou: f64,
    pub pq_things: f64,
    pub pq_stuff: f64,
}

/// Class table and clustering parameters.
pub struct AlpineConfig {
    inner: ClassConfig,
}

/// Accumulates panoptic statistics over scans.
pub struct AlpineEvaluator {
    config: ClassConfig,
    acc: PanopticAccumulator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> AlpineStatus {
    match e {
        Error::Parse { .. } => AlpineStatus::Parse,
        Error::Io { .. } | Error::Misaligned { .. } | Error::Truncated { .. } => AlpineStatus::Io,
        Error::Invariant(_) => AlpineStatus::Internal,
        _ => AlpineStatus::InvalidArgument,
    }
}

struct Failure(AlpineStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AlpineStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlpineStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AlpineStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            AlpineStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for `len` writes.
unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(AlpineStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn config_ref<'a>(config: *const AlpineConfig) -> Result<&'a ClassConfig, Failure> {
    config.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

/// Message of the last failed call on this thread, or null after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn alpine_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn alpine_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in SemanticKITTI table.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_semantickitti(out: *mut *mut AlpineConfig) -> AlpineStatus {
    guard(|| put(out, AlpineConfig { inner: ClassConfig::semantickitti() }))
}

/// Built-in nuScenes table.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_nuscenes(out: *mut *mut AlpineConfig) -> AlpineStatus {
    guard(|| put(out, AlpineConfig { inner: ClassConfig::nuscenes() }))
}

/// Parses a configuration from text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_parse(text: *const c_char, out: *mut *mut AlpineConfig) -> AlpineStatus {
    guard(|| {
        let inner = ClassConfig::parse(str_arg(text, "text")?, "<text>")?;
        put(out, AlpineConfig { inner })
    })
}

/// Loads a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_from_file(path: *const c_char, out: *mut *mut AlpineConfig) -> AlpineStatus {
    guard(|| {
        let inner = ClassConfig::from_file(str_arg(path, "path")?)?;
        put(out, AlpineConfig { inner })
    })
}

/// Overrides the neighbor count, split margin and dichotomy floor.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_set_params(
    config: *mut AlpineConfig,
    k: usize,
    margin: f64,
    epsilon: f64,
) -> AlpineStatus {
    guard(|| {
        let c = &mut config.as_mut().ok_or_else(|| null("config"))?.inner;
        let mut next = c.clone();
        next.k = k;
        next.margin = margin;
        next.epsilon = epsilon;
        next.validate()?;
        *c = next;
        Ok(())
    })
}

/// Maps `n` raw dataset labels to class ids through the table's remap.
///
/// # Safety
/// `raw` and `out` must be valid for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_map_labels(
    config: *const AlpineConfig,
    raw: *const u32,
    n: usize,
    out: *mut u32,
) -> AlpineStatus {
    guard(|| {
        let c = config_ref(config)?;
        let raw = slice(raw, n, "raw")?;
        let out = slice_mut(out, n, "out")?;
        for (o, &r) in out.iter_mut().zip(raw) {
            *o = c.map_label(r);
        }
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn alpine_config_free(config: *mut AlpineConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Clusters one scan. `xyz` holds `3 * n` floats, `semantic` and
/// `instance_out` hold `n` labels. Stuff points get instance 0.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn alpine_cluster_scan(
    config: *const AlpineConfig,
    xyz: *const f32,
    semantic: *const u32,
    n: usize,
    enable_split: c_int,
    instance_out: *mut u32,
) -> AlpineStatus {
    guard(|| {
        let c = config_ref(config)?;
        let len = n
            .checked_mul(3)
            .ok_or_else(|| Failure(AlpineStatus::InvalidArgument, format!("point count {n} overflows")))?;
        let coords = slice(xyz, len, "xyz")?;
        let semantic = slice(semantic, n, "semantic")?;
        let out = slice_mut(instance_out, n, "instance_out")?;
        let cloud = PointCloud::new(
            coords.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect(),
            semantic.to_vec(),
        )?;
        let labels = alpine::cluster_scan(&cloud, c, enable_split != 0)?;
        out.copy_from_slice(&labels.instance);
        Ok(())
    })
}

/// Minimum-area oriented box of `n` points given as `2 * n` doubles.
///
/// # Safety
/// `xy` must be valid for `2 * n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_fit_min_area_box(xy: *const f64, n: usize, out: *mut AlpineBox) -> AlpineStatus {
    guard(|| {
        let len = n
            .checked_mul(2)
            .ok_or_else(|| Failure(AlpineStatus::InvalidArgument, format!("point count {n} overflows")))?;
        let coords = slice(xy, len, "xy")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let points: Vec<Point2> = coords.chunks_exact(2).map(|p| Point2::new(p[0], p[1])).collect();
        let b = alpine::fit_min_area_box(&points)?;
        *out = AlpineBox {
            center_x: b.center.x,
            center_y: b.center.y,
            length: b.length(),
            width: b.width(),
            yaw: b.yaw,
        };
        Ok(())
    })
}

/// New evaluator holding a copy of `config`.
///
/// # Safety
/// `config` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_evaluator_new(
    config: *const AlpineConfig,
    out: *mut *mut AlpineEvaluator,
) -> AlpineStatus {
    guard(|| {
        let config = config_ref(config)?.clone();
        put(out, AlpineEvaluator { config, acc: PanopticAccumulator::new() })
    })
}

/// Adds one scan of `n` points.
///
/// # Safety
/// `evaluator` must be a live handle and the arrays valid for `n` reads.
#[no_mangle]
pub unsafe extern "C" fn alpine_evaluator_add(
    evaluator: *mut AlpineEvaluator,
    pred_semantic: *const u32,
    pred_instance: *const u32,
    gt_semantic: *const u32,
    gt_instance: *const u32,
    n: usize,
) -> AlpineStatus {
    guard(|| {
        let ev = evaluator.as_mut().ok_or_else(|| null("evaluator"))?;
        let pred = InstanceLabeling::new(
            slice(pred_semantic, n, "pred_semantic")?.to_vec(),
            slice(pred_instance, n, "pred_instance")?.to_vec(),
        )?;
        let gt = InstanceLabeling::new(
            slice(gt_semantic, n, "gt_semantic")?.to_vec(),
            slice(gt_instance, n, "gt_instance")?.to_vec(),
        )?;
        ev.acc.add(&pred, &gt, &ev.config)?;
        Ok(())
    })
}

/// Aggregate scores over every scan added so far.
///
/// # Safety
/// `evaluator` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn alpine_evaluator_summary(
    evaluator: *const AlpineEvaluator,
    out: *mut AlpineSummary,
) -> AlpineStatus {
    guard(|| {
        let ev = evaluator.as_ref().ok_or_else(|| null("evaluator"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = ev.acc.report(&ev.config);
        *out = AlpineSummary {
            pq: r.pq,
            pq_dagger: r.pq_dagger,
            sq: r.sq,
            rq: r.rq,
            miou: r.miou,
            pq_things: r.pq_things,
            pq_stuff: r.pq_stuff,
        };
        Ok(())
    })
}

/// # Safety
/// `evaluator` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn alpine_evaluator_free(evaluator: *mut AlpineEvaluator) {
    if !evaluator.is_null() {
        drop(Box::from_raw(evaluator));
    }
}
