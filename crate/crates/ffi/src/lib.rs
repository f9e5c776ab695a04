//! C ABI over the headland-smooth pipeline.
//!
//! Objects are opaque handles created by `hs_*_new`/`hs_run_*` and released
//! with the matching `hs_*_free`. Every fallible call returns an [`HsStatus`];
//! the message of the last failure on the calling thread is available from
//! [`hs_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use headland_smooth::config::RunConfig;
use headland_smooth::field::{load_field, FieldLayout};
use headland_smooth::geometry::{Label, Point2};
use headland_smooth::output::emit_outputs;
use headland_smooth::pipeline::{run_pipeline, PipelineOutput};
use headland_smooth::vehicle::saturated_steering_simulation;
use headland_smooth::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Invalid input: bad geometry, unknown key, non-UTF-8 text or bad value.
    Input = 2,
    /// File system failure.
    Io = 3,
    /// A smoothing or solver step failed.
    Solver = 4,
    /// The output buffer is too small; the required size was written.
    BufferTooSmall = 5,
    /// An internal panic was caught.
    Panic = 6,
}

/// Vertex roles, matching the plan labels.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsLabel {
    Headland = 0,
    Lane = 1,
    Transition = 2,
}

impl From<Label> for HsLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Headland => HsLabel::Headland,
            Label::Lane => HsLabel::Lane,
            Label::Transition => HsLabel::Transition,
        }
    }
}

/// Opaque run configuration.
pub struct HsConfig(RunConfig);

/// Opaque result of a full pipeline run.
pub struct HsRun(PipelineOutput);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HsStatus {
    match e {
        Error::Io { .. } => HsStatus::Io,
        Error::Input(_) | Error::InvalidParameter(_) | Error::InvalidPath(_) | Error::EmptyOffset(_) => HsStatus::Input,
        _ => HsStatus::Solver,
    }
}

/// Runs `f`, recording the message of any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (HsStatus, String)>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (HsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HsStatus, String) {
    (HsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (HsStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (HsStatus::Input, format!("{what} is not UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// New configuration with the default vehicle and field parameters.
/// Release with [`hs_config_free`].
#[no_mangle]
pub extern "C" fn hs_config_new() -> *mut HsConfig {
    Box::into_raw(Box::new(HsConfig(RunConfig::default())))
}

/// # Safety
/// `cfg` must be null or a handle from [`hs_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_config_free(cfg: *mut HsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets one key, e.g. `"r_dubins_m"` to `"7"`, in user units.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hs_config_set(cfg: *mut HsConfig, key: *const c_char, value: *const c_char) -> HsStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = text(key, "key")?;
        let value = text(value, "value")?;
        let mut next = cfg.0.clone();
        next.set(key, value).map_err(lib)?;
        next.validate().map_err(lib)?;
        cfg.0 = next;
        Ok(())
    })
}

/// Writes the minimum turning radius in metres to `out`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_min_turning_radius(cfg: *const HsConfig, out: *mut f64) -> HsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = cfg.0.vehicle_params().map_err(lib)?.min_turning_radius();
        Ok(())
    })
}

/// Envelope radius of a full-lock turn sampled every `sample_time_s`,
/// starting from steering `delta0_rad`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_envelope_radius(
    cfg: *const HsConfig,
    sample_time_s: f64,
    delta0_rad: f64,
    out: *mut f64,
) -> HsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = cfg.0.vehicle_params().map_err(lib)?;
        *out = saturated_steering_simulation(&p, sample_time_s, p.speed, delta0_rad)
            .map_err(lib)?
            .envelope_radius;
        Ok(())
    })
}

fn run(layout: &FieldLayout, cfg: &RunConfig, out: &mut *mut HsRun) -> Result<(), (HsStatus, String)> {
    let result = run_pipeline(layout, cfg).map_err(lib)?;
    *out = Box::into_raw(Box::new(HsRun(result)));
    Ok(())
}

/// Runs the full pipeline on a GeoJSON field or CSV contour file and stores
/// a new run handle in `*out`. Release it with [`hs_run_free`]. Per-instance
/// failures do not fail the call; see [`hs_run_failures`].
///
/// # Safety
/// `cfg` must be a live handle, `path` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_run_field_file(cfg: *const HsConfig, path: *const c_char, out: *mut *mut HsRun) -> HsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let path = text(path, "path")?;
        let (layout, _) = load_field(Path::new(path), cfg.0.operating_width_m).map_err(lib)?;
        run(&layout, &cfg.0, out)
    })
}

/// Runs the full pipeline on a contour given as `n` interleaved `x, y`
/// pairs in metres; headland and lanes are synthesised.
///
/// # Safety
/// `cfg` must be a live handle, `xy` must point to `2 * n` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_run_contour(cfg: *const HsConfig, xy: *const f64, n: usize, out: *mut *mut HsRun) -> HsStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if xy.is_null() {
            return Err(null("xy"));
        }
        let coords = std::slice::from_raw_parts(xy, 2 * n);
        let contour: Vec<Point2> = coords.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect();
        let (layout, _) =
            FieldLayout::complete(&contour, None, None, cfg.0.operating_width_m).map_err(lib)?;
        run(&layout, &cfg.0, out)
    })
}

/// # Safety
/// `run` must be null or a handle from `hs_run_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_run_free(run: *mut HsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of smoothing instances, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_run_instances(run: *const HsRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.instances.len())
}

/// Number of failed instances, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_run_failures(run: *const HsRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.report.failures())
}

/// Copies the smoothed plan. `*len` holds the capacity of `xy` (in points,
/// so `2 * len` doubles) and of `labels` on entry and the plan length on
/// return. With too little capacity nothing is copied and
/// [`HsStatus::BufferTooSmall`] is returned; passing null buffers is a size
/// query. `labels` may be null when not wanted.
///
/// # Safety
/// `run` must be a live handle and `len` writable; non-null `xy` and
/// `labels` must hold the stated capacity.
#[no_mangle]
pub unsafe extern "C" fn hs_run_plan(run: *const HsRun, xy: *mut f64, labels: *mut HsLabel, len: *mut usize) -> HsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let plan = &run.0.plan;
        let capacity = *len;
        *len = plan.len();
        if xy.is_null() || capacity < plan.len() {
            return Err((HsStatus::BufferTooSmall, format!("plan has {} points", plan.len())));
        }
        let xy = std::slice::from_raw_parts_mut(xy, 2 * plan.len());
        for (k, p) in plan.vertices().iter().enumerate() {
            xy[2 * k] = p.x;
            xy[2 * k + 1] = p.y;
        }
        if !labels.is_null() {
            let labels = std::slice::from_raw_parts_mut(labels, plan.len());
            for (dst, &l) in labels.iter_mut().zip(plan.labels()) {
                *dst = l.into();
            }
        }
        Ok(())
    })
}

/// Writes the plan, report, figure and coverage files into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hs_run_emit(run: *const HsRun, dir: *const c_char) -> HsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let dir = text(dir, "dir")?;
        emit_outputs(&run.0, Path::new(dir)).map_err(lib)?;
        Ok(())
    })
}
