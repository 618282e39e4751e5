//! C interface to `locbound`.
//!
//! Objects are opaque handles created by `lb_*_new` functions and released
//! with the matching `lb_*_free`. Every fallible call returns an
//! [`LbStatus`]; on failure the message is available from
//! [`lb_last_error_message`] on the same thread. Outputs are written only on
//! success. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locbound::bounds;
use locbound::crb;
use locbound::geometry::{polar_of, sample_ppp, SensorField, SourceLocation};
use locbound::model::{effective_bandwidth, snr_from_db, ChannelParams, KernelMode, Pulse};
use locbound::numerics::QuadratureSpec;
use locbound::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Convergence = 4,
    NotPositiveDefinite = 5,
    DegenerateGeometry = 6,
    SingularGeometry = 7,
    InsufficientData = 8,
    ResourceLimit = 9,
    Parse = 10,
    CandidateNotFound = 11,
    Panic = 12,
}

impl From<&Error> for LbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => Self::Domain,
            Error::Convergence { .. } => Self::Convergence,
            Error::NotPositiveDefinite { .. } => Self::NotPositiveDefinite,
            Error::DegenerateGeometry { .. } => Self::DegenerateGeometry,
            Error::SingularGeometry { .. } => Self::SingularGeometry,
            Error::InsufficientData(_) => Self::InsufficientData,
            Error::ResourceLimit(_) => Self::ResourceLimit,
            Error::CandidateNotFound { .. } => Self::CandidateNotFound,
            Error::InvalidParameter(_) => Self::InvalidParameter,
            Error::Parse(_) => Self::Parse,
        }
    }
}

/// Which terms of the information kernel are kept.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbKernel {
    Full = 0,
    RssOnly = 1,
    ToaOnly = 2,
}

impl From<LbKernel> for KernelMode {
    fn from(k: LbKernel) -> Self {
        match k {
            LbKernel::Full => Self::Full,
            LbKernel::RssOnly => Self::RssOnly,
            LbKernel::ToaOnly => Self::ToaOnly,
        }
    }
}

/// Channel parameters (opaque).
pub struct LbChannel(ChannelParams);

/// Finite sensor field (opaque).
pub struct LbField(SensorField);

/// Averaged per-field bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LbAvgCrb {
    pub mean: f64,
    pub std_err: f64,
    pub median: f64,
    pub trials: usize,
    pub excluded: usize,
    /// Nonzero when more than 1% of the trials were excluded.
    pub exclusion_warning: i32,
    /// Nonzero when one trial dominates the mean.
    pub heavy_tail: i32,
}

/// Density-level bound with its asymptotes. Absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LbBounds {
    pub crb_lb: f64,
    pub crb_lb_w: f64,
    pub crb_lb_n: f64,
    pub sandwich_lo: f64,
    pub sandwich_vacuous: i32,
    pub narrowband_gap: f64,
    pub quadrature_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (LbStatus, String)>) -> LbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LbStatus::Panic
        }
    }
}

fn lift<T>(r: locbound::Result<T>) -> Result<T, (LbStatus, String)> {
    r.map_err(|e| (LbStatus::from(&e), e.to_string()))
}

fn null(name: &str) -> (LbStatus, String) {
    (LbStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (LbStatus, String)> {
    // SAFETY: caller passes either null or a pointer it obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(name))
}

unsafe fn write_out<T>(p: *mut T, v: T) {
    // SAFETY: checked non-null by the caller before the computation.
    unsafe { p.write(v) }
}

fn quadrature(rel_tol: f64) -> Result<QuadratureSpec, (LbStatus, String)> {
    let d = QuadratureSpec::default();
    if rel_tol <= 0.0 {
        return Ok(d);
    }
    lift(QuadratureSpec::new(rel_tol, d.abs_tol, d.max_subdivisions))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the NUL; 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                // SAFETY: len > 0 writable bytes.
                unsafe { *buf = 0 };
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: n + 1 <= len bytes are writable; the source is a live CString.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Creates a channel from the path-loss exponent, propagation speed,
/// effective bandwidth (s⁻²) and linear SNR at unit distance.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn lb_channel_new(gamma: f64, c: f64, we: f64, rho: f64, out: *mut *mut LbChannel) -> LbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ch = lift(ChannelParams::new(gamma, c, we, rho))?;
        // SAFETY: non-null checked above.
        unsafe { write_out(out, Box::into_raw(Box::new(LbChannel(ch)))) };
        Ok(())
    })
}

/// Creates a channel for the raised-cosine pulse of duration `t_dur`
/// seconds at an SNR of `snr_db` at unit distance.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn lb_channel_for_pulse(
    gamma: f64,
    c: f64,
    t_dur: f64,
    snr_db: f64,
    out: *mut *mut LbChannel,
) -> LbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pulse = lift(Pulse::for_snr(t_dur, snr_from_db(snr_db)))?;
        let ch = lift(ChannelParams::from_pulse(gamma, c, &pulse))?;
        debug_assert_eq!(ch.we, effective_bandwidth(&pulse));
        // SAFETY: non-null checked above.
        unsafe { write_out(out, Box::into_raw(Box::new(LbChannel(ch)))) };
        Ok(())
    })
}

/// Reads back the channel parameters. Any output pointer may be null.
///
/// # Safety
/// `ch` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_channel_params(
    ch: *const LbChannel,
    gamma: *mut f64,
    c: *mut f64,
    we: *mut f64,
    rho: *mut f64,
) -> LbStatus {
    guard(|| {
        // SAFETY: handle validity is the caller's contract.
        let p = unsafe { deref(ch, "ch") }?.0;
        for (dst, v) in [(gamma, p.gamma), (c, p.c), (we, p.we), (rho, p.rho)] {
            if !dst.is_null() {
                // SAFETY: non-null and writable by contract.
                unsafe { write_out(dst, v) };
            }
        }
        Ok(())
    })
}

/// Releases a channel; null is ignored.
///
/// # Safety
/// `ch` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lb_channel_free(ch: *mut LbChannel) {
    if !ch.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(ch) });
    }
}

/// Samples a Poisson field of density `lambda` on the disc of `radius`
/// around (`cx`, `cy`).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn lb_field_sample(
    lambda: f64,
    radius: f64,
    cx: f64,
    cy: f64,
    seed: u64,
    out: *mut *mut LbField,
) -> LbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let center = lift(SourceLocation::new(cx, cy))?;
        let f = lift(sample_ppp(lambda, radius, center, seed))?;
        // SAFETY: non-null checked above.
        unsafe { write_out(out, Box::into_raw(Box::new(LbField(f)))) };
        Ok(())
    })
}

/// Builds a field from `n` explicit points.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable values (or be null when `n == 0`);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_field_from_points(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    lambda: f64,
    radius: f64,
    cx: f64,
    cy: f64,
    out: *mut *mut LbField,
) -> LbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n > 0 && (xs.is_null() || ys.is_null()) {
            return Err(null("xs/ys"));
        }
        let points = if n == 0 {
            Vec::new()
        } else {
            // SAFETY: n readable values by contract.
            let (x, y) = unsafe { (std::slice::from_raw_parts(xs, n), std::slice::from_raw_parts(ys, n)) };
            x.iter().copied().zip(y.iter().copied()).collect()
        };
        let center = lift(SourceLocation::new(cx, cy))?;
        let f = lift(SensorField::from_points(points, lambda, radius, center, 0))?;
        // SAFETY: non-null checked above.
        unsafe { write_out(out, Box::into_raw(Box::new(LbField(f)))) };
        Ok(())
    })
}

/// Number of sensors in the field, 0 for null.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lb_field_len(field: *const LbField) -> usize {
    // SAFETY: null or live by contract.
    unsafe { field.as_ref() }.map_or(0, |f| f.0.len())
}

/// Coordinates of sensor `index`.
///
/// # Safety
/// `field` must be a live handle; `x` and `y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_field_point(field: *const LbField, index: usize, x: *mut f64, y: *mut f64) -> LbStatus {
    guard(|| {
        // SAFETY: handle validity is the caller's contract.
        let f = unsafe { deref(field, "field") }?;
        if x.is_null() || y.is_null() {
            return Err(null("x/y"));
        }
        let &(px, py) = f.0.points.get(index).ok_or_else(|| {
            (
                LbStatus::InvalidParameter,
                format!("index {index} out of range for {} sensors", f.0.len()),
            )
        })?;
        // SAFETY: non-null checked above.
        unsafe {
            write_out(x, px);
            write_out(y, py);
        }
        Ok(())
    })
}

/// Releases a field; null is ignored.
///
/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lb_field_free(field: *mut LbField) {
    if !field.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Bound on the mean squared error (m²) for a source at (`sx`, `sy`)
/// observed by `field`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_crb_realization(
    field: *const LbField,
    ch: *const LbChannel,
    sx: f64,
    sy: f64,
    out: *mut f64,
) -> LbStatus {
    guard(|| {
        // SAFETY: handle validity is the caller's contract.
        let (f, c) = unsafe { (deref(field, "field")?, deref(ch, "ch")?) };
        if out.is_null() {
            return Err(null("out"));
        }
        let src = lift(SourceLocation::new(sx, sy))?;
        let v = lift(polar_of(&f.0, &src).and_then(|p| crb::crb_realization(&p, &c.0)))?;
        // SAFETY: non-null checked above.
        unsafe { write_out(out, v) };
        Ok(())
    })
}

/// Per-field bound averaged over `trials` Poisson fields.
///
/// # Safety
/// `ch` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_avg_crb(
    lambda: f64,
    ch: *const LbChannel,
    trials: usize,
    sensors_per_trial: usize,
    master_seed: u64,
    out: *mut LbAvgCrb,
) -> LbStatus {
    guard(|| {
        // SAFETY: handle validity is the caller's contract.
        let c = unsafe { deref(ch, "ch") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = lift(crb::avg_crb(lambda, &c.0, trials, sensors_per_trial, master_seed))?;
        let v = LbAvgCrb {
            mean: a.mean,
            std_err: a.std_err,
            median: a.median,
            trials: a.trials,
            excluded: a.excluded,
            exclusion_warning: a.exclusion_warning.into(),
            heavy_tail: a.heavy_tail.into(),
        };
        // SAFETY: non-null checked above.
        unsafe { write_out(out, v) };
        Ok(())
    })
}

/// Density-level bound for `kernel`. `rel_tol <= 0` selects the default
/// tolerance. `abs_error` may be null.
///
/// # Safety
/// `ch` must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_crb_lb(
    lambda: f64,
    ch: *const LbChannel,
    kernel: LbKernel,
    rel_tol: f64,
    value: *mut f64,
    abs_error: *mut f64,
) -> LbStatus {
    guard(|| {
        // SAFETY: handle validity is the caller's contract.
        let c = unsafe { deref(ch, "ch") }?;
        if value.is_null() {
            return Err(null("value"));
        }
        let b = lift(bounds::crb_lb(lambda, &c.0, kernel.into(), &quadrature(rel_tol)?))?;
        // SAFETY: value non-null checked above; abs_error optional.
        unsafe {
            write_out(value, b.value);
            if !abs_error.is_null() {
                write_out(abs_error, b.abs_error);
            }
        }
        Ok(())
    })
}

/// The bound with its wideband and narrowband limits and sandwich
/// diagnostics. `rel_tol <= 0` selects the default tolerance.
///
/// # Safety
/// `ch` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lb_bounds(lambda: f64, ch: *const LbChannel, rel_tol: f64, out: *mut LbBounds) -> LbStatus {
    guard(|| {
        // SAFETY: handle validity is the caller's contract.
        let c = unsafe { deref(ch, "ch") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lift(bounds::bound_result(lambda, &c.0, &quadrature(rel_tol)?))?;
        let v = LbBounds {
            crb_lb: r.crb_lb,
            crb_lb_w: r.crb_lb_w.unwrap_or(f64::NAN),
            crb_lb_n: r.crb_lb_n,
            sandwich_lo: r.sandwich_lo.unwrap_or(f64::NAN),
            sandwich_vacuous: r.sandwich_vacuous.into(),
            narrowband_gap: r.narrowband_gap,
            quadrature_error: r.quadrature_error,
        };
        // SAFETY: non-null checked above.
        unsafe { write_out(out, v) };
        Ok(())
    })
}
