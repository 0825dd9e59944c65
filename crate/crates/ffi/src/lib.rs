//! C ABI over the `fsilab` core.
//!
//! Every entry point returns an `FsilabStatus`. On failure a message is kept
//! per thread and can be read with `fsilab_last_error_message`. Handles are
//! opaque; free them with `fsilab_lab_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fsilab::ambient::Preset;
use fsilab::analysis::{random_states, resolvent_solve};
use fsilab::cli::{exit_code, EXIT_CONFIG, EXIT_IO};
use fsilab::config::load_config;
use fsilab::lab::{Lab, LabParams};
use fsilab::metric::xi_root;
use fsilab::{Error, Grid};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsilabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque assembled problem.
pub struct FsilabLab {
    lab: Lab,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> FsilabStatus {
    match (e, exit_code(e)) {
        (Error::InvalidParameter(_) | Error::LengthMismatch { .. } | Error::NotMeanFree(_), _) => {
            FsilabStatus::InvalidArgument
        }
        (_, EXIT_CONFIG) => FsilabStatus::Config,
        (_, EXIT_IO) => FsilabStatus::Io,
        _ => FsilabStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FsilabStatus, String)>) -> FsilabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsilabStatus::Ok,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            FsilabStatus::Panic
        }
    }
}

fn core(e: Error) -> (FsilabStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FsilabStatus, String) {
    (FsilabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn lab_ref<'a>(lab: *const FsilabLab) -> Result<&'a Lab, (FsilabStatus, String)> {
    lab.as_ref().map(|l| &l.lab).ok_or_else(|| null("lab"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (FsilabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], (FsilabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

fn check_len(lab: &Lab, n: usize) -> Result<(), (FsilabStatus, String)> {
    if n != lab.dim() {
        return Err(core(Error::LengthMismatch { expected: lab.dim(), got: n }));
    }
    Ok(())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FsilabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (FsilabStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn store(out: *mut *mut FsilabLab, lab: Lab) {
    *out = Box::into_raw(Box::new(FsilabLab { lab }));
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn fsilab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a problem on `[0, lx] x [-ly, 0]` with `nx x ny` interior nodes.
/// `preset` is one of "zero", "uniform-shear", "solenoidal", "compressive".
///
/// # Safety
/// `preset` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fsilab_lab_new(
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    preset: *const c_char,
    amplitude: f64,
    c1: f64,
    c2: f64,
    out: *mut *mut FsilabLab,
) -> FsilabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let preset: Preset = str_arg(preset, "preset")?.parse().map_err(core)?;
        let grid = Grid::new(nx, ny, lx, ly).map_err(core)?;
        let lab = Lab::new(LabParams::new(grid).with_ambient(preset, amplitude).with_constants(c1, c2)).map_err(core)?;
        store(out, lab);
        Ok(())
    })
}

/// Builds a problem from a TOML run configuration.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fsilab_lab_from_config(path: *const c_char, out: *mut *mut FsilabLab) -> FsilabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = load_config(Path::new(str_arg(path, "path")?)).map_err(core)?;
        let lab = Lab::new(cfg.lab_params()).map_err(core)?;
        store(out, lab);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `lab` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsilab_lab_free(lab: *mut FsilabLab) {
    if !lab.is_null() {
        drop(Box::from_raw(lab));
    }
}

/// Length of the packed state vector `(p, u1, u2, w1, w2)`.
///
/// # Safety
/// `lab` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fsilab_state_dim(lab: *const FsilabLab, out: *mut usize) -> FsilabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lab.dim();
        Ok(())
    })
}

/// Ambient-flow scalars: `r_U`, `xi` and `alpha`.
///
/// # Safety
/// `lab` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn fsilab_metric_constants(
    lab: *const FsilabLab,
    r_u: *mut f64,
    xi: *mut f64,
    alpha: *mut f64,
) -> FsilabStatus {
    guard(|| {
        let m = &lab_ref(lab)?.metric;
        for (p, v) in [(r_u, m.r_u), (xi, m.xi), (alpha, m.alpha)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// `y = G x`.
///
/// # Safety
/// `x` and `y` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fsilab_apply_generator(lab: *const FsilabLab, x: *const f64, y: *mut f64, n: usize) -> FsilabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        check_len(lab, n)?;
        let gx = lab.gen.apply(slice(x, n, "x")?).map_err(core)?;
        slice_mut(y, n, "y")?.copy_from_slice(&gx);
        Ok(())
    })
}

/// Weighted inner product of two states.
///
/// # Safety
/// `a` and `b` must each hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsilab_weighted_inner(
    lab: *const FsilabLab,
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
) -> FsilabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        check_len(lab, n)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lab.metric.inner(slice(a, n, "a")?, slice(b, n, "b")?);
        Ok(())
    })
}

/// Smoothed random state in the zero-mean subspace, reproducible from `seed`.
///
/// # Safety
/// `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fsilab_random_state(lab: *const FsilabLab, seed: u64, out: *mut f64, n: usize) -> FsilabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        check_len(lab, n)?;
        let s = random_states(&lab.metric, 1, seed).remove(0);
        slice_mut(out, n, "out")?.copy_from_slice(&s);
        Ok(())
    })
}

/// Solves `((a + ib) I - G) phi = rhs` for a zero-mean `rhs` and reports
/// `sqrt(a) |||phi|||` and the relative residual.
///
/// # Safety
/// `rhs` must hold `n` doubles; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn fsilab_resolvent_criterion(
    lab: *const FsilabLab,
    a: f64,
    b: f64,
    rhs: *const f64,
    n: usize,
    criterion: *mut f64,
    residual: *mut f64,
) -> FsilabStatus {
    guard(|| {
        let lab = lab_ref(lab)?;
        check_len(lab, n)?;
        let (_, rec) = resolvent_solve(&lab.gen, &lab.metric, a, b, slice(rhs, n, "rhs")?).map_err(core)?;
        if !criterion.is_null() {
            *criterion = rec.criterion_value;
        }
        if !residual.is_null() {
            *residual = rec.residual;
        }
        Ok(())
    })
}

/// The metric scalar `xi(C1, C2, r)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsilab_xi(c1: f64, c2: f64, r: f64, out: *mut f64) -> FsilabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = xi_root(c1, c2, r).map_err(core)?;
        Ok(())
    })
}
