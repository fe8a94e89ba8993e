//! C ABI over `chainsynth`.
//!
//! Controllers are opaque heap handles. Every fallible call returns a
//! [`ChainsynthStatus`]; on failure the message is available from
//! [`chainsynth_last_error`] until the next call on the same thread.
//! Strings returned through out-pointers are owned by the caller and must be
//! released with [`chainsynth_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chainsynth::controller::ControllerSpec;
use chainsynth::error::Error;
use chainsynth::exact::{self, Rational};
use chainsynth::simulate::{self, SimulationConfig};
use chainsynth::synthesis::{self, SynthesisParams};
use chainsynth::theta;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainsynthStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Parameters violate an admissibility condition.
    ValidationFailed = 3,
    /// Root solve or integration failed.
    RuntimeFailure = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Opaque controller handle.
pub struct ChainsynthController {
    spec: ControllerSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

type Failure = (ChainsynthStatus, String);

fn set_error(message: &str) {
    let clean = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ChainsynthStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ChainsynthStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("panic inside chainsynth");
            ChainsynthStatus::Panic
        }
    }
}

fn from_error(err: Error) -> Failure {
    let status = match err {
        Error::Dimension(_)
        | Error::StateDimension { .. }
        | Error::NonFiniteState { .. }
        | Error::SpecFormat(_)
        | Error::Json(_) => ChainsynthStatus::InvalidArgument,
        Error::InvalidParameter(_) => ChainsynthStatus::ValidationFailed,
        _ => ChainsynthStatus::RuntimeFailure,
    };
    (status, err.to_string())
}

fn null(what: &str) -> Failure {
    (ChainsynthStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            ChainsynthStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn read_rational(p: *const c_char, what: &str) -> Result<Option<Rational>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    let text = read_str(p, what)?;
    exact::parse_rational(text).map(Some).ok_or_else(|| {
        (
            ChainsynthStatus::InvalidArgument,
            format!("{what} {text:?} is not a rational"),
        )
    })
}

unsafe fn handle<'a>(h: *const ChainsynthController) -> Result<&'a ControllerSpec, Failure> {
    h.as_ref()
        .map(|c| &c.spec)
        .ok_or_else(|| null("controller"))
}

unsafe fn read_state<'a>(x: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if x.is_null() {
        return Err(null("state"));
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let s = CString::new(text).map_err(|_| {
        (
            ChainsynthStatus::RuntimeFailure,
            "string contains NUL".into(),
        )
    })?;
    *out = s.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next chainsynth call on this thread.
#[no_mangle]
pub extern "C" fn chainsynth_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a controller. `d` is required; `a_n`, `c_scale` and `a0` may be
/// null to take their defaults. Numbers are `p/q` or decimal strings.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_synthesize(
    n: usize,
    d: *const c_char,
    a_n: *const c_char,
    c_scale: *const c_char,
    a0: *const c_char,
    out: *mut *mut ChainsynthController,
) -> ChainsynthStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let d = read_rational(d, "d")?.ok_or_else(|| null("d"))?;
        let mut params = SynthesisParams::new(n, d);
        params.a_n = read_rational(a_n, "a_n")?;
        params.c_scale = read_rational(c_scale, "c_scale")?;
        params.a0 = read_rational(a0, "a0")?;
        let (spec, _) = synthesis::synthesize(&params).map_err(from_error)?;
        *out = Box::into_raw(Box::new(ChainsynthController { spec }));
        Ok(())
    })
}

/// Parses a spec document as written by `chainsynth synthesize --out`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_controller_from_json(
    json: *const c_char,
    out: *mut *mut ChainsynthController,
) -> ChainsynthStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let spec = ControllerSpec::from_json_str(read_str(json, "json")?).map_err(from_error)?;
        *out = Box::into_raw(Box::new(ChainsynthController { spec }));
        Ok(())
    })
}

/// Serialises the controller; free the result with `chainsynth_string_free`.
///
/// # Safety
/// `controller` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_controller_to_json(
    controller: *const ChainsynthController,
    out: *mut *mut c_char,
) -> ChainsynthStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        write_string(out, handle(controller)?.to_json_string())
    })
}

/// # Safety
/// `controller` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_controller_free(controller: *mut ChainsynthController) {
    if !controller.is_null() {
        drop(Box::from_raw(controller));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// State dimension, or 0 for a null handle.
///
/// # Safety
/// `controller` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_controller_dimension(
    controller: *const ChainsynthController,
) -> usize {
    controller.as_ref().map_or(0, |c| c.spec.n())
}

/// `Theta(x)`.
///
/// # Safety
/// `x` must point to `len` doubles; `out_theta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_theta(
    controller: *const ChainsynthController,
    x: *const f64,
    len: usize,
    out_theta: *mut f64,
) -> ChainsynthStatus {
    guard(|| {
        let spec = handle(controller)?;
        let x = read_state(x, len)?;
        let out = out_theta.as_mut().ok_or_else(|| null("out_theta"))?;
        *out = theta::solve_theta(spec, x).map_err(from_error)?.theta;
        Ok(())
    })
}

/// Feedback `u(x)`.
///
/// # Safety
/// `x` must point to `len` doubles; `out_u` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_control(
    controller: *const ChainsynthController,
    x: *const f64,
    len: usize,
    out_u: *mut f64,
) -> ChainsynthStatus {
    guard(|| {
        let spec = handle(controller)?;
        let x = read_state(x, len)?;
        let out = out_u.as_mut().ok_or_else(|| null("out_u"))?;
        *out = theta::control(spec, x).map_err(from_error)?;
        Ok(())
    })
}

/// Simulated time to reach the origin from `x`. Non-positive `rtol` or
/// `theta_stop` select the defaults.
///
/// # Safety
/// `x` must point to `len` doubles; `out_time` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_time_of_motion(
    controller: *const ChainsynthController,
    x: *const f64,
    len: usize,
    rtol: f64,
    theta_stop: f64,
    out_time: *mut f64,
) -> ChainsynthStatus {
    guard(|| {
        let spec = handle(controller)?;
        let x = read_state(x, len)?;
        let out = out_time.as_mut().ok_or_else(|| null("out_time"))?;
        let mut cfg = SimulationConfig::default();
        if rtol > 0.0 {
            cfg.rtol = rtol;
        }
        if theta_stop > 0.0 {
            cfg.theta_stop = theta_stop;
        }
        *out = simulate::integrate(spec, x, &cfg)
            .map_err(from_error)?
            .time_of_motion;
        Ok(())
    })
}

/// Exact corner root for dimension `n` as `"p/q"`; free with
/// `chainsynth_string_free`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainsynth_xi0(n: usize, out: *mut *mut c_char) -> ChainsynthStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let xi0 = synthesis::compute_xi0(n).map_err(from_error)?;
        write_string(out, format!("{}/{}", xi0.numer(), xi0.denom()))
    })
}
