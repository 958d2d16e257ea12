//! C ABI over `boolperc`.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `bp_*_free`. Points, laws and reports cross the boundary as JSON.
//! Every fallible call returns a [`BpStatus`]; the message of the last
//! failure on the calling thread is available from [`bp_last_error`].
//! Strings returned through `char **` outputs must be released with
//! [`bp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use boolperc::percolation::cluster_radius;
use boolperc::radii::{MomentValue, RadiusLaw};
use boolperc::sampler::{sample_boolean_model, BooleanSample};
use boolperc::spaces::{Point, Space, SpaceSpec};
use boolperc::theory::{lambda0, ultrametric_tail_bound, Lambda0};
use boolperc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Config = 5,
    Sampling = 6,
    Geometry = 7,
    Internal = 8,
}

pub struct BpSpace {
    space: Space,
}

pub struct BpLaw {
    law: RadiusLaw,
}

pub struct BpSample {
    space: Space,
    sample: BooleanSample,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(BpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) | Error::Usage(_) => BpStatus::Domain,
            Error::Config(_) | Error::Truncation(_) => BpStatus::Config,
            Error::Sampling { .. } => BpStatus::Sampling,
            Error::Geometry(_) | Error::Coverage(_) => BpStatus::Geometry,
            Error::Json(_) | Error::Format(_) => BpStatus::Parse,
            Error::Io(_) => BpStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(BpStatus::Parse, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs `f`, recording failures and converting panics to `Internal`.
fn guard(f: impl FnOnce() -> Outcome) -> BpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BpStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure(BpStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(BpStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn point(space: &Space, p: *const c_char) -> Result<Point, Failure> {
    let pt: Point = serde_json::from_str(text(p)?)?;
    space.validate(&pt)?;
    Ok(pt)
}

fn give_string(s: String, dst: &mut *mut c_char) -> Outcome {
    let c = CString::new(s).map_err(|e| Failure(BpStatus::Internal, e.to_string()))?;
    *dst = c.into_raw();
    Ok(())
}

fn give<T>(value: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `bp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn bp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a space from a JSON descriptor such as `{"kind":"dyadic"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_space_from_json(
    json: *const c_char,
    out_space: *mut *mut BpSpace,
) -> BpStatus {
    guard(|| {
        let dst = out(out_space)?;
        let spec: SpaceSpec = serde_json::from_str(text(json)?)?;
        let space = Space::from_spec(&spec)?;
        give(BpSpace { space }, dst);
        Ok(())
    })
}

/// # Safety
/// `space` must be null or a handle from `bp_space_from_json`.
#[no_mangle]
pub unsafe extern "C" fn bp_space_free(space: *mut BpSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Writes the descriptor (`kind`, `s`, `c_v`, `sigma`, ...) as JSON.
///
/// # Safety
/// Pointers must be valid; the returned string is freed with `bp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn bp_space_descriptor(
    space: *const BpSpace,
    out_json: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let s = handle(space)?;
        let dst = out(out_json)?;
        give_string(serde_json::to_string(&s.space.descriptor())?, dst)
    })
}

/// JSON of the space's reference point.
///
/// # Safety
/// Pointers must be valid; the returned string is freed with `bp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn bp_space_origin(
    space: *const BpSpace,
    out_json: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let s = handle(space)?;
        let dst = out(out_json)?;
        give_string(serde_json::to_string(&s.space.origin())?, dst)
    })
}

/// Distance between two JSON points.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_space_distance(
    space: *const BpSpace,
    p_json: *const c_char,
    q_json: *const c_char,
    out_distance: *mut f64,
) -> BpStatus {
    guard(|| {
        let s = handle(space)?;
        let dst = out(out_distance)?;
        let (p, q) = (point(&s.space, p_json)?, point(&s.space, q_json)?);
        *dst = s.space.distance(&p, &q)?;
        Ok(())
    })
}

/// Certified interval `[lower, upper]` for `μ(B(x, r))`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_space_ball_measure(
    space: *const BpSpace,
    x_json: *const c_char,
    r: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> BpStatus {
    guard(|| {
        let s = handle(space)?;
        let (lo, hi) = (out(out_lower)?, out(out_upper)?);
        let x = point(&s.space, x_json)?;
        let m = s.space.ball_measure(&x, r)?;
        *lo = m.lower;
        *hi = m.upper;
        Ok(())
    })
}

/// Builds a radius law from JSON such as `{"kind":"pareto","a":3}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_law_from_json(
    json: *const c_char,
    out_law: *mut *mut BpLaw,
) -> BpStatus {
    guard(|| {
        let dst = out(out_law)?;
        let law: RadiusLaw = serde_json::from_str(text(json)?)?;
        give(
            BpLaw {
                law: law.validated()?,
            },
            dst,
        );
        Ok(())
    })
}

/// # Safety
/// `law` must be null or a handle from `bp_law_from_json`.
#[no_mangle]
pub unsafe extern "C" fn bp_law_free(law: *mut BpLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// `∫_{(r,∞)} R^s ρ(dR)`; `INFINITY` when it diverges.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_law_tail_moment(
    law: *const BpLaw,
    s: f64,
    r: f64,
    out_value: *mut f64,
) -> BpStatus {
    guard(|| {
        let l = handle(law)?;
        let dst = out(out_value)?;
        if !(s >= 0.0 && r >= 0.0) {
            return Err(Failure(
                BpStatus::Domain,
                "s and r must be non-negative".into(),
            ));
        }
        *dst = match l.law.tail_moment(s, r) {
            MomentValue::Finite(v) => v,
            MomentValue::Infinite => f64::INFINITY,
        };
        Ok(())
    })
}

/// One realization around the origin with window radius `w` and halo
/// `halo_factor · w`, drawn from stream `(seed, 0)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_sample_new(
    space: *const BpSpace,
    law: *const BpLaw,
    lambda: f64,
    window_radius: f64,
    halo_factor: f64,
    seed: u64,
    out_sample: *mut *mut BpSample,
) -> BpStatus {
    guard(|| {
        let (s, l) = (handle(space)?, handle(law)?);
        let dst = out(out_sample)?;
        let origin = s.space.origin();
        let sample = sample_boolean_model(
            &s.space,
            lambda,
            &l.law,
            &origin,
            window_radius,
            halo_factor,
            seed,
        )?;
        give(
            BpSample {
                space: s.space.clone(),
                sample,
            },
            dst,
        );
        Ok(())
    })
}

/// Reads a sample written by `bp_sample_to_json`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_sample_from_json(
    json: *const c_char,
    out_sample: *mut *mut BpSample,
) -> BpStatus {
    guard(|| {
        let dst = out(out_sample)?;
        let sample = BooleanSample::from_json(text(json)?)?;
        let space = Space::from_spec(&sample.space)?;
        give(BpSample { space, sample }, dst);
        Ok(())
    })
}

/// # Safety
/// `sample` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_sample_free(sample: *mut BpSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_sample_germ_count(
    sample: *const BpSample,
    out_count: *mut usize,
) -> BpStatus {
    guard(|| {
        let s = handle(sample)?;
        *out(out_count)? = s.sample.germs.len();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid; the returned string is freed with `bp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn bp_sample_to_json(
    sample: *const BpSample,
    out_json: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let s = handle(sample)?;
        let dst = out(out_json)?;
        give_string(s.sample.to_json()?, dst)
    })
}

/// Cluster report of `anchor` as JSON (`m_value`, `censored`, ...).
///
/// # Safety
/// Pointers must be valid; the returned string is freed with `bp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn bp_sample_cluster_report(
    sample: *const BpSample,
    anchor_json: *const c_char,
    out_json: *mut *mut c_char,
) -> BpStatus {
    guard(|| {
        let s = handle(sample)?;
        let dst = out(out_json)?;
        let anchor = point(&s.space, anchor_json)?;
        let report = cluster_radius(&s.space, &s.sample, &anchor)?;
        give_string(serde_json::to_string(&report)?, dst)
    })
}

/// `1 - exp(-λ ∫_{(r,∞)} μ(B(x,R)) ρ(dR))` on an ultrametric space.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_ultrametric_tail(
    space: *const BpSpace,
    law: *const BpLaw,
    lambda: f64,
    r: f64,
    out_value: *mut f64,
) -> BpStatus {
    guard(|| {
        let (s, l) = (handle(space)?, handle(law)?);
        let dst = out(out_value)?;
        *dst = ultrametric_tail_bound(&s.space, lambda, &l.law, r)?.exact;
        Ok(())
    })
}

/// Subcritical threshold for net constant `c1`; writes 0 when the
/// `s`-moment diverges and no subcritical phase exists.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bp_lambda0(
    space: *const BpSpace,
    law: *const BpLaw,
    c1: f64,
    out_value: *mut f64,
) -> BpStatus {
    guard(|| {
        let (s, l) = (handle(space)?, handle(law)?);
        let dst = out(out_value)?;
        *dst = match lambda0(c1, s.space.c_v(), s.space.s(), s.space.sigma(), &l.law)? {
            Lambda0::Finite(v) => v,
            Lambda0::NoSubcritical => 0.0,
        };
        Ok(())
    })
}
