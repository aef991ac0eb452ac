//! C ABI for jacobi-sumrules.
//!
//! Every function returns a [`JsrStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`jsr_last_error_message`].
//! Matrices are opaque [`JsrMatrix`] handles released by [`jsr_matrix_free`];
//! strings returned through out-parameters are released by
//! [`jsr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jacobi_sumrules::mfunction::WeightFunction;
use jacobi_sumrules::quadrature::QuadratureSpec;
use jacobi_sumrules::spectral::{eigs_outside, SpectrumOptions};
use jacobi_sumrules::sumrules::{build_report, ln_integral, Rule, RuleContext};
use jacobi_sumrules::{Error, FamilyConfig, JacobiCoefficients};

/// Result codes of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JsrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidCoefficients = 3,
    NotConverged = 4,
    QuadratureFailure = 5,
    Divergence = 6,
    PoleHit = 7,
    RankTooLarge = 8,
    Domain = 9,
    Json = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Opaque handle to a Jacobi matrix.
pub struct JsrMatrix {
    inner: JacobiCoefficients,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> JsrStatus {
    match e {
        Error::NonPositiveCoefficient { .. } | Error::NonFiniteCoefficient { .. } | Error::InvalidFamily(_) => {
            JsrStatus::InvalidCoefficients
        }
        Error::Domain(_) => JsrStatus::Domain,
        Error::NotConverged { .. } => JsrStatus::NotConverged,
        Error::PoleHit { .. } => JsrStatus::PoleHit,
        Error::QuadFailure { .. } => JsrStatus::QuadratureFailure,
        Error::DivergenceDetected { .. } => JsrStatus::Divergence,
        Error::RankTooLarge { .. } => JsrStatus::RankTooLarge,
        Error::InvalidArgument(_) => JsrStatus::InvalidArgument,
        Error::Json(_) => JsrStatus::Json,
        Error::Io(_) => JsrStatus::Io,
    }
}

struct Fail(JsrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> JsrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JsrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            JsrStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(JsrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn matrix<'a>(m: *const JsrMatrix) -> Result<&'a JacobiCoefficients, Fail> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("matrix"))
}

unsafe fn string<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(JsrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, n))
    }
}

fn quad(tol: f64) -> Result<QuadratureSpec, Fail> {
    if tol > 0.0 && tol.is_finite() {
        Ok(QuadratureSpec::with_tol(tol))
    } else {
        Err(Fail(
            JsrStatus::InvalidArgument,
            format!("quadrature tolerance must be positive, got {tol}"),
        ))
    }
}

fn parse_rules(s: &str) -> Result<Vec<Rule>, Fail> {
    if s.trim() == "all" {
        return Ok(Rule::standard_set());
    }
    Ok(s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Rule>, Error>>()?)
}

fn boxed(j: JacobiCoefficients) -> *mut JsrMatrix {
    Box::into_raw(Box::new(JsrMatrix { inner: j }))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn jsr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn jsr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Eventually free matrix from a_1..a_na and b_1..b_nb; missing entries
/// are free (a = 1, b = 0).
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` readable doubles (or be null
/// when the length is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_matrix_from_lists(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    out: *mut *mut JsrMatrix,
) -> JsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let j = JacobiCoefficients::from_lists(slice(a, na, "a")?, slice(b, nb, "b")?)?;
        *out = boxed(j);
        Ok(())
    })
}

/// Matrix from a JSON family configuration (explicit lists or a generated
/// family with a cutoff).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_matrix_from_json(json: *const c_char, out: *mut *mut JsrMatrix) -> JsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let j = FamilyConfig::from_json_str(string(json, "json")?)?.build()?;
        *out = boxed(j);
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jsr_matrix_free(m: *mut JsrMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of stored coefficients past which the matrix is free.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_matrix_rank(m: *const JsrMatrix, out: *mut usize) -> JsrStatus {
    guard(|| {
        let j = matrix(m)?;
        *out.as_mut().ok_or_else(|| null("out"))? = j.rank();
        Ok(())
    })
}

/// Weighted boundary log-integral (1/2π)∫₀^π ln[sin θ / Im M(e^{iθ})] w(θ) dθ.
/// `weight` is one of "unit", "1+cos", "1-cos", "sinsq", "cosmix:p", or
/// null for unit; `value` and `error` receive the integral and its
/// quadrature error estimate (`error` may be null).
///
/// # Safety
/// `m` must be a live handle, `weight` null or NUL-terminated, `value`
/// writable and `error` null or writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_szego_integral(
    m: *const JsrMatrix,
    weight: *const c_char,
    quad_tol: f64,
    value: *mut f64,
    error: *mut f64,
) -> JsrStatus {
    guard(|| {
        let j = matrix(m)?;
        let w: WeightFunction = if weight.is_null() {
            WeightFunction::Unit
        } else {
            string(weight, "weight")?.parse()?
        };
        let (v, e) = ln_integral(j, &w, &quad(quad_tol)?)?;
        *value.as_mut().ok_or_else(|| null("value"))? = v;
        if let Some(err) = error.as_mut() {
            *err = e;
        }
        Ok(())
    })
}

/// Eigenvalues outside [−2, 2] (those above 2 in descending order, then
/// those below −2 in ascending order) with their spectral weights.
/// `count` always receives the number of eigenvalues; when it exceeds
/// `capacity` nothing is written to the arrays and
/// `JSR_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `m` must be a live handle; `energies` and `weights` must have room for
/// `capacity` doubles (or be null when `capacity` is 0); `count` writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_eigs_outside(
    m: *const JsrMatrix,
    tol: f64,
    energies: *mut f64,
    weights: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> JsrStatus {
    guard(|| {
        let j = matrix(m)?;
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Fail(
                JsrStatus::InvalidArgument,
                format!("tolerance must be positive, got {tol}"),
            ));
        }
        let opts = SpectrumOptions {
            tol,
            ..SpectrumOptions::default()
        };
        let s = eigs_outside(j, &opts)?;
        *count = s.len();
        if s.len() > capacity {
            return Err(Fail(
                JsrStatus::BufferTooSmall,
                format!("{} eigenvalues, capacity {capacity}", s.len()),
            ));
        }
        if s.is_empty() {
            return Ok(());
        }
        if energies.is_null() || weights.is_null() {
            return Err(null("output array"));
        }
        for (k, p) in s.points().enumerate() {
            *energies.add(k) = p.point.e;
            *weights.add(k) = p.weight;
        }
        Ok(())
    })
}

/// Residual lhs − rhs of one identity, e.g. "c0", "p2", "case:2",
/// "step:3", "onesided+:1", "quasi:2", "z1plus", "consistency:2".
///
/// # Safety
/// `m` must be a live handle, `rule` NUL-terminated and `residual` writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_rule_residual(
    m: *const JsrMatrix,
    rule: *const c_char,
    quad_tol: f64,
    residual: *mut f64,
) -> JsrStatus {
    guard(|| {
        let j = matrix(m)?;
        let rule: Rule = string(rule, "rule")?.parse()?;
        let ctx = RuleContext::new(j, &quad(quad_tol)?, &SpectrumOptions::default(), rule.ell())?;
        *residual.as_mut().ok_or_else(|| null("residual"))? = ctx.check(rule)?.residual;
        Ok(())
    })
}

/// Full report as a JSON string. `rules` is a comma-separated list or
/// "all"; null means "c0,p2". Release the result with [`jsr_string_free`].
///
/// # Safety
/// `m` must be a live handle, `rules` null or NUL-terminated and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_report_json(
    m: *const JsrMatrix,
    rules: *const c_char,
    quad_tol: f64,
    out: *mut *mut c_char,
) -> JsrStatus {
    guard(|| {
        let j = matrix(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rules = if rules.is_null() {
            "c0,p2"
        } else {
            string(rules, "rules")?
        };
        let report = build_report(j, &parse_rules(rules)?, &quad(quad_tol)?, &SpectrumOptions::default())?;
        let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        *out = CString::new(text)
            .map_err(|_| Fail(JsrStatus::Json, "report contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jsr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
