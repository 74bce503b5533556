//! C ABI for `maxmean`.
//!
//! Every fallible function returns a [`MaxmeanStatus`] and writes its result
//! through an out-pointer. After a non-zero status,
//! [`maxmean_last_error_message`] returns a description that stays valid until
//! the next call on the same thread. Panics never cross the boundary; they are
//! reported as [`MaxmeanStatus::Internal`].
//!
//! Two opaque handles are exported. [`MaxmeanContext`] carries the numerical
//! policies of the series and branch-point routines; [`MaxmeanPoly`] is an
//! exact bivariate polynomial. Each handle must be released with its `_free`
//! function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maxmean::dist::{self, Depth, ShiftedParam};
use maxmean::genpoisson::{self, GenPoissonParams};
use maxmean::ruin::{self, RiskModel};
use maxmean::special_fn;
use maxmean::volume::{self, BivariatePoly};
use maxmean::{BranchPointPolicy, Error, SeriesPolicy};

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxmeanStatus {
    Ok = 0,
    /// An argument lies outside the function's domain.
    Domain = 1,
    /// An iteration did not converge or a result is not representable.
    Convergence = 2,
    /// A series could not be certified to the requested tolerance.
    Truncation = 3,
    /// The risk model has a non-positive safety loading.
    Solvency = 4,
    /// A simulation depth was too small.
    Depth = 5,
    /// A required pointer argument was null.
    NullPointer = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// Numerical policies shared by the series and Lambert W routines.
pub struct MaxmeanContext {
    series: SeriesPolicy,
    branch: BranchPointPolicy,
}

/// Polynomial in `x` and `t` with exact rational coefficients.
pub struct MaxmeanPoly(BivariatePoly);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(e: &Error) -> MaxmeanStatus {
    match e {
        Error::Domain(_) => MaxmeanStatus::Domain,
        Error::Convergence(_) => MaxmeanStatus::Convergence,
        Error::Truncation { .. } => MaxmeanStatus::Truncation,
        Error::Solvency { .. } => MaxmeanStatus::Solvency,
        Error::Depth { .. } => MaxmeanStatus::Depth,
    }
}

/// Runs `f`, stores its value in `out` and maps errors and panics to codes.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> maxmean::Result<T>) -> MaxmeanStatus {
    if out.is_null() {
        set_last_error("output pointer is null");
        return MaxmeanStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller guarantees it is valid for writes.
            unsafe { out.write(v) };
            set_last_error("");
            MaxmeanStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal error: panic caught at the C boundary");
            MaxmeanStatus::Internal
        }
    }
}

fn context<'a>(ctx: *const MaxmeanContext) -> maxmean::Result<&'a MaxmeanContext> {
    // SAFETY: the caller passes null or a pointer obtained from `maxmean_context_new`.
    unsafe { ctx.as_ref() }.ok_or_else(|| Error::Domain("context handle is null".into()))
}

fn depth(n: u64) -> maxmean::Result<Depth> {
    if n == 0 {
        Ok(Depth::Infinite)
    } else {
        Depth::finite(n as usize)
    }
}

/// Description of the last error on this thread, or an empty string. Owned
/// by the library.
#[no_mangle]
pub extern "C" fn maxmean_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// New context with the given series tolerance and term budget and default
/// branch-point settings. Returns null when the arguments are invalid.
#[no_mangle]
pub extern "C" fn maxmean_context_new(abs_tol: f64, max_terms: u64) -> *mut MaxmeanContext {
    match SeriesPolicy::new(abs_tol, max_terms as usize) {
        Ok(series) => Box::into_raw(Box::new(MaxmeanContext {
            series,
            branch: BranchPointPolicy::default(),
        })),
        Err(e) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Replaces the branch-point settings of `ctx`.
#[no_mangle]
pub unsafe extern "C" fn maxmean_context_set_branch_policy(
    ctx: *mut MaxmeanContext,
    switch_radius: f64,
    newton_tol: f64,
    max_iters: u32,
) -> MaxmeanStatus {
    let mut unit = ();
    guarded(&mut unit, || {
        // SAFETY: null or a live handle from `maxmean_context_new`.
        let ctx = unsafe { ctx.as_mut() }
            .ok_or_else(|| Error::Domain("context handle is null".into()))?;
        ctx.branch = BranchPointPolicy::new(switch_radius, newton_tol, max_iters as usize)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_context_free(ctx: *mut MaxmeanContext) {
    if !ctx.is_null() {
        // SAFETY: the pointer came from `Box::into_raw` in `maxmean_context_new`.
        drop(unsafe { Box::from_raw(ctx) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_lambert_w0(
    ctx: *const MaxmeanContext,
    y: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || special_fn::lambert_w0(y, &context(ctx)?.branch))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_conjugate_t(
    ctx: *const MaxmeanContext,
    x: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || special_fn::conjugate_t(x, &context(ctx)?.branch))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_cdf_inf(x: f64, out: *mut f64) -> MaxmeanStatus {
    guarded(out, || Ok(dist::cdf_inf(x)))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_cdf_inf_series(
    ctx: *const MaxmeanContext,
    x: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || dist::cdf_inf_series(x, &context(ctx)?.series))
}

/// Density of the limit law. `right_limit` (optional) is set to 1 at `x = 1`,
/// where the value is the right-hand limit.
#[no_mangle]
pub unsafe extern "C" fn maxmean_pdf_inf(
    x: f64,
    out: *mut f64,
    right_limit: *mut i32,
) -> MaxmeanStatus {
    guarded(out, || {
        let d = dist::pdf_inf(x);
        if !right_limit.is_null() {
            // SAFETY: non-null and valid for writes per the caller's contract.
            unsafe { right_limit.write(i32::from(d.right_limit)) };
        }
        Ok(d.value)
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_quantile_inf(u: f64, out: *mut f64) -> MaxmeanStatus {
    guarded(out, || dist::quantile_inf(u))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_upper_percentage_point(
    alpha: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || dist::upper_percentage_point(alpha))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_cdf_finite(x: f64, n: u64, out: *mut f64) -> MaxmeanStatus {
    guarded(out, || dist::cdf_finite(x, n as usize))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_cdf_shifted(
    x: f64,
    n: u64,
    lambda: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || {
        dist::cdf_shifted(x, n as usize, ShiftedParam::new(lambda)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_cdf_shifted_inf(
    x: f64,
    lambda: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || {
        Ok(dist::cdf_shifted_inf(x, ShiftedParam::new(lambda)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_quantile_shifted_inf(
    u: f64,
    lambda: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || {
        dist::quantile_shifted_inf(u, ShiftedParam::new(lambda)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_cdf_m2(x: f64, out: *mut f64) -> MaxmeanStatus {
    guarded(out, || Ok(dist::cdf_m2(x)))
}

/// `E Z_n^alpha`; `n = 0` selects the limit `n = ∞`.
#[no_mangle]
pub unsafe extern "C" fn maxmean_moment(n: u64, alpha: f64, out: *mut f64) -> MaxmeanStatus {
    guarded(out, || dist::moment(depth(n)?, alpha))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_ruin_probability(
    theta: f64,
    u: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || ruin::ruin_probability(&RiskModel::new(theta, u)?))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_min_capital(
    alpha: f64,
    theta: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || ruin::min_capital(alpha, theta))
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_genpoisson_pmf(
    k: u64,
    alpha: f64,
    theta: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || {
        Ok(genpoisson::pmf(k, &GenPoissonParams::new(alpha, theta)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_genpoisson_cdf(
    k: u64,
    alpha: f64,
    theta: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || {
        Ok(genpoisson::cdf(k, &GenPoissonParams::new(alpha, theta)?))
    })
}

/// Writes `count` variates into `buffer`, which must hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn maxmean_genpoisson_sample(
    alpha: f64,
    theta: f64,
    count: u64,
    seed: u64,
    buffer: *mut u64,
) -> MaxmeanStatus {
    if buffer.is_null() {
        set_last_error("output buffer is null");
        return MaxmeanStatus::NullPointer;
    }
    let mut unit = ();
    guarded(&mut unit, || {
        let draws =
            genpoisson::sample(&GenPoissonParams::new(alpha, theta)?, count as usize, seed)?;
        // SAFETY: the caller guarantees `buffer` holds `count` elements.
        unsafe { ptr::copy_nonoverlapping(draws.as_ptr(), buffer, draws.len()) };
        Ok(())
    })
}

fn into_handle(p: BivariatePoly) -> *mut MaxmeanPoly {
    Box::into_raw(Box::new(MaxmeanPoly(p)))
}

/// `V_n` expanded in closed form. Never returns null.
#[no_mangle]
pub extern "C" fn maxmean_poly_closed_form(n: u32) -> *mut MaxmeanPoly {
    into_handle(volume::closed_form(n))
}

/// `V_n` built by iterating the integral recursion. Never returns null.
#[no_mangle]
pub extern "C" fn maxmean_poly_by_recursion(n: u32) -> *mut MaxmeanPoly {
    into_handle(volume::by_recursion(n))
}

/// One recursion step applied to `p`; null if `p` is null.
#[no_mangle]
pub unsafe extern "C" fn maxmean_poly_recursion_step(p: *const MaxmeanPoly) -> *mut MaxmeanPoly {
    // SAFETY: null or a live handle.
    match unsafe { p.as_ref() } {
        Some(p) => into_handle(volume::recursion_step(&p.0)),
        None => {
            set_last_error("polynomial handle is null");
            ptr::null_mut()
        }
    }
}

/// 1 if both polynomials have identical coefficient maps, 0 otherwise or on null.
#[no_mangle]
pub unsafe extern "C" fn maxmean_poly_equal(a: *const MaxmeanPoly, b: *const MaxmeanPoly) -> i32 {
    // SAFETY: null or live handles.
    match unsafe { (a.as_ref(), b.as_ref()) } {
        (Some(a), Some(b)) => i32::from(a.0 == b.0),
        _ => 0,
    }
}

/// Number of stored (nonzero) coefficients.
#[no_mangle]
pub unsafe extern "C" fn maxmean_poly_term_count(p: *const MaxmeanPoly) -> u64 {
    // SAFETY: null or a live handle.
    unsafe { p.as_ref() }.map_or(0, |p| p.0.len() as u64)
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_poly_evaluate(
    p: *const MaxmeanPoly,
    x: f64,
    t: f64,
    out: *mut f64,
) -> MaxmeanStatus {
    guarded(out, || {
        // SAFETY: null or a live handle.
        let p = unsafe { p.as_ref() }
            .ok_or_else(|| Error::Domain("polynomial handle is null".into()))?;
        Ok(p.0.evaluate(x, t))
    })
}

#[no_mangle]
pub unsafe extern "C" fn maxmean_poly_free(p: *mut MaxmeanPoly) {
    if !p.is_null() {
        // SAFETY: the pointer came from `Box::into_raw` in `into_handle`.
        drop(unsafe { Box::from_raw(p) });
    }
}
