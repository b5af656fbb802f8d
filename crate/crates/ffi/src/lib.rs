//! C ABI over the renewal library.
//!
//! Every fallible call returns an [`OprStatus`]; on failure the message is
//! available from [`opr_last_error`] on the same thread. Objects are opaque
//! handles released with their matching `_free` function.

use num_complex::Complex64;
use oprenewal::grid::{GridObservable, YGrid};
use oprenewal::induced::{assemble_rn, invariant_density, renewal_tn, InducedOperator, RenewalAccumulator};
use oprenewal::maps::MapSpec;
use oprenewal::scalar_renewal::{renewal_sequence, ReturnDistribution};
use oprenewal::tauberian::{contour_b2, kernel_extract, KernelParams, PowerSeries};
use oprenewal::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OprStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    NoConvergence = 4,
    Numeric = 5,
    Panic = 6,
}

/// Map family selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OprFamily {
    Lsv = 0,
    Lsv0 = 1,
}

/// Induced transfer operator on `Y = [1/2, 1]` with its invariant density.
pub struct OprOperator {
    op: InducedOperator,
    h: GridObservable,
}

/// Operator renewal sums `T_n v` and `S_n v` for one observable.
pub struct OprRenewal {
    acc: RenewalAccumulator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OprStatus {
    match e {
        Error::Invalid(_) | Error::Config(_) | Error::Domain(_) => OprStatus::InvalidArgument,
        Error::NoConvergence { .. } => OprStatus::NoConvergence,
        _ => OprStatus::Numeric,
    }
}

fn guard<F: FnOnce() -> Result<(), (OprStatus, String)>>(f: F) -> OprStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OprStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            OprStatus::Panic
        }
    }
}

fn lib<T>(r: oprenewal::Result<T>) -> Result<T, (OprStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (OprStatus, String) {
    (OprStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn opr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn opr_status_message(status: OprStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        OprStatus::Ok => b"ok\0",
        OprStatus::NullPointer => b"null pointer argument\0",
        OprStatus::InvalidArgument => b"invalid argument\0",
        OprStatus::BufferTooSmall => b"output buffer too small\0",
        OprStatus::NoConvergence => b"iteration did not converge\0",
        OprStatus::Numeric => b"numerical failure\0",
        OprStatus::Panic => b"internal panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Builds the induced operator for `family` on `grid` cells with branches up to
/// `ntrunc`, and its invariant density.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_new(
    family: OprFamily,
    alpha: f64,
    grid: usize,
    ntrunc: usize,
    out: *mut *mut OprOperator,
) -> OprStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = match family {
            OprFamily::Lsv => lib(MapSpec::lsv(alpha))?,
            OprFamily::Lsv0 => MapSpec::lsv0(),
        };
        let op = lib(assemble_rn(&spec, lib(YGrid::new(grid))?, ntrunc))?;
        let h = lib(invariant_density(&op))?;
        *out = Box::into_raw(Box::new(OprOperator { op, h }));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle from [`opr_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_free(op: *mut OprOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of grid cells, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_cells(op: *const OprOperator) -> usize {
    op.as_ref().map_or(0, |o| o.op.grid().cells())
}

/// Lebesgue measure of the returns beyond the truncation.
///
/// # Safety
/// `op` must be a live operator handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_mass_deficit(op: *const OprOperator, out: *mut f64) -> OprStatus {
    guard(|| {
        let o = op.as_ref().ok_or_else(|| null("op"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = o.op.mass_deficit();
        Ok(())
    })
}

/// Copies the cell values of the invariant density (normalized to `∫_Y h dx = 1`).
///
/// # Safety
/// `op` must be a live operator handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_operator_density(op: *const OprOperator, buf: *mut f64, len: usize) -> OprStatus {
    guard(|| {
        let o = op.as_ref().ok_or_else(|| null("op"))?;
        copy_out(&o.h.values, buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (OprStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err((OprStatus::BufferTooSmall, format!("need {} values, got {len}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Computes `T_n v` for `n ≤ nmax` where `v` has one value per cell.
///
/// # Safety
/// `op` must be a live operator handle, `v` must hold `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_renewal_new(
    op: *const OprOperator,
    v: *const f64,
    len: usize,
    nmax: usize,
    out: *mut *mut OprRenewal,
) -> OprStatus {
    guard(|| {
        let o = op.as_ref().ok_or_else(|| null("op"))?;
        if v.is_null() {
            return Err(null("v"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let values = std::slice::from_raw_parts(v, len).to_vec();
        let obs = lib(GridObservable::new(o.op.grid(), values))?;
        let acc = lib(renewal_tn(&o.op, &o.h, &obs, nmax))?;
        *out = Box::into_raw(Box::new(OprRenewal { acc }));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from [`opr_renewal_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn opr_renewal_free(r: *mut OprRenewal) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Copies `T_n v` on the grid.
///
/// # Safety
/// `r` must be a live renewal handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_renewal_tn(r: *const OprRenewal, n: usize, buf: *mut f64, len: usize) -> OprStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("r"))?;
        if n > r.acc.n_max {
            return Err((OprStatus::InvalidArgument, format!("n = {n} exceeds nmax = {}", r.acc.n_max)));
        }
        copy_out(r.acc.tn(n), buf, len)
    })
}

/// Copies `S_n v = Σ_{j≤n} T_j v` on the grid.
///
/// # Safety
/// `r` must be a live renewal handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_renewal_partial_sum(r: *const OprRenewal, n: usize, buf: *mut f64, len: usize) -> OprStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("r"))?;
        if n > r.acc.n_max {
            return Err((OprStatus::InvalidArgument, format!("n = {n} exceeds nmax = {}", r.acc.n_max)));
        }
        copy_out(r.acc.partial_sum(n), buf, len)
    })
}

/// Scalar renewal sequence `u_0..u_nmax` for return probabilities `f_1..f_len`.
///
/// # Safety
/// `probs` must hold `len` doubles and `u_out` must hold `nmax + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn opr_scalar_renewal(probs: *const f64, len: usize, nmax: usize, u_out: *mut f64) -> OprStatus {
    guard(|| {
        if probs.is_null() {
            return Err(null("probs"));
        }
        let dist = lib(ReturnDistribution::from_probs(std::slice::from_raw_parts(probs, len)))?;
        let seq = renewal_sequence(&dist, nmax);
        copy_out(&seq.u, u_out, nmax + 1)
    })
}

/// `∫_ℝ (1−iσ)^{-(β+1)} e^{-iσ} dσ` with its error bar.
///
/// # Safety
/// `value` and `error_bar` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_contour_b2(beta: f64, value: *mut f64, error_bar: *mut f64) -> OprStatus {
    guard(|| {
        let v = value.as_mut().ok_or_else(|| null("value"))?;
        let e = error_bar.as_mut().ok_or_else(|| null("error_bar"))?;
        let r = lib(contour_b2(beta))?;
        *v = r.value.re;
        *e = r.error_bar;
        Ok(())
    })
}

/// Kernel estimate of `Σ_{j ≤ n−4} c_j` for the polynomial `Σ c_j z^j` with window
/// exponent `gamma`; `u_bound` (or a negative value if unknown) bounds `|c_j|`.
///
/// # Safety
/// `coeffs` must hold `len` doubles; `estimate` and `error_bar` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_kernel_extract(
    coeffs: *const f64,
    len: usize,
    n: usize,
    gamma: f64,
    u_bound: f64,
    estimate: *mut f64,
    error_bar: *mut f64,
) -> OprStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let est = estimate.as_mut().ok_or_else(|| null("estimate"))?;
        let err = error_bar.as_mut().ok_or_else(|| null("error_bar"))?;
        let series = PowerSeries::new(std::slice::from_raw_parts(coeffs, len).to_vec());
        let mut params = lib(KernelParams::with_gamma(n, gamma))?;
        if u_bound >= 0.0 {
            params = params.with_u_bound(u_bound);
        }
        let r = lib(kernel_extract(|z: Complex64| series.eval(z), &params))?;
        *est = r.estimate;
        *err = r.error_bar;
        Ok(())
    })
}

/// `Γ(x)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opr_gamma(x: f64, out: *mut f64) -> OprStatus {
    guard(|| {
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = lib(oprenewal::special_fn::gamma(x))?;
        Ok(())
    })
}
