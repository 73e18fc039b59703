//! C interface to the eigenform, L-function and zero-counting engines.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`RlStatus`]; on failure the message is
//! kept per thread and read back with [`rl_last_error`]. Panics never cross
//! the boundary: they are caught and reported as [`RlStatus::Panic`].

use rankin_lab::analytic::{distinguish, rn_main, rn_sum, DistinguishConfig};
use rankin_lab::eigenforms::{eigenforms, Eigenform};
use rankin_lab::lseries::{TensorCoeffSource, VonMangoldtSource};
use rankin_lab::zerolab::{build_instance, count_zeros_box, CountOptions, InstanceConfig, LFunctionInstance};
use rankin_lab::Error;
use rug::Complex;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientPrecision = 3,
    Range = 4,
    Domain = 5,
    DeligneViolation = 6,
    RepeatedRoots = 7,
    Unsupported = 8,
    Unvalidated = 9,
    MemoryBudget = 10,
    Numerical = 11,
    Cache = 12,
    Io = 13,
    Panic = 14,
}

/// L-function selector for [`rl_instance_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlSource {
    Zeta = 0,
    Standard = 1,
    Rankin = 2,
    Sym2 = 3,
}

/// The Hecke eigenbasis of one weight.
pub struct RlEigenforms {
    weight: u32,
    forms: Vec<Arc<Eigenform>>,
}

/// A completed L-function whose functional equation has been checked.
pub struct RlInstance {
    inner: LFunctionInstance,
}

/// Outcome of [`rl_count_zeros`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RlZeroCount {
    pub count: u64,
    /// Winding number before rounding.
    pub raw: f64,
    pub contour_residual: f64,
    /// 1 when the count passed the integrality and stability checks.
    pub accepted: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::InvalidArgument(_) => RlStatus::InvalidArgument,
        Error::InsufficientPrecision { .. } => RlStatus::InsufficientPrecision,
        Error::Range { .. } => RlStatus::Range,
        Error::Domain(_) => RlStatus::Domain,
        Error::DeligneViolation { .. } => RlStatus::DeligneViolation,
        Error::RepeatedRoots(_) => RlStatus::RepeatedRoots,
        Error::Unsupported(_) => RlStatus::Unsupported,
        Error::Unvalidated(_) => RlStatus::Unvalidated,
        Error::MemoryBudget { .. } => RlStatus::MemoryBudget,
        Error::Numerical(_) => RlStatus::Numerical,
        Error::Cache(_) => RlStatus::Cache,
        Error::Io(_) => RlStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RlStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

fn form(h: &RlEigenforms, i: usize) -> Result<&Arc<Eigenform>, Fail> {
    h.forms
        .get(i)
        .ok_or_else(|| Fail::Lib(Error::Range { requested: i as u64, bound: h.forms.len() as u64 }))
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}

/// Computes the eigenbasis of weight `k` with `n` coefficients at `bits` of precision.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn rl_eigenforms_new(k: u32, n: usize, bits: u32, out_handle: *mut *mut RlEigenforms) -> RlStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = std::ptr::null_mut();
        let forms = eigenforms(k, n, bits)?.into_iter().map(Arc::new).collect();
        *slot = Box::into_raw(Box::new(RlEigenforms { weight: k, forms }));
        Ok(())
    })
}

/// Releases a handle from [`rl_eigenforms_new`]. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_eigenforms_free(h: *mut RlEigenforms) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of eigenforms (the dimension of the cusp space); 0 for null.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_eigenforms_count(h: *const RlEigenforms) -> usize {
    h.as_ref().map_or(0, |h| h.forms.len())
}

/// Weight of the basis; 0 for null.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_eigenforms_weight(h: *const RlEigenforms) -> u32 {
    h.as_ref().map_or(0, |h| h.weight)
}

/// Normalized Hecke eigenvalue λ(n) of form `index`, rounded to double.
///
/// # Safety
/// `h` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_eigenforms_lambda(h: *const RlEigenforms, index: usize, n: u64, value: *mut f64) -> RlStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let v = out(value, "value")?;
        *v = form(h, index)?.lambda(n)?.to_f64();
        Ok(())
    })
}

/// Residue term 4(x − 2 + 1/x).
#[no_mangle]
pub extern "C" fn rl_rn_main(x: f64) -> f64 {
    rn_main(x)
}

/// Σ_{n<x²} Λ_{f⊗g}(n) n^{−1/2} log(x²/n) for forms `f` and `g`.
///
/// # Safety
/// `h` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_rn_sum(h: *const RlEigenforms, f: usize, g: usize, x: f64, value: *mut f64) -> RlStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let v = out(value, "value")?;
        let src = TensorCoeffSource::rankin(form(h, f)?.clone(), form(h, g)?.clone());
        *v = rn_sum(&VonMangoldtSource::new(Arc::new(src)), x)?;
        Ok(())
    })
}

/// Smallest prime p with λ_f(p) ≠ λ_g(p), searched below x²; 0 if none is certified.
///
/// # Safety
/// `h` must be a live handle and `prime` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_distinguish(h: *const RlEigenforms, f: usize, g: usize, x: f64, prime: *mut u64) -> RlStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let p = out(prime, "prime")?;
        let cfg = DistinguishConfig::new(h.weight)?.with_x(x)?;
        *p = distinguish(form(h, f)?, form(h, g)?, &cfg)?.p_star.unwrap_or(0);
        Ok(())
    })
}

/// Builds and validates a completed L-function usable up to height `t_max`.
///
/// `forms` may be null only for [`RlSource::Zeta`]; `g` is read only for
/// [`RlSource::Rankin`]. `bits` sets the precision of the ζ source; other
/// sources inherit the precision of their forms.
///
/// # Safety
/// `forms` must be null or a live handle; `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_instance_new(
    source: RlSource,
    forms: *const RlEigenforms,
    f: usize,
    g: usize,
    t_max: f64,
    bits: u32,
    out_handle: *mut *mut RlInstance,
) -> RlStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = std::ptr::null_mut();
        let src = match source {
            RlSource::Zeta => TensorCoeffSource::zeta(bits),
            RlSource::Standard => TensorCoeffSource::standard(form(deref(forms, "forms")?, f)?.clone()),
            RlSource::Rankin => {
                let h = deref(forms, "forms")?;
                TensorCoeffSource::rankin(form(h, f)?.clone(), form(h, g)?.clone())
            }
            RlSource::Sym2 => TensorCoeffSource::sym2(form(deref(forms, "forms")?, f)?.clone()),
        };
        let cfg = InstanceConfig { t_max, ..Default::default() };
        let mut inst = build_instance(Arc::new(src), &cfg)?;
        inst.validate_default()?;
        if !inst.is_validated() {
            return Err(Error::Unvalidated(format!("{}: {:?}", inst.label(), inst.status())).into());
        }
        *slot = Box::into_raw(Box::new(RlInstance { inner: inst }));
        Ok(())
    })
}

/// Releases a handle from [`rl_instance_new`]. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_instance_free(h: *mut RlInstance) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Root number found by validation.
///
/// # Safety
/// `h` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_instance_root_number(h: *const RlInstance, value: *mut f64) -> RlStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let v = out(value, "value")?;
        *v = h.inner.root_number().ok_or_else(|| Error::Unvalidated(h.inner.label().to_string()))?;
        Ok(())
    })
}

/// L(σ + it) as a pair of doubles.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_instance_value(h: *const RlInstance, sigma: f64, t: f64, re: *mut f64, im: *mut f64) -> RlStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let (re, im) = (out(re, "re")?, out(im, "im")?);
        let s = Complex::with_val(h.inner.precision(), (sigma, t));
        let v = h.inner.l_value(&s)?;
        *re = v.real().to_f64();
        *im = v.imag().to_f64();
        Ok(())
    })
}

/// Zeros β + iγ with β ≥ `alpha` and 0 ≤ γ ≤ `t`, by the argument principle.
///
/// # Safety
/// `h` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_count_zeros(h: *const RlInstance, alpha: f64, t: f64, result: *mut RlZeroCount) -> RlStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let r = out(result, "result")?;
        let rep = count_zeros_box(&h.inner, alpha, t, &CountOptions::default())?;
        *r = RlZeroCount {
            count: rep.count,
            raw: rep.raw,
            contour_residual: rep.contour_residual,
            accepted: rep.accepted() as i32,
        };
        Ok(())
    })
}
