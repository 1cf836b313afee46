//! C ABI over `linflow`.
//!
//! Every function returns a [`LinflowStatus`]; on failure the message is kept
//! per thread and can be read with [`linflow_last_error`]. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linflow::conjugacy::{build_pipeline, ConjugacyMap};
use linflow::equivalence::{cross_ratio, decide, EquivalenceLevel};
use linflow::floweval::{minimal_period, LinearFlow, PeriodValue};
use linflow::flowstruct::{realify, scu_split};
use linflow::{CMatrix, GeneratorMatrix, LinflowError, Matrix, ToleranceProfile};
use nalgebra::DVector;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinflowStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    Dimension = 3,
    Numerical = 4,
    NotEquivalent = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinflowLevel {
    Topological = 0,
    SomeHolder = 1,
    AllHolder = 2,
    Lipschitz = 3,
    Smooth = 4,
    /// Uses the `beta` argument of [`linflow_decide`].
    BetaMinus = 5,
    BetaPlus = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinflowVerdict {
    pub equivalent: bool,
    pub conclusive: bool,
    pub time_reversed: bool,
    /// `alpha` is meaningful only when this is set.
    pub has_alpha: bool,
    pub alpha: f64,
}

/// Real generator of a linear flow.
pub struct LinflowGenerator {
    inner: GeneratorMatrix,
}

/// Conjugacy between two flows.
pub struct LinflowMap {
    inner: ConjugacyMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LinflowStatus, String);

impl From<LinflowError> for Failure {
    fn from(e: LinflowError) -> Self {
        let status = match e {
            LinflowError::NotSquare { .. }
            | LinflowError::Empty
            | LinflowError::NonFinite { .. }
            | LinflowError::InvalidTolerance(_) => LinflowStatus::InvalidInput,
            LinflowError::DimensionMismatch { .. }
            | LinflowError::UnsupportedDimension { .. }
            | LinflowError::OutOfScope(_)
            | LinflowError::Domain(_) => LinflowStatus::Dimension,
            LinflowError::NumericalFailure { .. }
            | LinflowError::IllConditioned { .. }
            | LinflowError::NoInvertibleWitness { .. }
            | LinflowError::Range(_)
            | LinflowError::DegenerateSamples(_) => LinflowStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LinflowStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LinflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LinflowStatus::Ok
        }
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            LinflowStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn generator<'a>(p: *const LinflowGenerator, what: &str) -> Result<&'a GeneratorMatrix, Failure> {
    p.as_ref().map(|g| &g.inner).ok_or_else(|| null(what))
}

unsafe fn map<'a>(p: *const LinflowMap) -> Result<&'a ConjugacyMap, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("map"))
}

fn level(l: LinflowLevel, beta: f64) -> EquivalenceLevel {
    match l {
        LinflowLevel::Topological => EquivalenceLevel::Topological,
        LinflowLevel::SomeHolder => EquivalenceLevel::SomeHolder,
        LinflowLevel::AllHolder => EquivalenceLevel::AllHolder,
        LinflowLevel::Lipschitz => EquivalenceLevel::Lipschitz,
        LinflowLevel::Smooth => EquivalenceLevel::Smooth,
        LinflowLevel::BetaMinus => EquivalenceLevel::BetaMinus(beta),
        LinflowLevel::BetaPlus => EquivalenceLevel::BetaPlus(beta),
    }
}

fn boxed<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before computing `value`.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn linflow_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn linflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a generator from `d*d` row-major entries.
///
/// # Safety
/// `entries` must point to `d*d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_generator_new(
    entries: *const f64,
    d: usize,
    out: *mut *mut LinflowGenerator,
) -> LinflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n = d
            .checked_mul(d)
            .ok_or_else(|| Failure(LinflowStatus::InvalidInput, "d overflows".into()))?;
        let xs = slice(entries, n, "entries")?;
        let inner = GeneratorMatrix::new(Matrix::from_row_slice(d, d, xs))?;
        boxed(out, LinflowGenerator { inner });
        Ok(())
    })
}

/// Create the realified generator of a complex `n×n` matrix given as `2*n*n`
/// row-major `(re, im)` pairs.
///
/// # Safety
/// `entries` must point to `2*n*n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_generator_new_complex(
    entries: *const f64,
    n: usize,
    out: *mut *mut LinflowGenerator,
) -> LinflowStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n
            .checked_mul(n)
            .and_then(|k| k.checked_mul(2))
            .ok_or_else(|| Failure(LinflowStatus::InvalidInput, "n overflows".into()))?;
        let xs = slice(entries, len, "entries")?;
        let z: Vec<Complex64> = xs.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let inner = realify(&CMatrix::from_row_slice(n, n, &z))?;
        boxed(out, LinflowGenerator { inner });
        Ok(())
    })
}

/// Real dimension of the state space, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn linflow_generator_dim(g: *const LinflowGenerator) -> usize {
    g.as_ref().map_or(0, |g| g.inner.dim())
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linflow_generator_free(g: *mut LinflowGenerator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `y = e^{tA} x`, both of length `dim`.
///
/// # Safety
/// `x` and `y` must each hold `linflow_generator_dim(g)` doubles.
#[no_mangle]
pub unsafe extern "C" fn linflow_flow_apply(
    g: *const LinflowGenerator,
    t: f64,
    x: *const f64,
    y: *mut f64,
) -> LinflowStatus {
    guard(|| {
        let a = generator(g, "generator")?;
        let d = a.dim();
        let x = DVector::from_column_slice(slice(x, d, "x")?);
        let fx = LinearFlow::new(a, &ToleranceProfile::default()).apply(t, &x)?;
        slice_mut(y, d, "y")?.copy_from_slice(fx.as_slice());
        Ok(())
    })
}

/// Decide equivalence of the flows of `a` and `b` at `level`. `beta` is read
/// only for the β levels.
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_decide(
    a: *const LinflowGenerator,
    b: *const LinflowGenerator,
    lvl: LinflowLevel,
    beta: f64,
    out: *mut LinflowVerdict,
) -> LinflowStatus {
    guard(|| {
        let (ga, gb) = (generator(a, "a")?, generator(b, "b")?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = decide(ga, gb, level(lvl, beta), &ToleranceProfile::default())?;
        *out = LinflowVerdict {
            equivalent: v.equivalent,
            conclusive: v.conclusive,
            time_reversed: v.time_reversed,
            has_alpha: v.alpha.is_some(),
            alpha: v.alpha.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Lyapunov cross ratio of two hyperbolic flows.
///
/// # Safety
/// `a`, `b` must be live handles and `rho` writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_cross_ratio(
    a: *const LinflowGenerator,
    b: *const LinflowGenerator,
    rho: *mut f64,
) -> LinflowStatus {
    guard(|| {
        let (ga, gb) = (generator(a, "a")?, generator(b, "b")?);
        let rho = rho.as_mut().ok_or_else(|| null("rho"))?;
        let tol = ToleranceProfile::default();
        *rho = cross_ratio(&scu_split(ga, &tol)?, &scu_split(gb, &tol)?)?.rho;
        Ok(())
    })
}

/// Minimal period of `x`: 0 at fixed points, `INFINITY` when not periodic.
///
/// # Safety
/// `x` must hold `linflow_generator_dim(g)` doubles; `period` writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_minimal_period(
    g: *const LinflowGenerator,
    x: *const f64,
    period: *mut f64,
) -> LinflowStatus {
    guard(|| {
        let a = generator(g, "generator")?;
        let period = period.as_mut().ok_or_else(|| null("period"))?;
        let x = DVector::from_column_slice(slice(x, a.dim(), "x")?);
        *period = match minimal_period(a, &x, &ToleranceProfile::default())?.value {
            PeriodValue::Zero => 0.0,
            PeriodValue::Finite(t) => t,
            PeriodValue::Infinite => f64::INFINITY,
        };
        Ok(())
    })
}

/// Build a conjugacy from the flow of `a` to the flow of `b` at the finest
/// level at which they are equivalent. Returns `NotEquivalent` when they are
/// not even topologically equivalent; `alpha` (nullable) receives the time
/// rescaling.
///
/// # Safety
/// `a`, `b` must be live handles; `out` writable; `alpha` null or writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_conjugacy_build(
    a: *const LinflowGenerator,
    b: *const LinflowGenerator,
    out: *mut *mut LinflowMap,
    alpha: *mut f64,
) -> LinflowStatus {
    guard(|| {
        let (ga, gb) = (generator(a, "a")?, generator(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let tol = ToleranceProfile::default();
        for lvl in [
            EquivalenceLevel::Smooth,
            EquivalenceLevel::AllHolder,
            EquivalenceLevel::Topological,
        ] {
            let v = decide(ga, gb, lvl, &tol)?;
            if v.equivalent {
                let h = build_pipeline(ga, gb, &v, &tol)?;
                if let Some(p) = alpha.as_mut() {
                    *p = v.alpha.unwrap_or(1.0);
                }
                boxed(out, LinflowMap { inner: h });
                return Ok(());
            }
        }
        Err(Failure(
            LinflowStatus::NotEquivalent,
            "flows are not topologically equivalent".into(),
        ))
    })
}

/// `y = h(x)`, or `h⁻¹(x)` when `inverse` is set.
///
/// # Safety
/// `x` and `y` must each hold as many doubles as the map's dimension.
#[no_mangle]
pub unsafe extern "C" fn linflow_map_apply(
    h: *const LinflowMap,
    inverse: bool,
    x: *const f64,
    y: *mut f64,
) -> LinflowStatus {
    guard(|| {
        let h = map(h)?;
        let d = h.dim_in();
        let x = DVector::from_column_slice(slice(x, d, "x")?);
        let hx = if inverse { h.apply_inverse(&x) } else { h.apply(&x) };
        slice_mut(y, d, "y")?.copy_from_slice(hx.as_slice());
        Ok(())
    })
}

/// State dimension of the map, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn linflow_map_dim(h: *const LinflowMap) -> usize {
    h.as_ref().map_or(0, |h| h.inner.dim_in())
}

/// JSON document of the map; release with [`linflow_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn linflow_map_to_json(h: *const LinflowMap, out: *mut *mut c_char) -> LinflowStatus {
    guard(|| {
        let h = map(h)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = serde_json::to_string(h).map_err(|e| Failure(LinflowStatus::Numerical, e.to_string()))?;
        *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linflow_map_free(h: *mut LinflowMap) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linflow_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
