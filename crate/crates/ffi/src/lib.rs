//! C ABI over the scalar-support solvers and projection maps.
//!
//! Every entry point returns a [`BrStatus`]. On failure the message is kept
//! per thread and can be read with [`br_last_error`]. Handles are opaque and
//! must be released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use blindrepair::projection::ProjectionMap;
use blindrepair::{
    bregman_baseline, build_map, cost_matrix, dykstra_repair, make_simplex, tv_distance,
    BandConstraint, Coupling, DykstraOptions, Error, ErrorClass, RepairVector, SolverTrace,
    StopReason, Support,
};

/// Status codes; the nonzero error classes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Data = 3,
    Numerical = 4,
    Panic = 5,
}

/// A solved coupling together with its solver trace.
pub struct BrCoupling {
    coupling: Coupling,
    trace: SolverTrace,
}

/// A projection map derived from a coupling.
pub struct BrMap {
    map: ProjectionMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> BrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BrStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            BrStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            match e.class() {
                ErrorClass::Config => BrStatus::Config,
                ErrorClass::Data => BrStatus::Data,
                ErrorClass::Numerical => BrStatus::Numerical,
            }
        }
        Err(_) => {
            set_error("internal panic".into());
            BrStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or point to `len` readable doubles.
unsafe fn slice_in<'a>(ptr: *const f64, len: usize, what: &'static str) -> FfiResult<&'a [f64]> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or point to `len` writable doubles.
unsafe fn slice_out<'a>(ptr: *mut f64, len: usize, what: &'static str) -> FfiResult<&'a mut [f64]> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

fn non_null<'a, T>(ptr: *const T, what: &'static str) -> FfiResult<&'a T> {
    // SAFETY: callers hand in pointers obtained from this library
    unsafe { ptr.as_ref() }.ok_or(Failure::Null(what))
}

/// Points must already be strictly increasing so that caller arrays and the
/// support agree on indexing.
fn scalar_support(points: &[f64]) -> FfiResult<Arc<Support>> {
    if points
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidSupport("points must be strictly increasing".into()).into());
    }
    Ok(Arc::new(Support::scalar(points.iter().copied())?))
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn br_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    V.as_ptr()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn br_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Band-constrained repair coupling on the scalar support `points` with
/// cost `|x − y|`. `lambda` holds `n` band half-widths.
///
/// # Safety
/// Every array argument must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn br_dykstra_repair(
    points: *const f64,
    n: usize,
    p: *const f64,
    q: *const f64,
    v: *const f64,
    lambda: *const f64,
    epsilon: f64,
    iterations: usize,
    varepsilon: f64,
    out: *mut *mut BrCoupling,
) -> BrStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let support = scalar_support(slice_in(points, n, "points")?)?;
        let p = make_simplex(slice_in(p, n, "p")?.to_vec(), support.clone())?;
        let q = make_simplex(slice_in(q, n, "q")?.to_vec(), support.clone())?;
        let v = RepairVector::new(slice_in(v, n, "v")?.to_vec(), support.clone())?;
        let band = BandConstraint::new(v, slice_in(lambda, n, "lambda")?.to_vec())?;
        let cost = cost_matrix(&support, &support, &[1.0])?;
        let opts = DykstraOptions {
            iterations,
            varepsilon,
            ..Default::default()
        };
        let (coupling, trace) = dykstra_repair(&p, &q, &band, &cost, epsilon, &opts)?;
        write_handle(out, BrCoupling { coupling, trace })
    })
}

/// Unconstrained entropic coupling between `p` and `q` with cost `|x − y|`.
///
/// # Safety
/// Every array argument must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn br_bregman_baseline(
    points: *const f64,
    n: usize,
    p: *const f64,
    q: *const f64,
    epsilon: f64,
    iterations: usize,
    out: *mut *mut BrCoupling,
) -> BrStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let support = scalar_support(slice_in(points, n, "points")?)?;
        let p = make_simplex(slice_in(p, n, "p")?.to_vec(), support.clone())?;
        let q = make_simplex(slice_in(q, n, "q")?.to_vec(), support.clone())?;
        let cost = cost_matrix(&support, &support, &[1.0])?;
        let (coupling, trace) = bregman_baseline(&p, &q, &cost, epsilon, iterations)?;
        write_handle(out, BrCoupling { coupling, trace })
    })
}

/// Number of support points `n`; the coupling is `n × n`.
///
/// # Safety
/// `coupling` must be a live handle and `n` writable.
#[no_mangle]
pub unsafe extern "C" fn br_coupling_size(coupling: *const BrCoupling, n: *mut usize) -> BrStatus {
    guard(|| {
        let c = non_null(coupling, "coupling")?;
        if n.is_null() {
            return Err(Failure::Null("n"));
        }
        *n = c.coupling.entries().nrows();
        Ok(())
    })
}

/// Copies the entries in row-major order into `out`, which holds `len`
/// doubles and must be exactly `n·n` long.
///
/// # Safety
/// `coupling` must be a live handle and `out` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn br_coupling_entries(
    coupling: *const BrCoupling,
    out: *mut f64,
    len: usize,
) -> BrStatus {
    guard(|| {
        let c = non_null(coupling, "coupling")?;
        let e = c.coupling.entries();
        if len != e.len() {
            return Err(Error::LengthMismatch {
                expected: e.len(),
                actual: len,
            }
            .into());
        }
        let out = slice_out(out, len, "out")?;
        for (o, x) in out.iter_mut().zip(e.iter()) {
            *o = *x;
        }
        Ok(())
    })
}

/// Iterations run and whether the band early exit fired.
///
/// # Safety
/// `coupling` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn br_coupling_trace(
    coupling: *const BrCoupling,
    iterations: *mut usize,
    stopped_early: *mut bool,
) -> BrStatus {
    guard(|| {
        let c = non_null(coupling, "coupling")?;
        if let Some(k) = iterations.as_mut() {
            *k = c.trace.iterations();
        }
        if let Some(s) = stopped_early.as_mut() {
            *s = c.trace.stop_reason == StopReason::BandResidualBelowVarepsilon;
        }
        Ok(())
    })
}

/// # Safety
/// `coupling` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn br_coupling_free(coupling: *mut BrCoupling) {
    if !coupling.is_null() {
        drop(Box::from_raw(coupling));
    }
}

/// Projection map of `coupling` relative to the source marginal `p`.
///
/// # Safety
/// `coupling` must be a live handle, `p` point to `n` doubles and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn br_map_new(
    coupling: *const BrCoupling,
    p: *const f64,
    out: *mut *mut BrMap,
) -> BrStatus {
    guard(|| {
        let c = non_null(coupling, "coupling")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let support = c.coupling.source().clone();
        let p = make_simplex(slice_in(p, support.len(), "p")?.to_vec(), support)?;
        let map = build_map(&c.coupling, &p)?;
        write_handle(out, BrMap { map })
    })
}

/// Pushes the distribution `p` through the map into `out`; both hold `n`
/// doubles.
///
/// # Safety
/// `map` must be a live handle; `p` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn br_map_push_forward(
    map: *const BrMap,
    p: *const f64,
    out: *mut f64,
    n: usize,
) -> BrStatus {
    guard(|| {
        let m = non_null(map, "map")?;
        let pushed = m.map.push_forward(slice_in(p, n, "p")?)?;
        if pushed.len() != n {
            return Err(Error::LengthMismatch {
                expected: pushed.len(),
                actual: n,
            }
            .into());
        }
        slice_out(out, n, "out")?.copy_from_slice(&pushed);
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn br_map_free(map: *mut BrMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Total variation distance between two distributions on `n` points.
///
/// # Safety
/// `p` and `q` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn br_tv_distance(
    p: *const f64,
    q: *const f64,
    n: usize,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let support = Arc::new(Support::scalar((0..n).map(|i| i as f64))?);
        let p = make_simplex(slice_in(p, n, "p")?.to_vec(), support.clone())?;
        let q = make_simplex(slice_in(q, n, "q")?.to_vec(), support)?;
        *out = tv_distance(&p, &q)?;
        Ok(())
    })
}
