//! C interface to `dpp-core`.
//!
//! Matrices, data vectors and censuses cross the boundary as opaque handles
//! created by `dpp_*_new*` or `dpp_solve` and released by the matching
//! `dpp_*_free`. Every function returns a [`DppStatus`]; on failure a
//! description is available from [`dpp_last_error`] on the same thread.
//! Panics are caught and reported as [`DppStatus::Panic`].
//!
//! Subsets are listed in graded order: by size, then lexicographically.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dpp_core::census::{solve_census, Census, Component};
use dpp_core::combinatorics::bell_number;
use dpp_core::decoupling::{count_critical_points, MlDegreeTable};
use dpp_core::hyperdet::{hyperdet, Tensor222};
use dpp_core::io::census_json;
use dpp_core::model::{loglike_parametric, partition_function, principal_minors, DataVector, SymMatrix};
use dpp_core::solver::{gradient_residual, PointKind, SolverOptions};
use dpp_core::DppError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DppStatus {
    Ok = 0,
    /// A required pointer was null or a length did not match.
    NullOrLength = 1,
    /// Malformed input: wrong dimension, asymmetric matrix, nonpositive minor and so on.
    InvalidInput = 2,
    /// A numerical method failed to converge or a run stopped short.
    Numerical = 3,
    /// Points could not be certified distinct.
    Inconclusive = 4,
    /// The request needs an ML degree that is not known.
    Unsupported = 5,
    Panic = 6,
}

/// Symmetric complex matrix.
pub struct DppMatrix(SymMatrix);

/// Data vector of subset counts.
pub struct DppData(DataVector);

/// Result of [`dpp_solve`].
pub struct DppCensus(Census);

/// Classification of one census point.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DppPointFlags {
    pub is_real: bool,
    pub is_positive_definite: bool,
    pub is_local_max: bool,
    pub is_global_max: bool,
    pub has_value: bool,
    /// Log-likelihood; meaningful only when `has_value`.
    pub value: f64,
    pub residual: f64,
    pub orbit_size: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_for(e: &DppError) -> DppStatus {
    match e {
        DppError::MaxIterations { .. }
        | DppError::SingularJacobian
        | DppError::PathFailure(_)
        | DppError::StallWithoutTarget { .. } => DppStatus::Numerical,
        DppError::InconclusiveBall { .. } => DppStatus::Inconclusive,
        DppError::MissingMlDegree(_) => DppStatus::Unsupported,
        _ => DppStatus::InvalidInput,
    }
}

enum Failure {
    Null(&'static str),
    Core(DppError),
}

impl From<DppError> for Failure {
    fn from(e: DppError) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DppStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DppStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null or has the wrong length"));
            DppStatus::NullOrLength
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_for(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            DppStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(v);
    Ok(())
}

fn checked_pow2(n: usize) -> Result<usize, Failure> {
    if (1..=16).contains(&n) {
        Ok(1 << n)
    } else {
        Err(DppError::DimensionOutOfRange { n, min: 1, max: 16 }.into())
    }
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next `dpp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dpp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a real symmetric `n x n` matrix from `n * n` row-major entries.
///
/// # Safety
/// `entries` must point to `n * n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_matrix_new_real(n: usize, entries: *const f64, out: *mut *mut DppMatrix) -> DppStatus {
    guard(|| {
        checked_pow2(n)?;
        let e = slice(entries, n * n, "entries")?;
        let m = SymMatrix::from_real(n, e)?;
        write(out, Box::into_raw(Box::new(DppMatrix(m))), "out")
    })
}

/// Dimension of a matrix, 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpp_matrix_dim(m: *const DppMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n())
}

/// Entry `(i, j)` (0-based) as real and imaginary parts.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_matrix_get(m: *const DppMatrix, i: usize, j: usize, re: *mut f64, im: *mut f64) -> DppStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        if i >= m.n() || j >= m.n() {
            return Err(DppError::InvalidInput(format!("index ({i}, {j}) out of range for n = {}", m.n())).into());
        }
        let z = m.get(i, j);
        write(re, z.re, "re")?;
        write(im, z.im, "im")
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpp_matrix_free(m: *mut DppMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Builds a data vector on `n` elements from `2^n` real counts in graded order.
///
/// # Safety
/// `graded` must point to `2^n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_data_new_real(n: usize, graded: *const f64, out: *mut *mut DppData) -> DppStatus {
    guard(|| {
        let len = checked_pow2(n)?;
        let u = DataVector::from_graded_real(n, slice(graded, len, "graded")?)?;
        write(out, Box::into_raw(Box::new(DppData(u))), "out")
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpp_data_free(d: *mut DppData) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// All `2^n` principal minors in graded order. `len` must equal `2^n`.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dpp_principal_minors(m: *const DppMatrix, re: *mut f64, im: *mut f64, len: usize) -> DppStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        if len != 1 << m.n() || re.is_null() || im.is_null() {
            return Err(Failure::Null("output buffer"));
        }
        for (k, z) in principal_minors(m).graded().iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// `det(Θ + Id)`.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_partition_function(m: *const DppMatrix, re: *mut f64, im: *mut f64) -> DppStatus {
    guard(|| {
        let z = partition_function(&borrow(m, "matrix")?.0);
        write(re, z.re, "re")?;
        write(im, z.im, "im")
    })
}

/// Log-likelihood of a real matrix whose minors carrying data are positive.
///
/// # Safety
/// `m` and `d` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_loglike(m: *const DppMatrix, d: *const DppData, out: *mut f64) -> DppStatus {
    guard(|| {
        let v = loglike_parametric(&borrow(m, "matrix")?.0, &borrow(d, "data")?.0)?;
        write(out, v, "out")
    })
}

/// `max |∂L/∂θ_ij| / Σ |u_I|`; zero exactly at critical points.
///
/// # Safety
/// `m` and `d` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_gradient_residual(m: *const DppMatrix, d: *const DppData, out: *mut f64) -> DppStatus {
    guard(|| {
        let v = gradient_residual(&borrow(m, "matrix")?.0, &borrow(d, "data")?.0)?;
        write(out, v, "out")
    })
}

/// Number of complex critical matrices for generic data on `n` elements.
/// Returns `Unsupported` when an ML degree for some block size is unknown.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_count_critical_points(n: usize, out: *mut u64) -> DppStatus {
    guard(|| {
        let c = count_critical_points(n, &MlDegreeTable::default())?;
        write(out, c.total, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_bell_number(n: usize, out: *mut u64) -> DppStatus {
    guard(|| write(out, bell_number(n)?, "out"))
}

/// Cayley hyperdeterminant of a real 2x2x2 tensor given as 8 entries in graded order.
///
/// # Safety
/// `graded` must point to 8 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_hyperdet(graded: *const f64, out: *mut f64) -> DppStatus {
    guard(|| {
        let t = Tensor222::from_real_graded(slice(graded, 8, "graded")?)?;
        write(out, hyperdet(&t).re, "out")
    })
}

/// Solves the likelihood equations. `all_components` selects every set
/// partition instead of the main component only. A census is produced even
/// when the run stops short; check [`dpp_census_complete`].
///
/// # Safety
/// `d` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_solve(d: *const DppData, all_components: bool, seed: u64, out: *mut *mut DppCensus) -> DppStatus {
    guard(|| {
        let u = &borrow(d, "data")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let component = if all_components { Component::All } else { Component::Main };
        let c = solve_census(u, component, &SolverOptions { seed, ..SolverOptions::default() })?;
        write(out, Box::into_raw(Box::new(DppCensus(c))), "out")
    })
}

/// Number of points in a census, 0 for null.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpp_census_len(c: *const DppCensus) -> usize {
    c.as_ref().map_or(0, |c| c.0.points.len())
}

/// Whether every solver run reached its expected solution count.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpp_census_complete(c: *const DppCensus) -> bool {
    c.as_ref().is_some_and(|c| c.0.complete)
}

/// Copies point `k` into a new matrix handle owned by the caller.
///
/// # Safety
/// `c` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_census_point(c: *const DppCensus, k: usize, out: *mut *mut DppMatrix) -> DppStatus {
    guard(|| {
        let p = point(c, k)?;
        write(out, Box::into_raw(Box::new(DppMatrix(p.theta.clone()))), "out")
    })
}

/// # Safety
/// `c` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpp_census_flags(c: *const DppCensus, k: usize, out: *mut DppPointFlags) -> DppStatus {
    guard(|| {
        let p = point(c, k)?;
        let flags = DppPointFlags {
            is_real: p.flags.is_real,
            is_positive_definite: p.flags.is_positive_definite,
            is_local_max: p.flags.kind == Some(PointKind::LocalMax),
            is_global_max: p.flags.is_global_max,
            has_value: p.value.is_some(),
            value: p.value.unwrap_or(f64::NAN),
            residual: p.residual,
            orbit_size: p.orbit_size,
        };
        write(out, flags, "out")
    })
}

unsafe fn point<'a>(c: *const DppCensus, k: usize) -> Result<&'a dpp_core::solver::CriticalPoint, Failure> {
    let c = &borrow(c, "census")?.0;
    c.points
        .get(k)
        .ok_or_else(|| DppError::InvalidInput(format!("point {k} out of range for {} points", c.points.len())).into())
}

/// The census as a JSON document, in the same format as the command-line tool.
/// Release with [`dpp_string_free`]. Returns null on failure.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpp_census_to_json(c: *const DppCensus) -> *mut c_char {
    let mut text = ptr::null_mut();
    guard(|| {
        let json = serde_json::to_string(&census_json(&borrow(c, "census")?.0)).map_err(DppError::from)?;
        text = CString::new(json).map_err(|e| DppError::InvalidInput(e.to_string()))?.into_raw();
        Ok(())
    });
    text
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `c` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpp_census_free(c: *mut DppCensus) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
