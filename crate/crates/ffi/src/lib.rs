//! C interface to `wiretap-bounds`.
//!
//! Every fallible function returns a [`WtStatus`]; results go through out
//! pointers. On failure, [`wt_last_error`] returns a message for the calling
//! thread. Handles are opaque and must be released with their `_free`
//! function. Rates are in nats unless a unit argument says otherwise.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wiretap_bounds::matrix::MatrixFile;
use wiretap_bounds::turbulence::monte_carlo_lower;
use wiretap_bounds::{
    allocate, asymptotic_coefficients, capacity_infinite, g_entropy, haar_unitary, lower_bound_single,
    mode_decompose, upper_bound_single, Allocation, BoundKind, ComplexMatrix, EnsembleKind, EnsembleSpec, Error,
    ModeSpectrum, PhotonBudget, Transmissivity, UnitaryTransition, Unit,
};

pub const WT_UNIT_NATS: u32 = 0;
pub const WT_UNIT_BITS: u32 = 1;
pub const WT_BOUND_LOWER: u32 = 0;
pub const WT_BOUND_UPPER: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Dimension = 3,
    NotUnitary = 4,
    Numerical = 5,
    Parse = 6,
    Panic = 7,
}

/// Monte Carlo estimate with its 95% interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WtEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub struct WtMatrix(ComplexMatrix);
pub struct WtSpectrum(ModeSpectrum);
pub struct WtAllocation(Allocation);
pub struct WtEnsemble(EnsembleSpec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> WtStatus {
    match err {
        Error::Domain(_) | Error::EigenvalueOutOfRange { .. } | Error::TooManyModes { .. } => WtStatus::Domain,
        Error::NotSquare { .. } | Error::DimensionMismatch(_) => WtStatus::Dimension,
        Error::NotUnitary { .. } | Error::PartitionResidual { .. } | Error::NotHermitian { .. } => {
            WtStatus::NotUnitary
        }
        Error::Parse(_) | Error::Json(_) | Error::Io(_) => WtStatus::Parse,
        Error::Sample { source, .. } => status_of(source),
        _ => WtStatus::Numerical,
    }
}

/// Run `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (WtStatus, String)>) -> WtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WtStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WtStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (WtStatus, String)>;
}

impl<T> OrStatus<T> for wiretap_bounds::Result<T> {
    fn or_status(self) -> Result<T, (WtStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (WtStatus, String) {
    (WtStatus::NullPointer, format!("{what} is null"))
}

fn unit_of(unit: u32) -> Result<Unit, (WtStatus, String)> {
    match unit {
        WT_UNIT_NATS => Ok(Unit::Nats),
        WT_UNIT_BITS => Ok(Unit::Bits),
        other => Err((WtStatus::Domain, format!("unknown unit {other}"))),
    }
}

fn kind_of(kind: u32) -> Result<BoundKind, (WtStatus, String)> {
    match kind {
        WT_BOUND_LOWER => Ok(BoundKind::Lower),
        WT_BOUND_UPPER => Ok(BoundKind::Upper),
        other => Err((WtStatus::Domain, format!("unknown bound kind {other}"))),
    }
}

/// # Safety
/// `ptr` must be null or valid for writing one `T`.
unsafe fn write<T>(ptr: *mut T, value: T, what: &str) -> Result<(), (WtStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(value);
    Ok(())
}

/// # Safety
/// `ptr` must be null or valid for reading `len` values.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (WtStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Thermal entropy `g(x)` in nats.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn wt_g_entropy(x: f64, out: *mut f64) -> WtStatus {
    guard(|| write(out, g_entropy(x).or_status()?, "out"))
}

/// Single-mode lower bound `L(eta, nbar)` in `unit`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn wt_lower_bound(eta: f64, nbar: f64, unit: u32, out: *mut f64) -> WtStatus {
    guard(|| {
        let unit = unit_of(unit)?;
        let v = lower_bound_single(Transmissivity::new(eta).or_status()?, PhotonBudget::new(nbar).or_status()?);
        write(out, v.in_unit(unit), "out")
    })
}

/// Single-mode upper bound `U(eta, nbar)` in `unit`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn wt_upper_bound(eta: f64, nbar: f64, unit: u32, out: *mut f64) -> WtStatus {
    guard(|| {
        let unit = unit_of(unit)?;
        let v = upper_bound_single(Transmissivity::new(eta).or_status()?, PhotonBudget::new(nbar).or_status()?);
        write(out, v.in_unit(unit), "out")
    })
}

/// Large-budget limit of the lower bound in nats; `+inf` at `eta = 1`.
///
/// # Safety
/// `out` must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn wt_capacity_infinite(eta: f64, out: *mut f64) -> WtStatus {
    guard(|| write(out, capacity_infinite(Transmissivity::new(eta).or_status()?), "out"))
}

/// Low-photon `O(nbar)` coefficients of the lower and upper bounds, in nats.
///
/// # Safety
/// `lower` and `upper` must be valid for writing one `double` each.
#[no_mangle]
pub unsafe extern "C" fn wt_asymptotic_coefficients(eta: f64, lower: *mut f64, upper: *mut f64) -> WtStatus {
    guard(|| {
        let c = asymptotic_coefficients(Transmissivity::new(eta).or_status()?).or_status()?;
        write(lower, c.lower, "lower")?;
        write(upper, c.upper, "upper")
    })
}

/// Build a `rows x cols` matrix from row-major real and imaginary parts.
/// `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` if non-null) must hold `rows * cols` doubles; `out` must be
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wt_matrix_new(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut WtMatrix,
) -> WtStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or((WtStatus::Dimension, "matrix size overflows".to_string()))?;
        let re = slice(re, len, "re")?.to_vec();
        let im = if im.is_null() { Vec::new() } else { slice(im, len, "im")?.to_vec() };
        let m = ComplexMatrix::try_from(MatrixFile { rows, cols, re, im }).or_status()?;
        write(out, Box::into_raw(Box::new(WtMatrix(m))), "out")
    })
}

/// An `n x n` Haar-random unitary, deterministic in `seed`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wt_matrix_haar(n: usize, seed: u64, out: *mut *mut WtMatrix) -> WtStatus {
    guard(|| {
        if n == 0 {
            return Err((WtStatus::Dimension, "n must be positive".into()));
        }
        write(out, Box::into_raw(Box::new(WtMatrix(haar_unitary(n, seed)))), "out")
    })
}

/// Copy the entries into row-major `re` and `im`, each of length `len`
/// (at least rows * cols).
///
/// # Safety
/// `matrix` must come from this library; `re` and `im` must be valid for
/// writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wt_matrix_entries(matrix: *const WtMatrix, re: *mut f64, im: *mut f64, len: usize) -> WtStatus {
    guard(|| {
        let m = matrix.as_ref().ok_or_else(|| null("matrix"))?;
        let data = m.0.as_slice();
        if len < data.len() {
            return Err((WtStatus::Dimension, format!("buffer holds {len}, need {}", data.len())));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re or im"));
        }
        for (i, z) in data.iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wt_matrix_free(matrix: *mut WtMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// A spectrum of transmissivities, each in `[0, 1]`.
///
/// # Safety
/// `etas` must hold `len` doubles; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wt_spectrum_new(etas: *const f64, len: usize, out: *mut *mut WtSpectrum) -> WtStatus {
    guard(|| {
        let s = ModeSpectrum::new(slice(etas, len, "etas")?.to_vec()).or_status()?;
        write(out, Box::into_raw(Box::new(WtSpectrum(s))), "out")
    })
}

/// Reduce the unitary `matrix` with `m` inputs, `k` outputs to Bob and `l`
/// to Eve into parallel single-mode channels. `residual` may be null.
///
/// # Safety
/// `matrix` must come from this library; `out` must be valid for writing one
/// pointer and `residual` for one double if non-null.
#[no_mangle]
pub unsafe extern "C" fn wt_mode_decompose(
    matrix: *const WtMatrix,
    m: usize,
    k: usize,
    l: usize,
    out: *mut *mut WtSpectrum,
    residual: *mut f64,
) -> WtStatus {
    guard(|| {
        let t = matrix.as_ref().ok_or_else(|| null("matrix"))?;
        let d = mode_decompose(&UnitaryTransition::new(t.0.clone(), m, k, l).or_status()?).or_status()?;
        if !residual.is_null() {
            residual.write(d.partition_residual);
        }
        write(out, Box::into_raw(Box::new(WtSpectrum(d.spectrum))), "out")
    })
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn wt_spectrum_len(spectrum: *const WtSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Copy the transmissivities, descending, into `buf` of length `len`.
///
/// # Safety
/// `spectrum` must come from this library; `buf` must be valid for writing
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wt_spectrum_values(spectrum: *const WtSpectrum, buf: *mut f64, len: usize) -> WtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        copy_out(s.0.etas(), buf, len)
    })
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize) -> Result<(), (WtStatus, String)> {
    if len < values.len() {
        return Err((WtStatus::Dimension, format!("buffer holds {len}, need {}", values.len())));
    }
    if values.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// # Safety
/// `spectrum` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wt_spectrum_free(spectrum: *mut WtSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Optimal split of `nbar` photons across the spectrum for bound `kind`.
///
/// # Safety
/// `spectrum` must come from this library; `out` must be valid for writing
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn wt_allocate(
    spectrum: *const WtSpectrum,
    nbar: f64,
    kind: u32,
    tol: f64,
    out: *mut *mut WtAllocation,
) -> WtStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let a = allocate(&s.0, PhotonBudget::new(nbar).or_status()?, kind_of(kind)?, tol).or_status()?;
        write(out, Box::into_raw(Box::new(WtAllocation(a))), "out")
    })
}

/// Total rate of the allocation in `unit`.
///
/// # Safety
/// `allocation` must come from this library; `out` must be valid for writing
/// one double.
#[no_mangle]
pub unsafe extern "C" fn wt_allocation_value(allocation: *const WtAllocation, unit: u32, out: *mut f64) -> WtStatus {
    guard(|| {
        let a = allocation.as_ref().ok_or_else(|| null("allocation"))?;
        write(out, a.0.value.in_unit(unit_of(unit)?), "out")
    })
}

/// Copy the per-mode budgets (spectrum order) into `buf` of length `len`.
///
/// # Safety
/// `allocation` must come from this library; `buf` must be valid for writing
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wt_allocation_budgets(allocation: *const WtAllocation, buf: *mut f64, len: usize) -> WtStatus {
    guard(|| {
        let a = allocation.as_ref().ok_or_else(|| null("allocation"))?;
        copy_out(&a.0.budgets, buf, len)
    })
}

/// # Safety
/// `allocation` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wt_allocation_free(allocation: *mut WtAllocation) {
    if !allocation.is_null() {
        drop(Box::from_raw(allocation));
    }
}

/// Parse an ensemble from a nul-terminated JSON string.
///
/// # Safety
/// `json` must be a valid C string; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wt_ensemble_from_json(json: *const c_char, out: *mut *mut WtEnsemble) -> WtStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (WtStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let spec = EnsembleSpec::from_json_str(text).or_status()?;
        write(out, Box::into_raw(Box::new(WtEnsemble(spec))), "out")
    })
}

/// Top-left `k x m` blocks of `n x n` Haar unitaries.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn wt_ensemble_haar_subblock(
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
    out: *mut *mut WtEnsemble,
) -> WtStatus {
    guard(|| {
        let spec = EnsembleSpec::new(EnsembleKind::HaarSubblock { n, m, k }, seed).or_status()?;
        write(out, Box::into_raw(Box::new(WtEnsemble(spec))), "out")
    })
}

/// Monte Carlo estimate of the expected allocated lower bound, in nats.
///
/// # Safety
/// `ensemble` must come from this library; `out` must be valid for writing
/// one `WtEstimate`.
#[no_mangle]
pub unsafe extern "C" fn wt_monte_carlo_lower(
    ensemble: *const WtEnsemble,
    nbar: f64,
    n_samples: u64,
    out: *mut WtEstimate,
) -> WtStatus {
    guard(|| {
        let e = ensemble.as_ref().ok_or_else(|| null("ensemble"))?;
        let est = monte_carlo_lower(&e.0, PhotonBudget::new(nbar).or_status()?, n_samples).or_status()?;
        write(
            out,
            WtEstimate {
                mean: est.mean,
                std_error: est.std_error,
                n_samples: est.n_samples,
                ci_low: est.confidence_95.0,
                ci_high: est.confidence_95.1,
            },
            "out",
        )
    })
}

/// # Safety
/// `ensemble` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wt_ensemble_free(ensemble: *mut WtEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}
