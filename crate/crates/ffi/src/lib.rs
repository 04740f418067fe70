//! C ABI over `tlim`. Objects cross the boundary as opaque handles owned by
//! the caller and released with the matching `*_free`. Every fallible call
//! returns a [`TlimStatus`]; the message of the last failure on the calling
//! thread is available from [`tlim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use tlim::estimators::{additive_interaction, coupling_factor, multiplicative_interaction, EstimatorConfig, TargetSpec};
use tlim::rbm::RbmParams;
use tlim::simulators::{ising_metropolis, HamiltonianConfig, SamplerConfig};
use tlim::store::{csv as store_csv, packed};
use tlim::{Assignment, DataView, Error, SampleMatrix};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InsufficientSupport = 5,
    ZeroCell = 6,
    Unsupported = 7,
    Panic = 8,
}

/// A loaded or simulated sample matrix.
pub struct TlimMatrix(SampleMatrix);

/// Restricted Boltzmann machine parameters.
pub struct TlimRbm(RbmParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TlimStatus {
    match e {
        Error::Io(_) => TlimStatus::Io,
        Error::Parse { .. } | Error::Format(_) | Error::Json(_) | Error::OutOfRange { .. } | Error::InvalidSpin { .. } => {
            TlimStatus::Parse
        }
        Error::InsufficientSupport { .. } | Error::DegenerateMean { .. } | Error::NoUsableStrata => {
            TlimStatus::InsufficientSupport
        }
        Error::ZeroCell { .. } => TlimStatus::ZeroCell,
        Error::UnsupportedOrder(_) | Error::SizeLimit { .. } => TlimStatus::Unsupported,
        _ => TlimStatus::InvalidArgument,
    }
}

struct Fail(TlimStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TlimStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TlimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlimStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TlimStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| Fail(TlimStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(Path::new(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn matrix_arg<'a>(m: *const TlimMatrix) -> Result<&'a SampleMatrix, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null("matrix"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tlim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a packed file, or a CSV with an inferred schema when the path ends in `.csv`.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_matrix_load(path: *const c_char, out: *mut *mut TlimMatrix) -> TlimStatus {
    guard(|| {
        let path = path_arg(path)?;
        let m = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            store_csv::load_csv(path, &store_csv::infer_schema(path)?)?
        } else {
            packed::read(path)?
        };
        put(out, Box::into_raw(Box::new(TlimMatrix(m))))
    })
}

/// Writes the matrix in the packed format.
///
/// # Safety
/// `m` must come from this library; `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tlim_matrix_save(m: *const TlimMatrix, path: *const c_char) -> TlimStatus {
    guard(|| {
        packed::write(matrix_arg(m)?, path_arg(path)?)?;
        Ok(())
    })
}

/// Builds a matrix from row-major ±1 spins (`n_samples * n_vars` values).
///
/// # Safety
/// `spins` must point to `n_samples * n_vars` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_matrix_from_spins(
    spins: *const i8,
    n_samples: usize,
    n_vars: usize,
    out: *mut *mut TlimMatrix,
) -> TlimStatus {
    guard(|| {
        let len = n_samples.checked_mul(n_vars).ok_or_else(|| Fail(TlimStatus::InvalidArgument, "size overflow".into()))?;
        let data = slice_arg(spins, len, "spins")?;
        let rows: Vec<&[i8]> = if n_vars == 0 { Vec::new() } else { data.chunks(n_vars).collect() };
        let m = SampleMatrix::from_spins(&rows)?;
        put(out, Box::into_raw(Box::new(TlimMatrix(m))))
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tlim_matrix_free(m: *mut TlimMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must come from this library or be null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tlim_matrix_n_samples(m: *const TlimMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_samples())
}

/// # Safety
/// `m` must come from this library or be null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tlim_matrix_n_vars(m: *const TlimMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n_vars())
}

/// Rows where `vars[k] == values[k]` for every k.
///
/// # Safety
/// `vars` and `values` must each hold `len` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_count_assignment(
    m: *const TlimMatrix,
    vars: *const usize,
    values: *const u8,
    len: usize,
    out: *mut u64,
) -> TlimStatus {
    guard(|| {
        let m = matrix_arg(m)?;
        let pairs = slice_arg(vars, len, "vars")?.iter().copied().zip(slice_arg(values, len, "values")?.iter().copied());
        let a = Assignment::new(pairs.collect())?;
        a.validate(m)?;
        put(out, m.count_assignment(&a))
    })
}

unsafe fn spec_arg(
    targets: *const usize,
    n_targets: usize,
    conditioning: *const usize,
    n_conditioning: usize,
) -> Result<TargetSpec, Fail> {
    let spec = TargetSpec::new(slice_arg(targets, n_targets, "targets")?.to_vec());
    Ok(if conditioning.is_null() {
        spec
    } else {
        spec.with_conditioning(slice_arg(conditioning, n_conditioning, "conditioning")?.to_vec())
    })
}

fn strict(min_bin_count: f64) -> EstimatorConfig {
    EstimatorConfig { min_bin_count, ..EstimatorConfig::default() }
}

/// `ln I^m` of the targets given the conditioning variables at 0. A null
/// `conditioning` conditions on every other discrete variable. Cells below
/// `min_bin_count` are an error.
///
/// # Safety
/// Arrays must hold the stated number of entries; `out_log_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_multiplicative(
    m: *const TlimMatrix,
    targets: *const usize,
    n_targets: usize,
    conditioning: *const usize,
    n_conditioning: usize,
    min_bin_count: f64,
    out_log_value: *mut f64,
) -> TlimStatus {
    guard(|| {
        let m = matrix_arg(m)?;
        let spec = spec_arg(targets, n_targets, conditioning, n_conditioning)?;
        let est = multiplicative_interaction(&DataView::new(m), &spec, &strict(min_bin_count))?;
        put(out_log_value, est.log_scale())
    })
}

/// `I^a` of the targets on the outcome column, conditioning as in
/// [`tlim_multiplicative`].
///
/// # Safety
/// Arrays must hold the stated number of entries; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_additive(
    m: *const TlimMatrix,
    outcome: usize,
    targets: *const usize,
    n_targets: usize,
    conditioning: *const usize,
    n_conditioning: usize,
    min_bin_count: f64,
    out_value: *mut f64,
) -> TlimStatus {
    guard(|| {
        let m = matrix_arg(m)?;
        let spec = spec_arg(targets, n_targets, conditioning, n_conditioning)?;
        let est = additive_interaction(&DataView::new(m), outcome, &spec, &strict(min_bin_count))?;
        put(out_value, est.value)
    })
}

/// Divisor turning `ln I^m` of an `order`-tuple into a ±1-basis coupling.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_coupling_factor(order: usize, out: *mut f64) -> TlimStatus {
    guard(|| put(out, coupling_factor(order)?))
}

/// Runs the Ising Metropolis sampler with the default coupling, burn-in,
/// thinning and chain count.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_simulate_ising(
    side: usize,
    temperature: f64,
    n_samples: usize,
    seed: u64,
    out: *mut *mut TlimMatrix,
) -> TlimStatus {
    guard(|| {
        let sim = ising_metropolis(&HamiltonianConfig::ising(side, temperature), &SamplerConfig::new(n_samples, seed))?;
        put(out, Box::into_raw(Box::new(TlimMatrix(sim.matrix))))
    })
}

/// Parses `{m, n, w, b, c}` JSON.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_rbm_from_json(json: *const c_char, out: *mut *mut TlimRbm) -> TlimStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Fail(TlimStatus::InvalidArgument, "json is not UTF-8".into()))?;
        put(out, Box::into_raw(Box::new(TlimRbm(RbmParams::from_json(text)?))))
    })
}

/// Closed-form pair coupling between visible units `j1` and `j2`.
///
/// # Safety
/// `rbm` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlim_rbm_pair_coupling(rbm: *const TlimRbm, j1: usize, j2: usize, out: *mut f64) -> TlimStatus {
    guard(|| {
        let rbm = rbm.as_ref().ok_or_else(|| null("rbm"))?;
        put(out, rbm.0.pair_coupling(j1, j2)?)
    })
}

/// # Safety
/// `rbm` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tlim_rbm_free(rbm: *mut TlimRbm) {
    if !rbm.is_null() {
        drop(Box::from_raw(rbm));
    }
}
