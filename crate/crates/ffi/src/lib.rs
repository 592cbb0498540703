//! C interface to `rabispec`.
//!
//! Fallible functions return a [`RabiStatus`]; on failure the message is kept in
//! thread-local storage and can be copied out with [`rabi_last_error_message`].
//! Spectra are returned behind an opaque handle that must be released with
//! [`rabi_spectrum_free`].

use rabispec::fockoracle::{build_hamiltonian, eigenvalues, FockModel};
use rabispec::rabi_eps::{spectrum_model1, wronskian_W, Model1Base, Model1Params};
use rabispec::rabi_nl::{spectrum_model2, wronskian_model2, Model2Base, Model2Params};
use rabispec::spectrum::{PointKind, SpectrumConfig, SpectrumSet};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RabiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationFailed = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RabiPointKind {
    Generic = 0,
    Juddian = 1,
    Degenerate = 2,
    DoublyDegenerate = 3,
}

/// One spectral point. `parity` is +1 or -1 when known, 0 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiPoint {
    pub x: f64,
    pub energy: f64,
    pub kind: RabiPointKind,
    pub multiplicity: u32,
    pub parity: i32,
}

/// Opaque spectrum handle.
pub struct RabiSpectrum {
    set: SpectrumSet,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn guard(f: impl FnOnce() -> Result<(), (RabiStatus, String)>) -> RabiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RabiStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RabiStatus::Panic
        }
    }
}

fn failed(e: impl ToString) -> (RabiStatus, String) {
    (RabiStatus::ComputationFailed, e.to_string())
}

fn bad(msg: &str) -> (RabiStatus, String) {
    (RabiStatus::InvalidArgument, msg.to_string())
}

fn null(name: &str) -> (RabiStatus, String) {
    (RabiStatus::NullPointer, format!("{name} is null"))
}

fn window(lo: f64, hi: f64) -> Result<SpectrumConfig, (RabiStatus, String)> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad("window must be finite with lo < hi"));
    }
    Ok(SpectrumConfig::new(lo, hi))
}

fn finite(vals: &[f64]) -> Result<(), (RabiStatus, String)> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(bad("parameters must be finite"))
    }
}

/// # Safety
/// `out` must be null or valid for writing one pointer.
unsafe fn publish(set: SpectrumSet, out: *mut *mut RabiSpectrum) {
    *out = Box::into_raw(Box::new(RabiSpectrum { set }));
}

/// Spectrum of `a†a + μσ_z + λσ_x(a + a†) + εσ_x` with `x = E + λ²` in `[x_lo, x_hi]`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rabi_spectrum_eps(
    lambda: f64,
    mu: f64,
    eps: f64,
    x_lo: f64,
    x_hi: f64,
    out: *mut *mut RabiSpectrum,
) -> RabiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        finite(&[lambda, mu, eps])?;
        let set = spectrum_model1(&Model1Base::new(lambda, mu, eps), &window(x_lo, x_hi)?).map_err(failed)?;
        publish(set, out);
        Ok(())
    })
}

/// Spectrum of `(ω + U/2 σ_z)a†a + ω₀/2 σ_z + gσ_x(a + a†)` with E in `[e_lo, e_hi]`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rabi_spectrum_nl(
    omega: f64,
    omega0: f64,
    g: f64,
    u: f64,
    e_lo: f64,
    e_hi: f64,
    out: *mut *mut RabiSpectrum,
) -> RabiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        finite(&[omega, omega0, g, u])?;
        let set = spectrum_model2(&Model2Base::new(omega, omega0, g, u), &window(e_lo, e_hi)?).map_err(failed)?;
        publish(set, out);
        Ok(())
    })
}

/// Number of distinct points.
///
/// # Safety
/// `spectrum` must come from this library; `len` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rabi_spectrum_len(spectrum: *const RabiSpectrum, len: *mut usize) -> RabiStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        *len = s.set.points.len();
        Ok(())
    })
}

/// Point `index` in order of increasing energy.
///
/// # Safety
/// `spectrum` must come from this library; `point` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rabi_spectrum_point(
    spectrum: *const RabiSpectrum,
    index: usize,
    point: *mut RabiPoint,
) -> RabiStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let point = point.as_mut().ok_or_else(|| null("point"))?;
        let p = s.set.points.get(index).ok_or_else(|| bad("index out of range"))?;
        *point = RabiPoint {
            x: p.x_value,
            energy: p.energy,
            kind: match p.kind {
                PointKind::Generic => RabiPointKind::Generic,
                PointKind::JuddianEntire => RabiPointKind::Juddian,
                PointKind::DegenerateSingle => RabiPointKind::Degenerate,
                PointKind::DoublyDegenerate => RabiPointKind::DoublyDegenerate,
            },
            multiplicity: p.multiplicity as u32,
            parity: p.parity.map(i32::from).unwrap_or(0),
        };
        Ok(())
    })
}

/// Number of diagnostics (skipped poles, failed evaluations) recorded during the scan.
///
/// # Safety
/// `spectrum` must come from this library; `len` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rabi_spectrum_diagnostic_count(spectrum: *const RabiSpectrum, len: *mut usize) -> RabiStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        *len = s.set.diagnostics.len();
        Ok(())
    })
}

/// Releases a spectrum handle; null is ignored.
///
/// # Safety
/// `spectrum` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rabi_spectrum_free(spectrum: *mut RabiSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Spectral function of the first model at `x`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rabi_wronskian_eps(x: f64, lambda: f64, mu: f64, eps: f64, out: *mut f64) -> RabiStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        finite(&[x, lambda, mu, eps])?;
        *out = wronskian_W(&Model1Params::new(x, lambda, mu, eps)).map_err(failed)?;
        Ok(())
    })
}

/// Spectral function of the second model at energy `e`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rabi_wronskian_nl(e: f64, omega: f64, omega0: f64, g: f64, u: f64, out: *mut f64) -> RabiStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        finite(&[e, omega, omega0, g, u])?;
        *out = wronskian_model2(&Model2Params::new(e, omega, omega0, g, u)).map_err(failed)?;
        Ok(())
    })
}

unsafe fn oracle_into(model: FockModel, n: usize, k: usize, out: *mut f64, capacity: usize) -> Result<(), (RabiStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    if capacity < k {
        return Err((RabiStatus::BufferTooSmall, format!("need {k} slots, got {capacity}")));
    }
    let op = build_hamiltonian(model, n).map_err(|e| (RabiStatus::InvalidArgument, e.to_string()))?;
    let ev = eigenvalues(&op, k).map_err(failed)?;
    std::slice::from_raw_parts_mut(out, k).copy_from_slice(&ev);
    Ok(())
}

/// Lowest `k` eigenvalues of the first model in a basis truncated at `n` photons.
///
/// # Safety
/// `out` must be valid for writing `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn rabi_oracle_eps(
    lambda: f64,
    mu: f64,
    eps: f64,
    n: usize,
    k: usize,
    out: *mut f64,
    capacity: usize,
) -> RabiStatus {
    guard(|| {
        finite(&[lambda, mu, eps])?;
        oracle_into(FockModel::RabiEps { lambda, mu, eps }, n, k, out, capacity)
    })
}

/// Lowest `k` eigenvalues of the second model in a basis truncated at `n` photons.
///
/// # Safety
/// `out` must be valid for writing `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn rabi_oracle_nl(
    omega: f64,
    omega0: f64,
    g: f64,
    u: f64,
    n: usize,
    k: usize,
    out: *mut f64,
    capacity: usize,
) -> RabiStatus {
    guard(|| {
        finite(&[omega, omega0, g, u])?;
        oracle_into(FockModel::NonlinearU { omega, omega0, g, u }, n, k, out, capacity)
    })
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `capacity`. Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for writing `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn rabi_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rabi_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
