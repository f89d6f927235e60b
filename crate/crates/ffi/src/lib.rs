//! C interface to the `qscramble` simulator.
//!
//! Every fallible function returns a [`QsStatus`]; results are written through
//! out-pointers. After a non-OK status, [`qs_last_error_message`] describes the
//! failure on the calling thread. Panics are caught at the boundary and
//! reported as [`QsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;
use num_complex::Complex64 as C64;
use qscramble::floquet::{self, Boundary, FloquetSpec};
use qscramble::hpr::{self, HprLayout};
use qscramble::noise::{self, DepolarizingF, NoiseModel};
use qscramble::otoc;
use qscramble::statevector::{PauliString, QuantumState};
use qscramble::tpq::{self, HeisenbergSpec};
use qscramble::Error;

#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    Degenerate = 4,
    Singular = 5,
    Unnormalizable = 6,
    Io = 7,
    Panic = 8,
}

#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsBoundary {
    Open = 0,
    Periodic = 1,
}

/// Kicked-Ising parameters. Angles are J·T, B_X·T and B_Z·T.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QsFloquetParams {
    pub n_sites: usize,
    pub jt: f64,
    pub bxt: f64,
    pub bzt: f64,
    pub boundary: QsBoundary,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QsComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque statevector handle.
pub struct QsState {
    inner: QuantumState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QsStatus {
    match e {
        Error::Capacity(_) => QsStatus::Capacity,
        Error::Argument(_) | Error::Config(_) => QsStatus::InvalidArgument,
        Error::Degenerate { .. } => QsStatus::Degenerate,
        Error::SingularMitigation { .. } => QsStatus::Singular,
        Error::Unnormalizable { .. } => QsStatus::Unnormalizable,
        Error::Io(_) => QsStatus::Io,
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

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QsStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            QsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            QsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    *deref_mut(p, what)? = v;
    Ok(())
}

unsafe fn spec(p: *const QsFloquetParams) -> Result<FloquetSpec, Fail> {
    let p = deref(p, "params")?;
    let b = match p.boundary {
        QsBoundary::Open => Boundary::Open,
        QsBoundary::Periodic => Boundary::Periodic,
    };
    Ok(FloquetSpec::new(p.n_sites, p.jt, p.bxt, p.bzt, b)?)
}

unsafe fn pauli(s: *const c_char, what: &'static str) -> Result<PauliString, Fail> {
    if s.is_null() {
        return Err(Fail::Null(what));
    }
    let text = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Error::Argument(format!("{what} is not UTF-8")))?;
    Ok(PauliString::parse_sites(text)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failing call on this thread (empty after success).
///
/// The pointer stays valid until the next `qs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Allocates |0...0> on `n_qubits` qubits.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qs_state_new_zero(n_qubits: usize, out: *mut *mut QsState) -> QsStatus {
    guard(|| {
        let s = QuantumState::zero(n_qubits)?;
        write(out, Box::into_raw(Box::new(QsState { inner: s })), "out")
    })
}

/// Allocates a state from `len` amplitudes; `len` must be a power of two.
///
/// # Safety
/// `amps` must point to `len` readable values and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn qs_state_from_amplitudes(
    amps: *const QsComplex,
    len: usize,
    out: *mut *mut QsState,
) -> QsStatus {
    guard(|| {
        if amps.is_null() {
            return Err(Fail::Null("amps"));
        }
        let v: Vec<C64> = std::slice::from_raw_parts(amps, len)
            .iter()
            .map(|c| C64::new(c.re, c.im))
            .collect();
        let s = QuantumState::from_amplitudes(v)?;
        write(out, Box::into_raw(Box::new(QsState { inner: s })), "out")
    })
}

/// Releases a state. Null is ignored.
///
/// # Safety
/// `state` must come from a `qs_state_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qs_state_free(state: *mut QsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qs_state_n_qubits(state: *const QsState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.n_qubits())
}

/// Copies the 2^n amplitudes into `out`, which must hold exactly `len` entries.
///
/// # Safety
/// `state` must be a live handle and `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn qs_state_copy_amplitudes(
    state: *const QsState,
    out: *mut QsComplex,
    len: usize,
) -> QsStatus {
    guard(|| {
        let s = deref(state, "state")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        if len != s.inner.dim() {
            return Err(Error::Argument(format!("buffer holds {len} amplitudes, state has {}", s.inner.dim())).into());
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, a) in dst.iter_mut().zip(s.inner.amplitudes()) {
            *d = QsComplex { re: a.re, im: a.im };
        }
        Ok(())
    })
}

/// Applies `cycles` Floquet cycles (complex-conjugated gates when `conjugated`)
/// to qubits `offset..offset + n_sites` of the state.
///
/// # Safety
/// `state` and `params` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_state_floquet_evolve(
    state: *mut QsState,
    params: *const QsFloquetParams,
    cycles: usize,
    conjugated: bool,
    offset: usize,
) -> QsStatus {
    guard(|| {
        let sp = spec(params)?;
        let s = deref_mut(state, "state")?;
        Ok(floquet::evolve(&mut s.inner, &sp, cycles, conjugated, offset)?)
    })
}

/// Applies the inverse of `cycles` Floquet cycles.
///
/// # Safety
/// `state` and `params` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_state_floquet_evolve_inverse(
    state: *mut QsState,
    params: *const QsFloquetParams,
    cycles: usize,
    offset: usize,
) -> QsStatus {
    guard(|| {
        let sp = spec(params)?;
        let s = deref_mut(state, "state")?;
        Ok(floquet::evolve_inverse(&mut s.inner, &sp, cycles, offset)?)
    })
}

/// Exact P_EPR and F_EPR of the recovery protocol after `cycles` cycles.
///
/// # Safety
/// `params`, `p_epr` and `f_epr` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_hpr_exact(
    params: *const QsFloquetParams,
    n_a: usize,
    n_d: usize,
    cycles: usize,
    p_epr: *mut f64,
    f_epr: *mut f64,
) -> QsStatus {
    guard(|| {
        let sp = spec(params)?;
        let layout = HprLayout::new(sp.n_sites, n_a, n_d)?;
        let r = hpr::run_exact(&sp, &layout, cycles)?;
        let f = r.f_epr.ok_or(Error::Degenerate { probability: r.p_epr })?;
        write(p_epr, r.p_epr, "p_epr")?;
        write(f_epr, f, "f_epr")
    })
}

/// Haar-random (P_EPR, F_EPR) for subsystem dimensions d_A and d_D.
///
/// # Safety
/// `p_epr` and `f_epr` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_haar_baseline(d_a: u64, d_d: u64, p_epr: *mut f64, f_epr: *mut f64) -> QsStatus {
    guard(|| {
        let (p, f) = hpr::haar_baseline(d_a, d_d)?;
        write(p_epr, p, "p_epr")?;
        write(f_epr, f, "f_epr")
    })
}

/// Two-qubit gates of `cycles` cycles in the backward cone of the 1-based `seed_sites`.
///
/// # Safety
/// `params` and `out` must be valid; `seed_sites` must point to `n_seed` values.
#[no_mangle]
pub unsafe extern "C" fn qs_lightcone_count(
    params: *const QsFloquetParams,
    cycles: usize,
    seed_sites: *const usize,
    n_seed: usize,
    out: *mut usize,
) -> QsStatus {
    guard(|| {
        let sp = spec(params)?;
        if seed_sites.is_null() {
            return Err(Fail::Null("seed_sites"));
        }
        let seeds = std::slice::from_raw_parts(seed_sites, n_seed);
        write(out, floquet::lightcone_count(&sp, cycles, seeds)?, "out")
    })
}

/// Exact OTOC on |0...0> for Pauli strings such as "Z1" and "X5" (1-based sites).
///
/// # Safety
/// `params` and `out` must be valid; `o_a` and `o_d` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn qs_otoc(
    params: *const QsFloquetParams,
    cycles: usize,
    o_a: *const c_char,
    o_d: *const c_char,
    out: *mut QsComplex,
) -> QsStatus {
    guard(|| {
        let sp = spec(params)?;
        let (a, d) = (pauli(o_a, "o_a")?, pauli(o_d, "o_d")?);
        let input = QuantumState::zero(sp.n_sites)?;
        let v = otoc::otoc_exact(&sp, cycles, &a, &d, &input)?;
        write(out, QsComplex { re: v.re, im: v.im }, "out")
    })
}

/// Global depolarizing fidelity f after `n_2q` entangling gates of angle `theta`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_depolarizing_f(
    p: f64,
    p_a: f64,
    p_b: f64,
    theta: f64,
    n_2q: u64,
    out: *mut f64,
) -> QsStatus {
    guard(|| {
        let model = NoiseModel::new("ffi", p, p_a, p_b)?;
        write(out, noise::depolarizing_f(&model, theta, n_2q).value(), "out")
    })
}

/// Inverts the depolarizing model for measured P_EPR and F_EPR.
///
/// # Safety
/// `p_mit` and `f_mit` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_mitigate_hpr(
    p_noisy: f64,
    f_noisy: f64,
    f: f64,
    d_a: f64,
    d_d: f64,
    p_mit: *mut f64,
    f_mit: *mut f64,
) -> QsStatus {
    guard(|| {
        let m = noise::mitigate_hpr(p_noisy, f_noisy, DepolarizingF::new(f)?, d_a, d_d)?;
        write(p_mit, m.p, "p_mit")?;
        write(f_mit, m.f, "f_mit")
    })
}

/// Infinite-temperature energy and variance of the Heisenberg ring.
///
/// # Safety
/// `e_inf` and `variance` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qs_xxx_moments(n_sites: usize, coupling: f64, e_inf: *mut f64, variance: *mut f64) -> QsStatus {
    guard(|| {
        let (e, v) = tpq::xxx_moments(&HeisenbergSpec::new(n_sites, coupling)?)?;
        write(e_inf, e, "e_inf")?;
        write(variance, v, "variance")
    })
}
