//! C ABI for the noncommutative-oscillator engine: opaque system handles,
//! status codes, and scalar/array outputs through caller-provided pointers.
//!
//! Every function is panic-safe (panics are caught and reported as
//! [`NcoscStatus::InternalError`]) and touches no global state; handles may be
//! used from multiple threads as long as creation and destruction are not
//! concurrent with use.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ncosc::fockspace::{hamiltonian_direct, FockBasis};
use ncosc::ncspace::{effective_params, CouplingConvention, NCParams, OscParams};
use ncosc::spectrum::{diagonalize, energy_closed_form, level_splitting};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcoscStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter violated its domain (negative θ, non-positive mass, ...).
    InvalidArgument = 2,
    /// A numerical routine failed (eigensolver, truncation guard, ...).
    NumericalFailure = 3,
    /// The caller-provided buffer cannot hold the requested output.
    BufferTooSmall = 4,
    /// An internal invariant was violated.
    InternalError = 5,
}

/// Which constant multiplies the angular coupling κ(N_g − N_d).
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcoscConvention {
    /// c = 1, the bare closed form.
    Bare = 0,
    /// c = ħ, the convention matching the direct Hamiltonian.
    HbarScaled = 1,
}

impl From<NcoscConvention> for CouplingConvention {
    fn from(c: NcoscConvention) -> Self {
        match c {
            NcoscConvention::Bare => CouplingConvention::Bare,
            NcoscConvention::HbarScaled => CouplingConvention::HbarScaled,
        }
    }
}

/// Opaque handle: oscillator and noncommutativity parameters plus the
/// truncated basis. Create with `ncosc_system_new`, release with
/// `ncosc_system_free`.
pub struct NcoscSystem {
    osc: OscParams,
    nc: NCParams,
    basis: FockBasis,
}

fn guard<F: FnOnce() -> NcoscStatus>(f: F) -> NcoscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => NcoscStatus::InternalError,
    }
}

fn status_of(err: &ncosc::Error) -> NcoscStatus {
    match err {
        ncosc::Error::InvalidParameter(_) | ncosc::Error::Config(_) => {
            NcoscStatus::InvalidArgument
        }
        _ => NcoscStatus::NumericalFailure,
    }
}

/// Create a system handle.
///
/// On success `*out` owns the handle and must be released with
/// `ncosc_system_free`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ncosc_system_new(
    m: f64,
    omega: f64,
    theta: f64,
    theta_bar: f64,
    hbar: f64,
    n_max: usize,
    out: *mut *mut NcoscSystem,
) -> NcoscStatus {
    if out.is_null() {
        return NcoscStatus::NullPointer;
    }
    guard(|| {
        let osc = match OscParams::new(m, omega) {
            Ok(v) => v,
            Err(e) => return status_of(&e),
        };
        let nc = match NCParams::with_hbar(theta, theta_bar, hbar) {
            Ok(v) => v,
            Err(e) => return status_of(&e),
        };
        let basis = match FockBasis::new(n_max) {
            Ok(v) => v,
            Err(e) => return status_of(&e),
        };
        let handle = Box::new(NcoscSystem { osc, nc, basis });
        // SAFETY: `out` checked non-null above, caller guarantees writability.
        unsafe { out.write(Box::into_raw(handle)) };
        NcoscStatus::Ok
    })
}

/// Release a handle created by `ncosc_system_new`. Null is a no-op.
///
/// # Safety
/// `sys` must be null or a pointer previously returned by `ncosc_system_new`
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ncosc_system_free(sys: *mut NcoscSystem) {
    if !sys.is_null() {
        // SAFETY: per contract the pointer came from Box::into_raw.
        drop(unsafe { Box::from_raw(sys) });
    }
}

/// Effective parameters (M, Ω, κ) of the reduced oscillator.
///
/// # Safety
/// `sys` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncosc_effective_params(
    sys: *const NcoscSystem,
    mass_eff: *mut f64,
    omega_eff: *mut f64,
    kappa: *mut f64,
) -> NcoscStatus {
    if sys.is_null() || mass_eff.is_null() || omega_eff.is_null() || kappa.is_null() {
        return NcoscStatus::NullPointer;
    }
    guard(|| {
        // SAFETY: non-null checked; caller guarantees validity.
        let sys = unsafe { &*sys };
        let eff = effective_params(&sys.osc, &sys.nc);
        unsafe {
            mass_eff.write(eff.mass_eff);
            omega_eff.write(eff.omega_eff);
            kappa.write(eff.kappa);
        }
        NcoscStatus::Ok
    })
}

/// Closed-form energy E(n_g, n_d) = ħΩ(n_g + n_d + 1) − c·κ(n_g − n_d).
///
/// # Safety
/// `sys` must be a live handle; `out` must be valid for one f64 write.
#[no_mangle]
pub unsafe extern "C" fn ncosc_energy_closed_form(
    sys: *const NcoscSystem,
    n_g: usize,
    n_d: usize,
    convention: NcoscConvention,
    out: *mut f64,
) -> NcoscStatus {
    if sys.is_null() || out.is_null() {
        return NcoscStatus::NullPointer;
    }
    guard(|| {
        // SAFETY: non-null checked; caller guarantees validity.
        let sys = unsafe { &*sys };
        let e = energy_closed_form(n_g, n_d, &sys.osc, &sys.nc, convention.into());
        unsafe { out.write(e) };
        NcoscStatus::Ok
    })
}

/// Energy shift per unit of angular momentum (c·κ); adjacent sublevels of a
/// multiplet are spaced by twice this value.
///
/// # Safety
/// `sys` must be a live handle; `out` must be valid for one f64 write.
#[no_mangle]
pub unsafe extern "C" fn ncosc_level_splitting(
    sys: *const NcoscSystem,
    convention: NcoscConvention,
    out: *mut f64,
) -> NcoscStatus {
    if sys.is_null() || out.is_null() {
        return NcoscStatus::NullPointer;
    }
    guard(|| {
        // SAFETY: non-null checked; caller guarantees validity.
        let sys = unsafe { &*sys };
        match level_splitting(&sys.osc, &sys.nc, 1, convention.into()) {
            Ok(v) => {
                unsafe { out.write(v) };
                NcoscStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Lowest `n_levels` eigenvalues of the Bopp-shifted Hamiltonian over the
/// truncated basis, ascending. Writes at most `cap` values into `out` and
/// stores the count written in `written`.
///
/// # Safety
/// `sys` must be a live handle, `out` valid for `cap` f64 writes, and
/// `written` valid for one usize write.
#[no_mangle]
pub unsafe extern "C" fn ncosc_spectrum_numerical(
    sys: *const NcoscSystem,
    n_levels: usize,
    out: *mut f64,
    cap: usize,
    written: *mut usize,
) -> NcoscStatus {
    if sys.is_null() || out.is_null() || written.is_null() {
        return NcoscStatus::NullPointer;
    }
    if n_levels > cap {
        return NcoscStatus::BufferTooSmall;
    }
    guard(|| {
        // SAFETY: non-null checked; caller guarantees validity.
        let sys = unsafe { &*sys };
        if n_levels > sys.basis.dim() {
            return NcoscStatus::InvalidArgument;
        }
        let h = hamiltonian_direct(&sys.osc, &sys.nc, sys.basis);
        match diagonalize(&h) {
            Ok(evs) => {
                let count = n_levels.min(evs.len());
                for (k, e) in evs.iter().take(count).enumerate() {
                    // SAFETY: k < n_levels <= cap.
                    unsafe { out.add(k).write(*e) };
                }
                unsafe { written.write(count) };
                NcoscStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ncosc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
