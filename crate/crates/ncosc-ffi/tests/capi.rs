//! Exercises the C ABI from Rust: handle lifecycle, status codes, and value
//! agreement with the underlying library.

use std::ptr;

use ncosc_ffi::*;

fn new_system(theta: f64, theta_bar: f64, hbar: f64, n_max: usize) -> *mut NcoscSystem {
    let mut sys: *mut NcoscSystem = ptr::null_mut();
    let status =
        unsafe { ncosc_system_new(1.0, 1.0, theta, theta_bar, hbar, n_max, &mut sys) };
    assert_eq!(status, NcoscStatus::Ok);
    assert!(!sys.is_null());
    sys
}

#[test]
fn lifecycle_and_effective_params() {
    let sys = new_system(0.1, 0.1, 1.0, 10);
    let (mut m, mut w, mut k) = (0.0, 0.0, 0.0);
    let status = unsafe { ncosc_effective_params(sys, &mut m, &mut w, &mut k) };
    assert_eq!(status, NcoscStatus::Ok);
    assert!((m - 1.0 / 1.0025).abs() < 1e-12);
    assert!((w - 1.0025).abs() < 1e-12);
    assert!((k - 0.1).abs() < 1e-12);
    unsafe { ncosc_system_free(sys) };
    unsafe { ncosc_system_free(ptr::null_mut()) }; // null is a no-op
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut sys: *mut NcoscSystem = ptr::null_mut();
    let status = unsafe { ncosc_system_new(-1.0, 1.0, 0.1, 0.1, 1.0, 10, &mut sys) };
    assert_eq!(status, NcoscStatus::InvalidArgument);
    let status = unsafe { ncosc_system_new(1.0, 1.0, -0.1, 0.1, 1.0, 10, &mut sys) };
    assert_eq!(status, NcoscStatus::InvalidArgument);
    let status = unsafe { ncosc_system_new(1.0, 1.0, 0.1, 0.1, 1.0, 1, &mut sys) };
    assert_eq!(status, NcoscStatus::InvalidArgument);
    let status =
        unsafe { ncosc_system_new(1.0, 1.0, 0.1, 0.1, 1.0, 10, ptr::null_mut()) };
    assert_eq!(status, NcoscStatus::NullPointer);
}

#[test]
fn closed_form_energy_values() {
    let sys = new_system(0.1, 0.1, 1.0, 10);
    let mut e = 0.0;
    let status = unsafe {
        ncosc_energy_closed_form(sys, 1, 0, NcoscConvention::HbarScaled, &mut e)
    };
    assert_eq!(status, NcoscStatus::Ok);
    assert!((e - 1.905).abs() < 1e-12, "{e}");
    let status =
        unsafe { ncosc_energy_closed_form(sys, 0, 0, NcoscConvention::Bare, &mut e) };
    assert_eq!(status, NcoscStatus::Ok);
    assert!((e - 1.0025).abs() < 1e-12, "{e}");
    let mut split = 0.0;
    let status =
        unsafe { ncosc_level_splitting(sys, NcoscConvention::HbarScaled, &mut split) };
    assert_eq!(status, NcoscStatus::Ok);
    assert!((split - 0.1).abs() < 1e-12);
    unsafe { ncosc_system_free(sys) };
}

#[test]
fn numerical_spectrum_matches_closed_form() {
    let sys = new_system(0.1, 0.1, 1.0, 12);
    let mut evs = [0.0f64; 6];
    let mut written = 0usize;
    let status = unsafe {
        ncosc_spectrum_numerical(sys, 6, evs.as_mut_ptr(), evs.len(), &mut written)
    };
    assert_eq!(status, NcoscStatus::Ok);
    assert_eq!(written, 6);
    for (k, (n_g, n_d)) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        .into_iter()
        .enumerate()
    {
        let mut want = 0.0;
        let status = unsafe {
            ncosc_energy_closed_form(sys, n_g, n_d, NcoscConvention::HbarScaled, &mut want)
        };
        assert_eq!(status, NcoscStatus::Ok);
        let rel = (evs[k] - want).abs() / want;
        assert!(rel < 1e-6, "level {k}: {} vs {want}", evs[k]);
    }
    // capacity contract
    let status = unsafe {
        ncosc_spectrum_numerical(sys, 6, evs.as_mut_ptr(), 3, &mut written)
    };
    assert_eq!(status, NcoscStatus::BufferTooSmall);
    unsafe { ncosc_system_free(sys) };
}

#[test]
fn version_string_is_static_and_terminated() {
    let ptr = ncosc_version();
    assert!(!ptr.is_null());
    let s = unsafe { std::ffi::CStr::from_ptr(ptr) };
    assert_eq!(s.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
