use std::ffi::CStr;
use std::ptr;

use shearstab_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        ss_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn friedlander(alpha: f64) -> *mut SsEquilibrium {
    let mut eq = ptr::null_mut();
    let st = unsafe { ss_equilibrium_friedlander(SsShearKind::Tanh, 5.0, alpha, &mut eq) };
    assert_eq!(st, SsStatus::Ok);
    assert!(!eq.is_null());
    eq
}

#[test]
fn alpha_out_of_range_sets_code_and_message() {
    let mut eq = ptr::null_mut();
    let st = unsafe { ss_equilibrium_friedlander(SsShearKind::Tanh, 5.0, 0.4, &mut eq) };
    assert_eq!(st, SsStatus::AlphaOutOfRange);
    assert!(eq.is_null());
    assert!(last_error().contains("AlphaOutOfRange"), "{}", last_error());
}

#[test]
fn null_handles_are_rejected() {
    let (mut a, mut b) = (0.0, 0.0);
    let mut ok = false;
    assert_eq!(unsafe { ss_miles_howard(ptr::null(), &mut a, &mut b, &mut ok) }, SsStatus::NullPointer);
    assert_eq!(unsafe { ss_simulation_step(ptr::null_mut(), 0.01, 1) }, SsStatus::NullPointer);
    assert_eq!(unsafe { ss_mode_len(ptr::null()) }, 0);
    unsafe {
        ss_equilibrium_free(ptr::null_mut());
        ss_mode_free(ptr::null_mut());
        ss_simulation_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_and_reports_length() {
    let mut eq = ptr::null_mut();
    unsafe { ss_equilibrium_friedlander(SsShearKind::Tanh, -1.0, 0.9, &mut eq) };
    let full = unsafe { ss_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 8);
    let mut buf = [1 as std::ffi::c_char; 5];
    let n = unsafe { ss_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full);
    assert_eq!(buf[4], 0);
}

#[test]
fn richardson_and_winding() {
    let eq = friedlander(0.97);
    let (mut min_ri, mut z) = (0.0, 0.0);
    let mut ok = true;
    assert_eq!(unsafe { ss_miles_howard(eq, &mut min_ri, &mut z, &mut ok) }, SsStatus::Ok);
    assert!(min_ri < 0.25 && !ok);
    unsafe { ss_equilibrium_free(eq) };

    let mut w = -1;
    assert_eq!(unsafe { ss_nyquist_winding(5.0, 1e-2, 0.0, &mut w) }, SsStatus::Ok);
    assert_eq!(w, 1);
    assert_eq!(unsafe { ss_nyquist_winding(1.0, 1e-2, 0.0, &mut w) }, SsStatus::Ok);
    assert_eq!(w, 0);
}

#[test]
fn mode_and_simulation_round_trip() {
    let eq = friedlander(0.97);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { ss_top_zero(eq, 0.0, 0.05, 1e-12, &mut re, &mut im) }, SsStatus::Ok);
    assert!((im - 0.6667191151).abs() < 1e-8, "{im}");

    let (mut fr, mut fi) = (1.0, 1.0);
    assert_eq!(unsafe { ss_dispersion_eval(eq, 0.0, re, im, &mut fr, &mut fi) }, SsStatus::Ok);
    assert!(fr.hypot(fi) < 1e-10);
    assert_eq!(unsafe { ss_dispersion_eval(eq, 0.0, 0.0, -0.1, &mut fr, &mut fi) }, SsStatus::InvalidArgument);

    let mut mode = ptr::null_mut();
    assert_eq!(unsafe { ss_mode_new(eq, 1, 0.0, re, im, 256, &mut mode) }, SsStatus::Ok);
    let n = unsafe { ss_mode_len(mode) };
    assert_eq!(n, 256);
    let (mut z, mut pr, mut pi) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    assert_eq!(
        unsafe { ss_mode_phi(mode, z.as_mut_ptr(), pr.as_mut_ptr(), pi.as_mut_ptr(), n - 1) },
        SsStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { ss_mode_phi(mode, z.as_mut_ptr(), pr.as_mut_ptr(), pi.as_mut_ptr(), n) },
        SsStatus::Ok
    );
    let sup = pr.iter().zip(&pi).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    assert!((sup - 1.0).abs() < 1e-12);

    let (mut eqn, mut walls) = (1.0, 1.0);
    assert_eq!(unsafe { ss_mode_residual(mode, eq, &mut eqn, &mut walls) }, SsStatus::Ok);
    assert!(eqn < 1e-4 && walls < 1e-8, "{eqn} {walls}");

    let mut not_zero = ptr::null_mut();
    assert_eq!(unsafe { ss_mode_new(eq, 1, 0.0, 0.3, 0.3, 256, &mut not_zero) }, SsStatus::NotAZero);

    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { ss_simulation_new(eq, mode, 1e-4, 8, 1.0, &mut sim) }, SsStatus::Ok);
    let (mut t, mut d0, mut d1) = (0.0, 0.0, 0.0);
    unsafe { ss_simulation_state(sim, &mut t, &mut d0) };
    assert!((d0 - 1e-4).abs() < 1e-12 && t == 0.0);
    assert_eq!(unsafe { ss_simulation_step(sim, 0.01, 100) }, SsStatus::Ok);
    unsafe { ss_simulation_state(sim, &mut t, &mut d1) };
    assert!((t - 1.0).abs() < 1e-12);
    // hydrostatic growth over unit time
    assert!((d1 / d0).ln() > 0.5 * im, "{}", (d1 / d0).ln());
    assert_eq!(unsafe { ss_simulation_step(sim, 10.0, 1) }, SsStatus::CflViolation);

    unsafe {
        ss_simulation_free(sim);
        ss_mode_free(mode);
        ss_equilibrium_free(eq);
    }
}
