use std::ffi::{c_char, CString};
use std::ptr;

use fade_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { fade_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn exponents_round_trip() {
    let mut e = FadeExponents::default();
    assert_eq!(unsafe { fade_exponents(0.5, 3, &mut e) }, FadeStatus::Ok);
    assert_eq!(e.d, 3);
    assert!((e.m_c - 1.0 / 3.0).abs() < 1e-15);
    assert!((e.m_star + 1.0).abs() < 1e-15);
    // q_* = 2d(1-m) / (2(2-m) + d(1-m)) = 3 / 4.5
    assert!((e.q_star - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn invalid_exponent_sets_message() {
    let mut e = FadeExponents::default();
    assert_eq!(unsafe { fade_exponents(1.5, 3, &mut e) }, FadeStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn null_out_pointer_is_reported() {
    assert_eq!(unsafe { fade_exponents(0.5, 3, ptr::null_mut()) }, FadeStatus::NullPointer);
    assert!(last_error().contains("null"));
    assert_eq!(unsafe { fade_simulation_run(ptr::null_mut()) }, FadeStatus::NullPointer);
    assert_eq!(unsafe { fade_simulation_report_count(ptr::null()) }, 0);
    unsafe { fade_simulation_free(ptr::null_mut()) };
}

#[test]
fn error_message_truncates() {
    assert_eq!(unsafe { fade_hardy_constant(-0.5, 3, &mut 0.0) }, FadeStatus::InvalidArgument);
    let mut small = [1 as c_char; 4];
    let full = unsafe { fade_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(full > 3);
    assert_eq!(small[3], 0);
}

#[test]
fn closed_forms() {
    let mut v = 0.0;
    assert_eq!(unsafe { fade_barenblatt_profile(0.5, 3, 1.0, 2.0, &mut v) }, FadeStatus::Ok);
    // (1 + 0.5 * 4)^{-2}
    assert!((v - 1.0 / 9.0).abs() < 1e-15);
    assert_eq!(unsafe { fade_barenblatt_profile(0.5, 3, -1.0, 2.0, &mut v) }, FadeStatus::InvalidArgument);

    assert_eq!(unsafe { fade_hardy_constant(0.0, 3, &mut v) }, FadeStatus::Ok);
    assert!((v - 4.0).abs() < 1e-15);

    assert_eq!(unsafe { fade_exact_gap_subcritical(0.2, 5, &mut v) }, FadeStatus::Ok);
    assert_eq!(v, 8.0);
    assert_eq!(unsafe { fade_exact_gap_subcritical(0.5, 3, &mut v) }, FadeStatus::InvalidArgument);

    assert_eq!(unsafe { fade_predicted_lambda(0.2, 5, &mut v) }, FadeStatus::Ok);
    assert!((v - 0.2 / 8.0).abs() < 1e-15);
}

#[test]
fn simulation_handle_lifecycle() {
    let text = CString::new(
        "[model]\nm = 0.5\nd = 3\n[grid]\nintervals = 256\n[initial]\nkind = equilibrium\n[solver]\nt_end = 1.0\ndt = 0.1\n",
    )
    .unwrap();
    let mut sim: *mut FadeSimulation = ptr::null_mut();
    assert_eq!(unsafe { fade_simulation_new(text.as_ptr(), &mut sim) }, FadeStatus::Ok);
    assert!(!sim.is_null());
    assert_eq!(unsafe { fade_simulation_report_count(sim) }, 0);
    let mut rep = FadeReport::default();
    assert_eq!(unsafe { fade_simulation_report(sim, 0, &mut rep) }, FadeStatus::InvalidArgument);

    assert_eq!(unsafe { fade_simulation_run(sim) }, FadeStatus::Ok, "{}", last_error());
    let n = unsafe { fade_simulation_report_count(sim) };
    assert!(n >= 2);
    assert_eq!(unsafe { fade_simulation_report(sim, n - 1, &mut rep) }, FadeStatus::Ok);
    assert!((rep.t - 1.0).abs() < 1e-9);
    assert_eq!(rep.entropy, 0.0);
    assert_eq!(unsafe { fade_simulation_report(sim, n, &mut rep) }, FadeStatus::InvalidArgument);
    unsafe { fade_simulation_free(sim) };
}

#[test]
fn bad_config_reports_line() {
    let text = CString::new("[model]\nm = 0.5\nbogus = 1\n").unwrap();
    let mut sim: *mut FadeSimulation = ptr::null_mut();
    assert_eq!(unsafe { fade_simulation_new(text.as_ptr(), &mut sim) }, FadeStatus::ConfigError);
    assert!(sim.is_null());
    assert!(last_error().contains('3'), "{}", last_error());
}

#[test]
fn verify_small_run_passes() {
    let text = CString::new("[verify]\nsamples = 6\n").unwrap();
    assert_eq!(unsafe { fade_verify(text.as_ptr(), 11) }, FadeStatus::Ok, "{}", last_error());
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fade.h")).unwrap();
    for name in [
        "fade_last_error_message",
        "fade_exponents",
        "fade_barenblatt_profile",
        "fade_exact_gap_subcritical",
        "fade_hardy_constant",
        "fade_predicted_lambda",
        "fade_simulation_new",
        "fade_simulation_run",
        "fade_simulation_report_count",
        "fade_simulation_report",
        "fade_simulation_free",
        "fade_verify",
        "typedef struct FadeSimulation FadeSimulation",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
