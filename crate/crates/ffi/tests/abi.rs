use std::ffi::CStr;
use std::ptr;

use linflow_ffi::*;

fn generator(rows: &[f64], d: usize) -> *mut LinflowGenerator {
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { linflow_generator_new(rows.as_ptr(), d, &mut g) },
        LinflowStatus::Ok
    );
    assert!(!g.is_null());
    g
}

#[test]
fn conjugacy_round_trip_through_handles() {
    // J_2(1) against the identity: holder-equivalent, not smooth
    let a = generator(&[1.0, 1.0, 0.0, 1.0], 2);
    let b = generator(&[1.0, 0.0, 0.0, 1.0], 2);
    unsafe {
        let mut h = ptr::null_mut();
        let mut alpha = 0.0;
        assert_eq!(linflow_conjugacy_build(a, b, &mut h, &mut alpha), LinflowStatus::Ok);
        assert_eq!(alpha, 1.0);
        assert_eq!(linflow_map_dim(h), 2);

        // h(e^{tA}x) = e^{tB}h(x)
        let x = [0.3, -0.2];
        let (mut fx, mut hfx, mut hx, mut ghx) = ([0.0; 2], [0.0; 2], [0.0; 2], [0.0; 2]);
        assert_eq!(
            linflow_flow_apply(a, 0.7, x.as_ptr(), fx.as_mut_ptr()),
            LinflowStatus::Ok
        );
        assert_eq!(
            linflow_map_apply(h, false, fx.as_ptr(), hfx.as_mut_ptr()),
            LinflowStatus::Ok
        );
        assert_eq!(
            linflow_map_apply(h, false, x.as_ptr(), hx.as_mut_ptr()),
            LinflowStatus::Ok
        );
        assert_eq!(
            linflow_flow_apply(b, 0.7, hx.as_ptr(), ghx.as_mut_ptr()),
            LinflowStatus::Ok
        );
        for i in 0..2 {
            assert!((hfx[i] - ghx[i]).abs() < 1e-10, "{hfx:?} vs {ghx:?}");
        }

        let mut back = [0.0; 2];
        assert_eq!(
            linflow_map_apply(h, true, hx.as_ptr(), back.as_mut_ptr()),
            LinflowStatus::Ok
        );
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);

        let mut json = ptr::null_mut();
        assert_eq!(linflow_map_to_json(h, &mut json), LinflowStatus::Ok);
        let s = CStr::from_ptr(json).to_str().unwrap().to_owned();
        linflow_string_free(json);
        assert!(s.contains("\"kind\""));

        linflow_map_free(h);
        linflow_generator_free(a);
        linflow_generator_free(b);
    }
}

#[test]
fn inequivalent_flows_report_status() {
    let a = generator(&[-1.0, 0.0, 0.0, 1.0], 2);
    let b = generator(&[1.0, 0.0, 0.0, 1.0], 2);
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            linflow_conjugacy_build(a, b, &mut h, ptr::null_mut()),
            LinflowStatus::NotEquivalent
        );
        assert!(h.is_null());
        assert!(!linflow_last_error().is_null());
        linflow_generator_free(a);
        linflow_generator_free(b);
    }
}

#[test]
fn cross_ratio_and_beta() {
    let a = generator(&diag(&[1.0, 1.0, 2.0, 2.0, 4.0]), 5);
    let b = generator(&diag(&[1.0; 5]), 5);
    unsafe {
        let mut rho = 0.0;
        assert_eq!(linflow_cross_ratio(a, b, &mut rho), LinflowStatus::Ok);
        assert!((rho - 0.25).abs() < 1e-12);
        let mut v = LinflowVerdict::default();
        assert_eq!(
            linflow_decide(a, b, LinflowLevel::BetaMinus, 0.5, &mut v),
            LinflowStatus::Ok
        );
        assert!(v.equivalent && v.conclusive);
        assert_eq!(
            linflow_decide(a, b, LinflowLevel::BetaMinus, 0.6, &mut v),
            LinflowStatus::Ok
        );
        assert!(!v.equivalent);
        linflow_generator_free(a);
        linflow_generator_free(b);
    }
}

#[test]
fn complex_generator_and_period() {
    // [2i] realified is a rotation with period π
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(
            linflow_generator_new_complex([0.0, 2.0].as_ptr(), 1, &mut g),
            LinflowStatus::Ok
        );
        assert_eq!(linflow_generator_dim(g), 2);
        let mut t = 0.0;
        assert_eq!(
            linflow_minimal_period(g, [1.0, 0.0].as_ptr(), &mut t),
            LinflowStatus::Ok
        );
        assert!((t - std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(
            linflow_minimal_period(g, [0.0, 0.0].as_ptr(), &mut t),
            LinflowStatus::Ok
        );
        assert_eq!(t, 0.0);
        linflow_generator_free(g);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/linflow.h")).unwrap();
    for f in [
        "linflow_last_error",
        "linflow_version",
        "linflow_generator_new",
        "linflow_generator_new_complex",
        "linflow_generator_free",
        "linflow_flow_apply",
        "linflow_decide",
        "linflow_cross_ratio",
        "linflow_minimal_period",
        "linflow_conjugacy_build",
        "linflow_map_apply",
        "linflow_map_to_json",
        "linflow_map_free",
        "linflow_string_free",
        "LINFLOW_STATUS_NOT_EQUIVALENT",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let v = unsafe { CStr::from_ptr(linflow_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn diag(v: &[f64]) -> Vec<f64> {
    let d = v.len();
    let mut m = vec![0.0; d * d];
    for (i, x) in v.iter().enumerate() {
        m[i * d + i] = *x;
    }
    m
}
