use std::ffi::CStr;
use std::ptr;

use gkp_repeater_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        gkp_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn scalar_functions() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(gkp_flip_prob(0.3, &mut x), GkpStatus::Ok);
        assert!(x > 0.0 && x < 0.5);
        assert_eq!(gkp_error_likelihood(0.3, 0.0, &mut x), GkpStatus::Ok);
        assert!(x >= 0.0 && x < 0.5);
        assert_eq!(gkp_squeezing_db(0.5f64.sqrt() * 0.1, &mut x), GkpStatus::Ok);
        assert!((x - 20.0).abs() < 1e-9);
        assert_eq!(gkp_ad_key_rate(1.0, 0.0, 0.0, 0.0, &mut x), GkpStatus::Ok);
        assert_eq!(x, 1.0);
    }
    assert!(gkp_plob(109.0) > 0.01 && gkp_plob(110.0) < 0.01);
    assert_eq!(gkp_key_rate_from_flips(0.0, 0.0), 1.0);
}

#[test]
fn domain_errors_set_message() {
    let mut x = 0.0;
    let st = unsafe { gkp_flip_prob(-1.0, &mut x) };
    assert_eq!(st, GkpStatus::Domain);
    assert!(!last_error().is_empty());
    let msg = unsafe { CStr::from_ptr(gkp_status_message(st)) };
    assert_eq!(msg.to_str().unwrap(), "argument outside the valid domain");
}

#[test]
fn null_out_pointer_is_rejected() {
    assert_eq!(unsafe { gkp_flip_prob(0.3, ptr::null_mut()) }, GkpStatus::NullPointer);
}

#[test]
fn station_costs() {
    let (mut b, mut a) = (0, 0);
    assert_eq!(unsafe { gkp_station_cost(GkpCode::C4, &mut b, &mut a) }, GkpStatus::Ok);
    assert_eq!((b, a), (4, 68));
    assert_eq!(unsafe { gkp_station_cost(GkpCode::Steane7, &mut b, &mut a) }, GkpStatus::Ok);
    assert_eq!((b, a), (4, 311));
}

#[test]
fn analytic_distance_is_positive() {
    let mut d = 0.0;
    assert_eq!(unsafe { gkp_analytic_distance(0.98, 0.09, 0.01, &mut d) }, GkpStatus::Ok);
    assert!(d > 100.0 && d < 10_000.0);
}

#[test]
fn chain_handle_lifecycle() {
    let mut chain = ptr::null_mut();
    let st = unsafe { gkp_chain_new(0.98, 0.1, GkpScheme::C4, 2, 8, true, 60, &mut chain) };
    assert_eq!(st, GkpStatus::Ok);
    assert!(!chain.is_null());

    let (mut fx, mut fz) = (false, false);
    let (mut gx, mut gz) = (false, false);
    unsafe {
        assert_eq!(gkp_chain_trial(chain, 3, 17, &mut fx, &mut fz), GkpStatus::Ok);
        assert_eq!(gkp_chain_trial(chain, 3, 17, &mut gx, &mut gz), GkpStatus::Ok);
    }
    assert_eq!((fx, fz), (gx, gz));

    let mut est = GkpEstimate::default();
    let st = unsafe { gkp_chain_estimate(chain, 0.5, 1, 10_000, &mut est) };
    assert!(st == GkpStatus::Ok || st == GkpStatus::BudgetExceeded);
    assert!(est.trials >= 10 && est.trials <= 10_000);
    assert!((0.0..=1.0).contains(&est.p_err_x));
    unsafe { gkp_chain_free(chain) };
    unsafe { gkp_chain_free(ptr::null_mut()) };
}

#[test]
fn invalid_layout_is_a_domain_error() {
    let mut chain = ptr::null_mut();
    let st = unsafe { gkp_chain_new(0.98, 0.1, GkpScheme::C4, 3, 8, true, 60, &mut chain) };
    assert_eq!(st, GkpStatus::Domain);
    assert!(chain.is_null());
    assert!(last_error().contains("multiple"));
}

#[test]
fn budget_exhaustion_is_reported() {
    let mut chain = ptr::null_mut();
    unsafe {
        assert_eq!(gkp_chain_new(0.98, 0.08, GkpScheme::Steane7, 1, 1, true, 60, &mut chain), GkpStatus::Ok);
        let mut est = GkpEstimate::default();
        let st = gkp_chain_estimate(chain, 0.01, 1, 10, &mut est);
        assert_eq!(st, GkpStatus::BudgetExceeded);
        assert!(!est.converged);
        assert_eq!(est.trials, 10);
        gkp_chain_free(chain);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gkp_repeater.h")).unwrap();
    for f in ["gkp_chain_new", "gkp_chain_free", "gkp_chain_estimate", "gkp_plob", "GkpStatus", "GkpChain"] {
        assert!(h.contains(f), "{f} missing from header");
    }
}

/// The generated header must compile as C; skipped when no compiler is installed.
#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"gkp_repeater.h\"\nint main(void) { GkpChain *c = 0; return gkp_chain_new(0.98, 0.1, GkpScheme_C4, 2, 8, true, 60, &c) == GkpStatus_Ok; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output();
    match out {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler; skipped"),
    }
}
