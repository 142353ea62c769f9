use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use shcgm_ffi::*;

fn last_error() -> String {
    let p = shcgm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> Result<*mut ShcgmConfig, (ShcgmStatus, String)> {
    let c = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    match unsafe { shcgm_config_parse(c.as_ptr(), &mut cfg) } {
        ShcgmStatus::Ok => Ok(cfg),
        s => {
            assert!(cfg.is_null());
            Err((s, last_error()))
        }
    }
}

#[test]
fn run_round_trip() {
    let cfg = parse("problem = analytic1d\niterations = 50\ntrace_stride = 10\n").unwrap();
    unsafe {
        assert_eq!(shcgm_config_set_seed(cfg, 3), ShcgmStatus::Ok);
        assert!(shcgm_last_error().is_null());
        let mut run = ptr::null_mut();
        assert_eq!(shcgm_run(cfg, &mut run), ShcgmStatus::Ok);
        assert_eq!(shcgm_run_trace_len(run), 6);
        let mut rec = ShcgmRecord::default();
        assert_eq!(shcgm_run_record(run, 5, &mut rec), ShcgmStatus::Ok);
        assert_eq!(rec.k, 50);
        assert!(rec.residual.is_finite());
        assert!(rec.estimator_mse.is_finite());
        assert_eq!(shcgm_run_record(run, 6, &mut rec), ShcgmStatus::OutOfRange);
        assert!(last_error().contains("record 6"));

        let n = shcgm_run_solution_len(run);
        assert_eq!(n, 1);
        let mut x = vec![f64::NAN; n];
        assert_eq!(shcgm_run_solution(run, x.as_mut_ptr(), n), ShcgmStatus::Ok);
        assert!((0.0..=1.0).contains(&x[0]));
        assert_eq!(shcgm_run_solution(run, x.as_mut_ptr(), 0), ShcgmStatus::OutOfRange);
        shcgm_run_free(run);
        shcgm_config_free(cfg);
    }
}

#[test]
fn runs_match_across_calls() {
    let cfg = parse("problem = covariance\nn = 12\nblocks = 2\niterations = 40\n").unwrap();
    let solve = || unsafe {
        let mut run = ptr::null_mut();
        assert_eq!(shcgm_run(cfg, &mut run), ShcgmStatus::Ok);
        let mut x = vec![0.0; shcgm_run_solution_len(run)];
        assert_eq!(shcgm_run_solution(run, x.as_mut_ptr(), x.len()), ShcgmStatus::Ok);
        shcgm_run_free(run);
        x
    };
    assert_eq!(solve(), solve());
    unsafe { shcgm_config_free(cfg) };
}

#[test]
fn errors_map_to_status_codes() {
    assert_eq!(parse("problem = nowhere\n").unwrap_err().0, ShcgmStatus::Config);
    let (status, msg) = parse("problem = analytic1d\nbogus = 1\n").unwrap_err();
    assert_eq!(status, ShcgmStatus::Parse);
    assert!(msg.contains("line 2"), "{msg}");
    assert_eq!(
        parse("problem = analytic1d\nbeta0 = 0\n").unwrap_err().0,
        ShcgmStatus::InvalidParameter
    );
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(shcgm_config_parse(ptr::null(), &mut cfg), ShcgmStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(shcgm_config_parse(bad.as_ptr().cast(), &mut cfg), ShcgmStatus::InvalidUtf8);
        assert_eq!(shcgm_run(ptr::null(), &mut ptr::null_mut()), ShcgmStatus::NullPointer);
        assert_eq!(shcgm_run_trace_len(ptr::null()), 0);
        shcgm_run_free(ptr::null_mut());
        shcgm_config_free(ptr::null_mut());
    }
}

#[test]
fn serialized_config_reparses() {
    let cfg = parse("problem = l1_quadratic\ndim = 4\n").unwrap();
    unsafe {
        assert_eq!(shcgm_config_set_iterations(cfg, 77), ShcgmStatus::Ok);
        let mut needed = 0;
        assert_eq!(
            shcgm_config_serialize(cfg, ptr::null_mut(), 0, &mut needed),
            ShcgmStatus::OutOfRange
        );
        let mut buf = vec![0 as std::ffi::c_char; needed + 1];
        assert_eq!(
            shcgm_config_serialize(cfg, buf.as_mut_ptr(), buf.len(), ptr::null_mut()),
            ShcgmStatus::Ok
        );
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string();
        assert!(text.contains("iterations = 77"));
        let again = parse(&text).unwrap();
        shcgm_config_free(again);
        shcgm_config_free(cfg);
    }
}

#[test]
fn csv_runs_write_their_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let cfg = parse(&format!("problem = analytic1d\niterations = 0\noutput = {}\n", out.display())).unwrap();
    let mut rows = 0;
    unsafe {
        assert_eq!(shcgm_run_to_csv(cfg, &mut rows), ShcgmStatus::Ok);
        shcgm_config_free(cfg);
    }
    assert_eq!(rows, 1);
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 2);
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(shcgm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("shcgm.h").exists());
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(include.join("shcgm.h"))
            .status()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}
