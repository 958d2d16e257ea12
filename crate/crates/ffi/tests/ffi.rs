use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use boolperc_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bp_last_error()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    bp_string_free(s);
    out
}

#[test]
fn distance_and_measure_through_handles() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(
            bp_space_from_json(c(r#"{"kind":"euclidean","dim":2}"#).as_ptr(), &mut space),
            BpStatus::Ok
        );
        let mut d = 0.0;
        let (p, q) = (c(r#"{"euclidean":[0,0]}"#), c(r#"{"euclidean":[3,4]}"#));
        assert_eq!(
            bp_space_distance(space, p.as_ptr(), q.as_ptr(), &mut d),
            BpStatus::Ok
        );
        assert_eq!(d, 5.0);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(
            bp_space_ball_measure(space, p.as_ptr(), 1.0, &mut lo, &mut hi),
            BpStatus::Ok
        );
        assert_eq!((lo, hi), (std::f64::consts::PI, std::f64::consts::PI));
        let mut json = ptr::null_mut();
        assert_eq!(bp_space_descriptor(space, &mut json), BpStatus::Ok);
        let desc: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(desc["s"], 2.0);
        assert_eq!(bp_space_origin(space, &mut json), BpStatus::Ok);
        assert_eq!(take(json), r#"{"euclidean":[0.0,0.0]}"#);
        bp_space_free(space);
    }
}

#[test]
fn failures_map_to_status_codes() {
    unsafe {
        let mut space = ptr::null_mut();
        assert_eq!(
            bp_space_from_json(ptr::null(), &mut space),
            BpStatus::NullPointer
        );
        assert_eq!(
            bp_space_from_json(c("{}").as_ptr(), ptr::null_mut()),
            BpStatus::NullPointer
        );
        assert_eq!(
            bp_space_from_json(c("not json").as_ptr(), &mut space),
            BpStatus::Parse
        );
        assert!(!last_error().is_empty());
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(
            bp_space_from_json(bad.as_ptr().cast(), &mut space),
            BpStatus::InvalidUtf8
        );
        let mut law = ptr::null_mut();
        assert_eq!(
            bp_law_from_json(c(r#"{"kind":"pareto","a":-1}"#).as_ptr(), &mut law),
            BpStatus::Domain
        );
        assert!(law.is_null());

        assert_eq!(
            bp_space_from_json(c(r#"{"kind":"euclidean","dim":2}"#).as_ptr(), &mut space),
            BpStatus::Ok
        );
        assert!(last_error().is_empty());
        let mut d = 0.0;
        let (p, q) = (
            c(r#"{"euclidean":[0,0]}"#),
            c(r#"{"dyadic":{"digits":{},"top":null}}"#),
        );
        assert_ne!(
            bp_space_distance(space, p.as_ptr(), q.as_ptr(), &mut d),
            BpStatus::Ok
        );
        assert_eq!(
            bp_law_from_json(c(r#"{"kind":"dirac","r0":1}"#).as_ptr(), &mut law),
            BpStatus::Ok
        );
        let mut u = 0.0;
        assert_eq!(
            bp_ultrametric_tail(space, law, 1.0, 1.0, &mut u),
            BpStatus::Domain
        );
        let mut sample = ptr::null_mut();
        assert_eq!(
            bp_sample_new(space, law, -1.0, 1.0, 2.0, 0, &mut sample),
            BpStatus::Domain
        );
        bp_law_free(law);
        bp_space_free(space);
        bp_space_free(ptr::null_mut());
        bp_string_free(ptr::null_mut());
    }
}

#[test]
fn sample_round_trip_and_cluster_report() {
    unsafe {
        let (mut space, mut law, mut sample) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            bp_space_from_json(c(r#"{"kind":"dyadic"}"#).as_ptr(), &mut space),
            BpStatus::Ok
        );
        assert_eq!(
            bp_law_from_json(c(r#"{"kind":"dirac","r0":4}"#).as_ptr(), &mut law),
            BpStatus::Ok
        );
        assert_eq!(
            bp_sample_new(space, law, 0.5, 4.0, 3.0, 11, &mut sample),
            BpStatus::Ok
        );
        let mut n = 0usize;
        assert_eq!(bp_sample_germ_count(sample, &mut n), BpStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(bp_sample_to_json(sample, &mut json), BpStatus::Ok);
        let text = take(json);
        let mut copy = ptr::null_mut();
        assert_eq!(
            bp_sample_from_json(c(&text).as_ptr(), &mut copy),
            BpStatus::Ok
        );
        let mut m = 0usize;
        bp_sample_germ_count(copy, &mut m);
        assert_eq!(n, m);
        let mut origin = ptr::null_mut();
        bp_space_origin(space, &mut origin);
        let origin = take(origin);
        let mut rep = ptr::null_mut();
        assert_eq!(
            bp_sample_cluster_report(copy, c(&origin).as_ptr(), &mut rep),
            BpStatus::Ok
        );
        let rep: serde_json::Value = serde_json::from_str(&take(rep)).unwrap();
        let mv = rep["m_value"].as_f64().unwrap();
        assert!(
            mv == 0.0 || mv == 2.0,
            "open balls of radius 4 reach distance 2: {mv}"
        );
        let mut l0 = 0.0;
        assert_eq!(bp_lambda0(space, law, 10.0, &mut l0), BpStatus::Ok);
        assert!(l0 > 0.0);
        let mut t = 0.0;
        assert_eq!(bp_law_tail_moment(law, 1.0, 2.0, &mut t), BpStatus::Ok);
        assert_eq!(t, 4.0);
        bp_sample_free(sample);
        bp_sample_free(copy);
        bp_law_free(law);
        bp_space_free(space);
    }
}

#[test]
fn heavy_law_reports_no_subcritical_phase() {
    unsafe {
        let (mut space, mut law) = (ptr::null_mut(), ptr::null_mut());
        bp_space_from_json(c(r#"{"kind":"euclidean","dim":2}"#).as_ptr(), &mut space);
        bp_law_from_json(c(r#"{"kind":"pareto","a":1.5}"#).as_ptr(), &mut law);
        let mut l0 = 1.0;
        assert_eq!(bp_lambda0(space, law, 10.0, &mut l0), BpStatus::Ok);
        assert_eq!(l0, 0.0);
        let mut t = 0.0;
        assert_eq!(bp_law_tail_moment(law, 2.0, 1.0, &mut t), BpStatus::Ok);
        assert!(t.is_infinite());
        bp_law_free(law);
        bp_space_free(space);
    }
}

/// Directory holding the built `libboolperc_ffi.a`.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_compiles_and_runs_against_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    // `cargo test` refreshes only the rlib
    let built = Command::new(env!("CARGO"))
        .args(["build", "-p", "boolperc-ffi", "--lib", "--profile", "test"])
        .current_dir(crate_dir)
        .status()
        .unwrap();
    assert!(built.success());
    let lib = artifact_dir().join("libboolperc_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("c_smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c_smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("cc available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
