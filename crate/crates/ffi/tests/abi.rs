use std::ffi::{c_char, CStr, CString};
use std::ptr;

use clonelab::fnspace::rat;
use clonelab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cl_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    cl_string_free(s);
    out
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(cl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn runs_reports() {
    let cmd = CString::new("e-g-check").unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(cl_report_run(cmd.as_ptr(), ptr::null(), ptr::null(), &mut report), ClStatus::Ok);
        let mut passed = false;
        assert_eq!(cl_report_passed(report, &mut passed), ClStatus::Ok);
        assert!(passed);
        let mut json = ptr::null_mut();
        assert_eq!(cl_report_to_json(report, &mut json), ClStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["command"], "e-g-check");
        assert_eq!(v["timestamp"], serde_json::Value::Null);
        let mut csv = ptr::null_mut();
        assert_eq!(cl_report_to_csv(report, &mut csv), ClStatus::Ok);
        assert!(take(csv).starts_with("section,name,holds,detail"));
        cl_report_free(report);
    }
}

#[test]
fn inline_inputs_and_failed_checks() {
    let cmd = CString::new("homogeneity").unwrap();
    let p4 = CString::new(r#"{"family":"path","n":4}"#).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(cl_report_run(cmd.as_ptr(), p4.as_ptr(), ptr::null(), &mut report), ClStatus::Ok);
        let mut passed = true;
        cl_report_passed(report, &mut passed);
        assert!(!passed);
        let mut n = 0;
        assert_eq!(cl_report_failure_count(report, &mut n), ClStatus::Ok);
        assert!(n > 0);
        cl_report_free(report);
    }
}

#[test]
fn reports_are_deterministic() {
    let cmd = CString::new("transitivity").unwrap();
    let opts = ClRunOptions { seed: 11, count: 10, ..cl_run_options_default() };
    let run = || unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(cl_report_run(cmd.as_ptr(), ptr::null(), &opts, &mut report), ClStatus::Ok);
        let mut json = ptr::null_mut();
        cl_report_to_json(report, &mut json);
        cl_report_free(report);
        take(json)
    };
    assert_eq!(run(), run());
}

#[test]
fn fragment_profile() {
    let doc = CString::new(r#"{"carrier":2,"generators":["NOT","AND"]}"#).unwrap();
    let mut frag = ptr::null_mut();
    unsafe {
        assert_eq!(cl_fragment_from_json(doc.as_ptr(), 2, &mut frag), ClStatus::Ok);
        let mut len = 0;
        assert_eq!(cl_fragment_profile(frag, ptr::null_mut(), 0, &mut len), ClStatus::BufferTooSmall);
        assert_eq!(len, 2);
        let mut buf = [0usize; 2];
        assert_eq!(cl_fragment_profile(frag, buf.as_mut_ptr(), buf.len(), &mut len), ClStatus::Ok);
        assert_eq!(buf, [4, 16]);
        cl_fragment_free(frag);
    }
}

#[test]
fn automorphisms() {
    let q = CString::new("rationals-order").unwrap();
    let seed = CString::new(r#"[["0","1/2"],["1","3"]]"#).unwrap();
    let mut aut = ptr::null_mut();
    unsafe {
        assert_eq!(cl_automorphism_new(q.as_ptr(), seed.as_ptr(), &mut aut), ClStatus::Ok);
        let mut y = ptr::null_mut();
        let x = CString::new("1").unwrap();
        assert_eq!(cl_automorphism_apply(aut, x.as_ptr(), &mut y), ClStatus::Ok);
        assert_eq!(take(y), "3");
        let half = CString::new("1/2").unwrap();
        assert_eq!(cl_automorphism_unapply(aut, half.as_ptr(), &mut y), ClStatus::Ok);
        assert_eq!(take(y), "0");
        let mid = CString::new("1/2").unwrap();
        assert_eq!(cl_automorphism_apply(aut, mid.as_ptr(), &mut y), ClStatus::Ok);
        let image: clonelab::Rational = take(y).parse().unwrap();
        assert!(image > rat(1, 2) && image < rat(3, 1));
        let mut t = ptr::null_mut();
        assert_eq!(cl_automorphism_transcript(aut, &mut t), ClStatus::Ok);
        let t: serde_json::Value = serde_json::from_str(&take(t)).unwrap();
        assert_eq!(t["verified"], true);
        cl_automorphism_free(aut);

        let rado = CString::new("rado").unwrap();
        let seed = CString::new("[[0,5]]").unwrap();
        assert_eq!(cl_automorphism_new(rado.as_ptr(), seed.as_ptr(), &mut aut), ClStatus::Ok);
        let zero = CString::new("0").unwrap();
        assert_eq!(cl_automorphism_apply(aut, zero.as_ptr(), &mut y), ClStatus::Ok);
        assert_eq!(take(y), "5");
        cl_automorphism_free(aut);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(cl_report_run(ptr::null(), ptr::null(), ptr::null(), &mut report), ClStatus::NullPointer);
        assert!(!last_error().is_empty());
        let bogus = CString::new("no-such-command").unwrap();
        assert_eq!(cl_report_run(bogus.as_ptr(), ptr::null(), ptr::null(), &mut report), ClStatus::InvalidInput);
        assert!(last_error().contains("no-such-command"));
        let bad_utf8 = [0xffu8, 0];
        assert_eq!(
            cl_report_run(bad_utf8.as_ptr().cast(), ptr::null(), ptr::null(), &mut report),
            ClStatus::InvalidUtf8
        );

        let mut frag = ptr::null_mut();
        let broken = CString::new("{").unwrap();
        assert_eq!(cl_fragment_from_json(broken.as_ptr(), 0, &mut frag), ClStatus::InvalidInput);
        assert!(frag.is_null());

        let q = CString::new("rationals-order").unwrap();
        let not_iso = CString::new(r#"[["0","1"],["1","0"]]"#).unwrap();
        let mut aut = ptr::null_mut();
        assert_ne!(cl_automorphism_new(q.as_ptr(), not_iso.as_ptr(), &mut aut), ClStatus::Ok);
        let other = CString::new("integers").unwrap();
        let seed = CString::new("[]").unwrap();
        assert_eq!(cl_automorphism_new(other.as_ptr(), seed.as_ptr(), &mut aut), ClStatus::InvalidInput);

        let mut passed = false;
        assert_eq!(cl_report_passed(ptr::null(), &mut passed), ClStatus::NullPointer);
        let ok = CString::new("e-g-check").unwrap();
        assert_eq!(cl_report_run(ok.as_ptr(), ptr::null(), ptr::null(), &mut report), ClStatus::Ok);
        assert!(last_error().is_empty());
        cl_report_free(report);
        cl_report_free(ptr::null_mut());
        cl_string_free(ptr::null_mut());
    }
}
