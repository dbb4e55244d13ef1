use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use respetri_ffi::*;

const MODEL: &str = "place p init 1\nplace q init 0\ntrans t in p out q\nforbidden done := q >= 1\nforbidden many := p >= 2\n";

fn parse(text: &str) -> *mut RpModel {
    let c = CString::new(text).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rp_model_parse(c.as_ptr(), &mut m) }, RpStatus::Ok);
    assert!(!m.is_null());
    m
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    rp_string_free(s);
    out
}

fn last_error() -> String {
    let p = rp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parse_serialize_hash() {
    let m = parse(MODEL);
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(rp_model_serialize(m, &mut s), RpStatus::Ok);
        let text = take(s);
        assert!(text.contains("trans t in p out q"));
        let again = parse(&text);
        let (mut h1, mut h2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(rp_model_hash(m, &mut h1), RpStatus::Ok);
        assert_eq!(rp_model_hash(again, &mut h2), RpStatus::Ok);
        let (h1, h2) = (take(h1), take(h2));
        assert_eq!(h1.len(), 64);
        assert_eq!(h1, h2);
        rp_model_free(again);
        rp_model_free(m);
    }
    assert!(rp_last_error().is_null());
}

#[test]
fn verdicts_cross_the_boundary() {
    let m = parse(MODEL);
    let done = CString::new("done").unwrap();
    let many = CString::new("many").unwrap();
    let missing = CString::new("nope").unwrap();
    let mut v = RpVerdict::Unknown;
    unsafe {
        assert_eq!(rp_model_check(m, done.as_ptr(), 0, &mut v), RpStatus::Ok);
        assert_eq!(v, RpVerdict::Unsafe);
        assert_eq!(rp_model_check(m, many.as_ptr(), 0, &mut v), RpStatus::Ok);
        assert_eq!(v, RpVerdict::Safe);
        assert_eq!(rp_model_check(m, missing.as_ptr(), 0, &mut v), RpStatus::UnknownPredicate);
        assert!(last_error().contains("nope"));

        let mut json = ptr::null_mut();
        assert_eq!(rp_model_check_json(m, done.as_ptr(), 0, &mut json), RpStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(value["outcome"]["Unsafe"]["firings"], serde_json::json!(["t"]));
        rp_model_free(m);
    }
}

#[test]
fn simulate_and_patch() {
    let m = parse(MODEL);
    unsafe {
        let mut json = ptr::null_mut();
        assert_eq!(rp_model_simulate_json(m, 5, 1, &mut json), RpStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(value["trace"]["firings"], serde_json::json!(["t"]));
        assert_eq!(value["deadlock"], serde_json::json!(1));

        let patch = CString::new("add arc t inhibit q:1\nset cap q 1\n").unwrap();
        let mut patched = ptr::null_mut();
        assert_eq!(rp_model_apply_patch(m, patch.as_ptr(), &mut patched), RpStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(rp_model_serialize(patched, &mut s), RpStatus::Ok);
        assert!(take(s).contains("cap 1"));

        let bad = CString::new("remove place zzz\n").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(rp_model_apply_patch(m, bad.as_ptr(), &mut out), RpStatus::PatchError);
        assert!(out.is_null());
        rp_model_free(patched);
        rp_model_free(m);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(rp_model_parse(ptr::null(), &mut m), RpStatus::NullPointer);
        let broken = CString::new("place p init\n").unwrap();
        assert_eq!(rp_model_parse(broken.as_ptr(), &mut m), RpStatus::ParseError);
        assert!(last_error().contains("1:"));
        assert!(m.is_null());
        let invalid = [0x70u8, 0xff, 0];
        assert_eq!(rp_model_parse(invalid.as_ptr().cast(), &mut m), RpStatus::InvalidUtf8);
        let mut s = ptr::null_mut();
        assert_eq!(rp_model_hash(ptr::null(), &mut s), RpStatus::NullPointer);
        assert_eq!(rp_model_serialize(ptr::null(), ptr::null_mut()), RpStatus::NullPointer);
        rp_model_free(ptr::null_mut());
        rp_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(rp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/respetri.h")).unwrap();
    for name in [
        "rp_last_error",
        "rp_version",
        "rp_model_parse",
        "rp_model_free",
        "rp_model_serialize",
        "rp_model_hash",
        "rp_model_check",
        "rp_model_check_json",
        "rp_model_simulate_json",
        "rp_model_apply_patch",
        "rp_string_free",
        "typedef struct RpModel RpModel",
        "RP_STATUS_OK = 0",
        "RP_VERDICT_UNSAFE = 1",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "respetri.h"

int main(void) {
    RpModel *m = NULL;
    if (rp_model_parse("place p init 1\nplace q init 0\ntrans t in p out q\nforbidden done := q >= 1\n", &m) != RP_STATUS_OK) return 10;
    RpVerdict v;
    if (rp_model_check(m, "done", 0, &v) != RP_STATUS_OK || v != RP_VERDICT_UNSAFE) return 11;
    char *h = NULL;
    if (rp_model_hash(m, &h) != RP_STATUS_OK || strlen(h) != 64) return 12;
    rp_string_free(h);
    if (rp_model_check(m, "missing", 0, &v) != RP_STATUS_UNKNOWN_PREDICATE || rp_last_error() == NULL) return 13;
    rp_model_free(m);
    puts("ok");
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("librespetri_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-c");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
