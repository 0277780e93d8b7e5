use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use oplab_ffi::*;

fn last_error() -> String {
    let p = oplab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn space(num: &[i64], den: &[u64]) -> *mut OplabSpace {
    let mut s = ptr::null_mut();
    assert_eq!(oplab_space_new(num.as_ptr(), den.as_ptr(), num.len(), &mut s), OplabStatus::Ok);
    s
}

unsafe fn map(images: &[usize]) -> *mut OplabMap {
    let mut m = ptr::null_mut();
    assert_eq!(oplab_map_new(images.as_ptr(), images.len(), &mut m), OplabStatus::Ok);
    m
}

unsafe fn flags_of(images: &[usize], num: &[i64], den: &[u64]) -> (OplabFlags, String) {
    let s = space(num, den);
    let m = map(images);
    let mut r = ptr::null_mut();
    assert_eq!(oplab_analyze(m, s, &mut r), OplabStatus::Ok);
    let mut flags = std::mem::zeroed();
    assert_eq!(oplab_report_flags(r, &mut flags), OplabStatus::Ok);
    let json = CStr::from_ptr(oplab_report_json(r)).to_str().unwrap().to_owned();
    oplab_report_free(r);
    oplab_map_free(m);
    oplab_space_free(s);
    (flags, json)
}

#[test]
fn shift_to_sink_through_handles() {
    let (flags, json) = unsafe { flags_of(&[1, 2, 2], &[1, 1, 1], &[1, 1, 1]) };
    assert!(flags.nonsingular);
    assert!(!flags.measure_preserving);
    assert!(!flags.expansive);
    assert_eq!(flags.injective, 0);
    assert_eq!(flags.essentially_surjective, 0);
    assert_eq!(flags.kernel_dimension, 1);
    assert_eq!(flags.ascent, 2);
    assert!(json.contains("\"schema\": 1"));
    assert!(json.contains("\"pushforward\": [\n    \"0\",\n    \"1\",\n    \"2\"\n  ]"));
}

#[test]
fn singular_map_reports_unavailable_fields() {
    let (flags, json) = unsafe { flags_of(&[1, 1], &[1, 0], &[1, 1]) };
    assert!(!flags.nonsingular);
    assert_eq!(flags.injective, -1);
    assert_eq!(flags.ascent, -1);
    assert_eq!(flags.kernel_dimension, -1);
    assert!(json.contains("singular_witness"));
}

#[test]
fn rational_weights_survive() {
    let (flags, json) = unsafe { flags_of(&[0, 1, 2], &[1, 1, 1], &[2, 3, 6]) };
    assert!(flags.measure_preserving);
    assert_eq!(flags.ascent, 1);
    assert!(json.contains("\"1/3\""));
}

#[test]
fn argument_errors_set_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        let num = [1i64];
        let den = [0u64];
        assert_eq!(oplab_space_new(num.as_ptr(), den.as_ptr(), 1, &mut s), OplabStatus::InvalidArgument);
        assert!(s.is_null());
        assert!(last_error().contains("denominator"));

        assert_eq!(oplab_space_new(ptr::null(), den.as_ptr(), 1, &mut s), OplabStatus::NullPointer);
        assert!(last_error().contains("numerators"));

        let s = space(&[1, 1], &[1, 1]);
        let m = map(&[0, 1, 2]);
        let mut r = ptr::null_mut();
        assert_eq!(oplab_analyze(m, s, &mut r), OplabStatus::InvalidArgument);
        assert!(r.is_null());
        assert_eq!(oplab_analyze(ptr::null(), s, &mut r), OplabStatus::NullPointer);
        oplab_map_free(m);
        oplab_space_free(s);

        assert_eq!(oplab_space_len(ptr::null()), 0);
        assert!(oplab_report_json(ptr::null()).is_null());
        oplab_space_free(ptr::null_mut());
        oplab_map_free(ptr::null_mut());
        oplab_report_free(ptr::null_mut());
        oplab_orlicz_free(ptr::null_mut());
        oplab_string_free(ptr::null_mut());
    }
}

#[test]
fn norms() {
    unsafe {
        let mut phi = ptr::null_mut();
        assert_eq!(oplab_orlicz_power(2.0, &mut phi), OplabStatus::Ok);
        let mut n = 0.0;
        let v = [3.0];
        let w = [1.0];
        assert_eq!(oplab_luxemburg_norm(phi, v.as_ptr(), w.as_ptr(), 1, 1e-12, &mut n), OplabStatus::Ok);
        assert!((n - 3.0).abs() < 1e-10);

        let s = space(&[1, 1], &[1, 1]);
        let v = [3.0, 4.0];
        assert_eq!(oplab_luxemburg_norm_atomic(phi, s, v.as_ptr(), 2, 1e-12, &mut n), OplabStatus::Ok);
        assert!((n - 5.0).abs() < 1e-10);
        assert_eq!(
            oplab_luxemburg_norm_atomic(phi, s, v.as_ptr(), 1, 1e-12, &mut n),
            OplabStatus::InvalidArgument
        );
        oplab_space_free(s);
        oplab_orlicz_free(phi);

        let mut bad = ptr::null_mut();
        assert_eq!(oplab_orlicz_power(1.0, &mut bad), OplabStatus::InvalidArgument);
        assert!(bad.is_null());
        assert_eq!(oplab_orlicz_power_log(1.0, &mut bad), OplabStatus::Ok);
        oplab_orlicz_free(bad);
        assert_eq!(oplab_orlicz_exp_minus(&mut bad), OplabStatus::Ok);
        oplab_orlicz_free(bad);
    }
}

#[test]
fn scenario_json_round_trip() {
    let text = CString::new(
        r#"{"name":"sink","carrier":{"kind":"atomic","atoms":["a","b","c"],"weights":["1","1","1"]},
            "transformation":{"kind":"atomic","mapping":{"a":"b","b":"c","c":"c"}}}"#,
    )
    .unwrap();
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(oplab_analyze_scenario_json(text.as_ptr(), &mut out), OplabStatus::Ok);
        let json = CStr::from_ptr(out).to_str().unwrap().to_owned();
        oplab_string_free(out);
        assert!(json.contains("\"scenario\": \"sink\""));
        assert!(json.contains("\"ascent\": 2"));

        let broken = CString::new("{\"carrier\": 3}").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(oplab_analyze_scenario_json(broken.as_ptr(), &mut out), OplabStatus::Parse);
        assert!(out.is_null());
        assert!(last_error().contains("parse error"));
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("oplab.h").exists());
    let src = std::env::temp_dir().join(format!("oplab_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"oplab.h\"\n\
         int probe(void) {\n\
           OplabSpace *s = NULL; int64_t n[1] = {1}; uint64_t d[1] = {1};\n\
           OplabStatus st = oplab_space_new(n, d, 1, &s);\n\
           OplabFlags f; (void)f; oplab_space_free(s);\n\
           return st == OPLAB_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let obj = src.with_extension("o");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-c"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-o")
        .arg(&obj)
        .status();
    let _ = std::fs::remove_file(&src);
    let _ = std::fs::remove_file(&obj);
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}
