use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use colorforge_ffi::*;

const QUICK: &CStr = c"{\"iter_count\": 40, \"seed\": 5}";

fn last_error() -> String {
    let p = cf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(profile: &CStr, n: usize) -> *mut CfColormap {
    let mut map = ptr::null_mut();
    let status = unsafe { cf_generate(profile.as_ptr(), n, f64::NAN, f64::NAN, QUICK.as_ptr(), ptr::null(), &mut map) };
    assert_eq!(status, CfStatus::Ok, "{}", last_error());
    assert!(!map.is_null());
    map
}

fn export(map: *const CfColormap, format: &CStr) -> String {
    let mut s: *mut c_char = ptr::null_mut();
    let status = unsafe { cf_colormap_export(map, format.as_ptr(), &mut s) };
    assert_eq!(status, CfStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { cf_string_free(s) };
    text
}

#[test]
fn color_math_matches_the_core() {
    let a = CfLab { l: 50.0, a: 2.6772, b: -79.7751 };
    let b = CfLab { l: 50.0, a: 0.0, b: -82.7485 };
    assert!((cf_delta_e_2000(a, b) - 2.0425).abs() < 1e-4);
    let white = cf_srgb_to_lab(CfRgb { r: 1.0, g: 1.0, b: 1.0 });
    assert!((white.l - 100.0).abs() < 1e-6);
    assert!(cf_in_gamut(white));
    assert!(!cf_in_gamut(CfLab { l: 50.0, a: 120.0, b: 0.0 }));
    let back = cf_lab_to_srgb(white);
    assert!((back.r - 1.0).abs() < 1e-6 && (back.g - 1.0).abs() < 1e-6);
    let version = unsafe { CStr::from_ptr(cf_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generate_inspect_and_evaluate() {
    let map = generate(c"linear", 9);
    assert_eq!(unsafe { cf_colormap_len(map) }, 9);
    let mut first = CfLab { l: 0.0, a: 0.0, b: 0.0 };
    let mut last = first;
    unsafe {
        assert_eq!(cf_colormap_point(map, 0, &mut first), CfStatus::Ok);
        assert_eq!(cf_colormap_point(map, 8, &mut last), CfStatus::Ok);
    }
    assert!(first.l < last.l);
    let mut mid = first;
    assert_eq!(unsafe { cf_colormap_sample(map, 0.0, &mut mid) }, CfStatus::Ok);
    assert_eq!(mid, first);

    let mut buf = [0 as c_char; 8];
    assert_eq!(unsafe { cf_colormap_hex(map, 0, buf.as_mut_ptr(), buf.len()) }, CfStatus::Ok);
    let hex = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(hex.starts_with('#') && hex.len() == 7, "{hex}");

    let mut report = CfEvalReport::default();
    assert_eq!(unsafe { cf_evaluate(map, c"off".as_ptr(), &mut report) }, CfStatus::Ok);
    assert_eq!(report.n, 9);
    assert_eq!(report.retention, 1.0);
    assert_eq!(unsafe { cf_evaluate(map, ptr::null(), &mut report) }, CfStatus::Ok);
    assert!(report.cvd_discriminability <= report.discriminability);
    unsafe { cf_colormap_free(map) };
}

#[test]
fn export_import_round_trip() {
    let map = generate(c"diverging", 11);
    let json = export(map, c"json");
    let mut back = ptr::null_mut();
    let status = unsafe { cf_colormap_import(json.as_ptr(), json.len(), c"json".as_ptr(), &mut back) };
    assert_eq!(status, CfStatus::Ok, "{}", last_error());
    assert_eq!(export(back, c"json"), json);
    let hex = export(map, c"hex");
    assert_eq!(hex.lines().count(), 11);
    unsafe {
        cf_colormap_free(back);
        cf_colormap_free(map);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut map = ptr::null_mut();
    let status = unsafe { cf_generate(c"zigzag".as_ptr(), 0, f64::NAN, f64::NAN, ptr::null(), ptr::null(), &mut map) };
    assert_eq!(status, CfStatus::InvalidArgument);
    assert!(last_error().contains("zigzag"));
    assert!(map.is_null());

    let bad = CString::new("{\"iter_count\": \"many\"}").unwrap();
    let status = unsafe { cf_generate(c"linear".as_ptr(), 0, f64::NAN, f64::NAN, bad.as_ptr(), ptr::null(), &mut map) };
    assert_eq!(status, CfStatus::Parse);

    let text = b"not json";
    let status = unsafe { cf_colormap_import(text.as_ptr(), text.len(), c"json".as_ptr(), &mut map) };
    assert_eq!(status, CfStatus::Parse, "{}", last_error());

    let mut lab = CfLab { l: 0.0, a: 0.0, b: 0.0 };
    assert_eq!(unsafe { cf_colormap_point(ptr::null(), 0, &mut lab) }, CfStatus::NullPointer);
    let m = generate(c"linear", 5);
    assert_eq!(unsafe { cf_colormap_point(m, 5, &mut lab) }, CfStatus::InvalidArgument);
    assert_eq!(unsafe { cf_colormap_sample(m, 1.5, &mut lab) }, CfStatus::InvalidArgument);
    let mut small = [0 as c_char; 4];
    assert_eq!(unsafe { cf_colormap_hex(m, 0, small.as_mut_ptr(), 4) }, CfStatus::InvalidArgument);
    assert_eq!(unsafe { cf_colormap_len(ptr::null()) }, 0);
    unsafe {
        cf_colormap_free(m);
        cf_colormap_free(ptr::null_mut());
        cf_string_free(ptr::null_mut());
    }
}

/// Directory holding the library artifacts next to this test binary.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let lib = artifact_dir().join("libcolorforge_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(root.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("a C compiler is available");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("ok"), "{stdout}");
}
