//! C ABI over the colorforge engine.
//!
//! Colormaps cross the boundary as opaque `CfColormap` handles owned by the
//! caller and released with `cf_colormap_free`. Strings returned by the
//! library are released with `cf_string_free`. Every fallible call returns a
//! `CfStatus`; on failure `cf_last_error` describes the problem until the
//! next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use colorforge::annealer::{optimize, profile_from_name, OptimizerConfig};
use colorforge::colorspace::{delta_e_2000, in_gamut, lab_to_srgb_clamped, srgb_to_lab};
use colorforge::cvd::CvdModel;
use colorforge::io::{self, ColormapDocument, ConfigSnapshot, Format};
use colorforge::metrics::evaluate;
use colorforge::preference::PreferenceShelf;
use colorforge::{Error, LabColor, SrgbColor};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Parse = 4,
    Io = 5,
    Cancelled = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfLab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// Companded sRGB, channels in [0, 1].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfRgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CfEvalReport {
    pub n: usize,
    pub uniformity: f64,
    pub smoothness: f64,
    pub discriminability: f64,
    pub cvd_discriminability: f64,
    pub retention: f64,
}

/// Opaque colormap document.
pub struct CfColormap {
    doc: ColormapDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CfStatus {
    match e {
        Error::InvalidArgument(_) => CfStatus::InvalidArgument,
        Error::Validation { .. } => CfStatus::Validation,
        Error::Parse { .. } => CfStatus::Parse,
        Error::Io { .. } | Error::Image(_) => CfStatus::Io,
        Error::Cancelled => CfStatus::Cancelled,
    }
}

struct Failure(CfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CfStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CfStatus::Internal
        }
    }
}

/// # Safety
/// `p` must be NULL or a valid NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Failure(CfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be a valid NUL-terminated string.
unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(p, what)?.ok_or_else(|| null(what))
}

fn json_err(what: &str, e: serde_json::Error) -> Failure {
    Failure(CfStatus::Parse, format!("{what}: {e}"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("library strings have no NULs").into_raw()
}

impl From<CfLab> for LabColor {
    fn from(c: CfLab) -> Self {
        LabColor::new(c.l, c.a, c.b)
    }
}

impl From<LabColor> for CfLab {
    fn from(c: LabColor) -> Self {
        CfLab { l: c.l, a: c.a, b: c.b }
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn cf_delta_e_2000(a: CfLab, b: CfLab) -> f64 {
    delta_e_2000(a.into(), b.into())
}

#[no_mangle]
pub extern "C" fn cf_in_gamut(c: CfLab) -> bool {
    in_gamut(c.into())
}

#[no_mangle]
pub extern "C" fn cf_srgb_to_lab(c: CfRgb) -> CfLab {
    srgb_to_lab(SrgbColor::new(c.r, c.g, c.b)).into()
}

/// Converts to sRGB, clamping out-of-gamut channels.
#[no_mangle]
pub extern "C" fn cf_lab_to_srgb(c: CfLab) -> CfRgb {
    let s = lab_to_srgb_clamped(c.into());
    CfRgb { r: s.r, g: s.g, b: s.b }
}

/// Optimizes a colormap.
///
/// `profile` is a name such as `"linear"` or `"diverging-inv"`. `n` of 0 and
/// NaN bounds select the profile defaults. `config_json` (optimizer settings
/// overriding the defaults) and `shelf_json` (an array of preference blocks)
/// may be NULL.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_generate(
    profile: *const c_char,
    n: usize,
    l_min: f64,
    l_max: f64,
    config_json: *const c_char,
    shelf_json: *const c_char,
    out: *mut *mut CfColormap,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = req_str(profile, "profile")?;
        let finite = |v: f64| (!v.is_nan()).then_some(v);
        let profile = profile_from_name(name, (n > 0).then_some(n), finite(l_min), finite(l_max))?;
        let config: OptimizerConfig = match opt_str(config_json, "config_json")? {
            Some(s) => serde_json::from_str(s).map_err(|e| json_err("config_json", e))?,
            None => OptimizerConfig::default(),
        };
        let shelf: PreferenceShelf = match opt_str(shelf_json, "shelf_json")? {
            Some(s) => serde_json::from_str(s).map_err(|e| json_err("shelf_json", e))?,
            None => PreferenceShelf::default(),
        };
        let outcome = optimize(profile, &config, &shelf)?;
        let doc = ColormapDocument {
            colormap: outcome.colormap,
            shelf,
            config: Some(ConfigSnapshot::from(&config)),
            cost: Some(outcome.cost),
        };
        *out = Box::into_raw(Box::new(CfColormap { doc }));
        Ok(())
    })
}

/// Parses a document in `format` (`"json"`, `"csv"` or `"hex"`).
///
/// # Safety
/// `data` must point to `len` readable bytes; `format` must be
/// NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_import(
    data: *const u8,
    len: usize,
    format: *const c_char,
    out: *mut *mut CfColormap,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if data.is_null() && len > 0 {
            return Err(null("data"));
        }
        let format: Format = req_str(format, "format")?.parse()?;
        let bytes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        let doc = io::import(bytes, format)?;
        *out = Box::into_raw(Box::new(CfColormap { doc }));
        Ok(())
    })
}

/// Serializes `map` in `format`; the result is freed with `cf_string_free`.
///
/// # Safety
/// `map` must be a live handle; `format` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_export(
    map: *const CfColormap,
    format: *const c_char,
    out: *mut *mut c_char,
) -> CfStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let format: Format = req_str(format, "format")?.parse()?;
        let bytes = io::export(&map.doc, format);
        *out = into_c_string(String::from_utf8(bytes).expect("exports are UTF-8"));
        Ok(())
    })
}

/// Number of control points, or 0 for NULL.
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_len(map: *const CfColormap) -> usize {
    map.as_ref().map_or(0, |m| m.doc.colormap.len())
}

/// # Safety
/// `map` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_point(map: *const CfColormap, index: usize, out: *mut CfLab) -> CfStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = map.doc.colormap.points().get(index).ok_or_else(|| {
            Failure(
                CfStatus::InvalidArgument,
                format!("index {index} out of range for {} points", map.doc.colormap.len()),
            )
        })?;
        *out = (*p).into();
        Ok(())
    })
}

/// Color at scale position `t` in [0, 1], interpolated in Lab.
///
/// # Safety
/// `map` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_sample(map: *const CfColormap, t: f64, out: *mut CfLab) -> CfStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Failure(CfStatus::InvalidArgument, format!("t must be in [0, 1], got {t}")));
        }
        *out = map.doc.colormap.sample(t).into();
        Ok(())
    })
}

/// Writes `#rrggbb` and a terminating NUL for control point `index`; `buf`
/// needs at least 8 bytes.
///
/// # Safety
/// `map` must be a live handle and `buf` writable for `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_hex(
    map: *const CfColormap,
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
) -> CfStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < 8 {
            return Err(Failure(CfStatus::InvalidArgument, "buf needs at least 8 bytes".into()));
        }
        let p = map.doc.colormap.points().get(index).ok_or_else(|| {
            Failure(CfStatus::InvalidArgument, format!("index {index} out of range"))
        })?;
        let hex = lab_to_srgb_clamped(*p).to_hex();
        ptr::copy_nonoverlapping(hex.as_ptr().cast::<c_char>(), buf, 7);
        *buf.add(7) = 0;
        Ok(())
    })
}

/// Evaluates `map` under `cvd` (`condition[:severity]` or `"off"`; NULL for
/// the default deuteranomaly model).
///
/// # Safety
/// `map` must be a live handle, `cvd` NULL or NUL-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cf_evaluate(map: *const CfColormap, cvd: *const c_char, out: *mut CfEvalReport) -> CfStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let model: CvdModel = match opt_str(cvd, "cvd")? {
            Some(s) => s.parse()?,
            None => CvdModel::default(),
        };
        let r = evaluate(&map.doc.colormap, &model)?;
        *out = CfEvalReport {
            n: r.n,
            uniformity: r.uniformity,
            smoothness: r.smoothness,
            discriminability: r.discriminability,
            cvd_discriminability: r.cvd_discriminability,
            retention: r.retention,
        };
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `map` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_colormap_free(map: *mut CfColormap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Releases a string returned by the library; NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
