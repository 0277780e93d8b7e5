//! C ABI for `oplab`.
//!
//! Objects cross the boundary as opaque pointers created by `oplab_*_new`
//! functions and released by the matching `oplab_*_free`. Every fallible
//! call returns an [`OplabStatus`]; on failure the message is available from
//! [`oplab_last_error_message`] on the same thread until the next failing
//! call. Panics never unwind into C: they surface as `OPLAB_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use oplab::analysis::{self, AnalysisReport};
use oplab::cli::report::{to_json, AnalyzeJson};
use oplab::cli::scenario::{Model, Scenario};
use oplab::measure::{AtomMap, AtomicMeasureSpace};
use oplab::orlicz::{self, OrliczFunction};
use oplab::{Error, Rational};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OplabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularTransformation = 3,
    TheoremViolation = 4,
    Parse = 5,
    Internal = 6,
}

/// An atomic measure space with exact rational weights.
pub struct OplabSpace(AtomicMeasureSpace);

/// A map on atom indices.
pub struct OplabMap(AtomMap);

/// An N-function.
pub struct OplabOrlicz(OrliczFunction);

/// The result of `oplab_analyze`, with its JSON rendering cached.
pub struct OplabReport {
    report: AnalysisReport,
    json: CString,
}

/// Scalar summary of a report. Tri-state fields use -1 for "not available"
/// (the transformation is singular).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OplabFlags {
    pub nonsingular: bool,
    pub measure_preserving: bool,
    pub expansive: bool,
    pub injective: i8,
    pub essentially_surjective: i8,
    pub kernel_dimension: i64,
    pub ascent: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> OplabStatus {
    match e {
        Error::SingularTransformation { .. } => OplabStatus::SingularTransformation,
        Error::TheoremViolation(_) => OplabStatus::TheoremViolation,
        Error::Scenario(_) => OplabStatus::Parse,
        _ => OplabStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OplabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OplabStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            OplabStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal error".into());
            OplabStatus::Internal
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oplab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a space with weights `numerators[i] / denominators[i]`.
///
/// # Safety
/// Both arrays must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_space_new(
    numerators: *const i64,
    denominators: *const u64,
    len: usize,
    out: *mut *mut OplabSpace,
) -> OplabStatus {
    guard(|| {
        let num = slice(numerators, len, "numerators")?;
        let den = slice(denominators, len, "denominators")?;
        let mut weights = Vec::with_capacity(len);
        for (i, (&n, &d)) in num.iter().zip(den).enumerate() {
            if d == 0 {
                return Err(Error::InvalidArgument(format!("denominator {i} is zero")).into());
            }
            weights.push(Rational::new(n.into(), d.into()));
        }
        put(out, OplabSpace(AtomicMeasureSpace::from_weights(weights)?), "out")
    })
}

/// # Safety
/// `space` must come from `oplab_space_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_space_free(space: *mut OplabSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of atoms, or 0 for NULL.
///
/// # Safety
/// `space` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_space_len(space: *const OplabSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.len())
}

/// Builds the map sending atom `i` to atom `images[i]`.
///
/// # Safety
/// `images` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_map_new(images: *const usize, len: usize, out: *mut *mut OplabMap) -> OplabStatus {
    guard(|| {
        let images = slice(images, len, "images")?;
        put(out, OplabMap(AtomMap::new(images.to_vec())?), "out")
    })
}

/// # Safety
/// `map` must come from `oplab_map_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_map_free(map: *mut OplabMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_orlicz_power(p: f64, out: *mut *mut OplabOrlicz) -> OplabStatus {
    guard(|| put(out, OplabOrlicz(OrliczFunction::power(p)?), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_orlicz_power_log(p: f64, out: *mut *mut OplabOrlicz) -> OplabStatus {
    guard(|| put(out, OplabOrlicz(OrliczFunction::power_log(p)?), "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_orlicz_exp_minus(out: *mut *mut OplabOrlicz) -> OplabStatus {
    guard(|| put(out, OplabOrlicz(OrliczFunction::exp_minus()), "out"))
}

/// # Safety
/// `phi` must come from an `oplab_orlicz_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_orlicz_free(phi: *mut OplabOrlicz) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// Luxemburg norm of `values` against sample `weights`.
///
/// # Safety
/// `values` and `weights` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_luxemburg_norm(
    phi: *const OplabOrlicz,
    values: *const f64,
    weights: *const f64,
    len: usize,
    tol: f64,
    out: *mut f64,
) -> OplabStatus {
    guard(|| {
        let phi = nonnull(phi, "phi")?;
        let values = slice(values, len, "values")?;
        let weights = slice(weights, len, "weights")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = orlicz::luxemburg_norm(&phi.0, values, weights, tol)?;
        Ok(())
    })
}

/// Luxemburg norm of `values` over the atoms of `space`.
///
/// # Safety
/// `values` must hold one element per atom; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_luxemburg_norm_atomic(
    phi: *const OplabOrlicz,
    space: *const OplabSpace,
    values: *const f64,
    len: usize,
    tol: f64,
    out: *mut f64,
) -> OplabStatus {
    guard(|| {
        let phi = nonnull(phi, "phi")?;
        let space = nonnull(space, "space")?;
        let values = slice(values, len, "values")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = orlicz::luxemburg_norm(&phi.0, values, &space.0, tol)?;
        Ok(())
    })
}

fn render(space: &AtomicMeasureSpace, report: &AnalysisReport, name: Option<String>) -> Result<CString, Failure> {
    let json = to_json(&AnalyzeJson::new(name, space, report));
    CString::new(json).map_err(|_| Failure::Lib(Error::InvalidArgument("report contains NUL".into())))
}

/// Runs the full analysis of `map` on `space`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_analyze(
    map: *const OplabMap,
    space: *const OplabSpace,
    out: *mut *mut OplabReport,
) -> OplabStatus {
    guard(|| {
        let map = nonnull(map, "map")?;
        let space = nonnull(space, "space")?;
        let report = analysis::analyze(&map.0, &space.0)?;
        let json = render(&space.0, &report, None)?;
        put(out, OplabReport { report, json }, "out")
    })
}

/// # Safety
/// `report` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_report_flags(report: *const OplabReport, out: *mut OplabFlags) -> OplabStatus {
    guard(|| {
        let r = &nonnull(report, "report")?.report;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let tri = |b: Option<bool>| b.map_or(-1, i8::from);
        *out = OplabFlags {
            nonsingular: r.nonsingular.holds(),
            measure_preserving: r.measure_preserving,
            expansive: r.expansive,
            injective: tri(r.injective),
            essentially_surjective: tri(r.essentially_surjective),
            kernel_dimension: r.kernel.as_ref().map_or(-1, |k| k.kernel_dimension as i64),
            ascent: r.ascent.as_ref().map_or(-1, |a| a.ascent as i64),
        };
        Ok(())
    })
}

/// JSON report (schema 1). Owned by `report`; valid until it is freed.
///
/// # Safety
/// `report` must be live or NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_report_json(report: *const OplabReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` must come from `oplab_analyze` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_report_free(report: *mut OplabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Parses an atomic scenario document and writes its JSON report to `*out`.
/// Release the string with `oplab_string_free`.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oplab_analyze_scenario_json(scenario_json: *const c_char, out: *mut *mut c_char) -> OplabStatus {
    guard(|| {
        if scenario_json.is_null() {
            return Err(Failure::Null("scenario_json"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let text = CStr::from_ptr(scenario_json)
            .to_str()
            .map_err(|_| Error::Scenario("scenario is not UTF-8".into()))?;
        let scenario = Scenario::from_json(text)?;
        let Model::Atomic(model) = scenario.build()? else {
            return Err(Error::Scenario("analysis needs an atomic carrier".into()).into());
        };
        let report = analysis::analyze(&model.map, &model.space)?;
        *out = render(&model.space, &report, scenario.name.clone())?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn oplab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
