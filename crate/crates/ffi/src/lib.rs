//! C interface to clonelab.
//!
//! Every function returns a [`ClStatus`]. Objects are opaque handles
//! created by `*_new`/`*_from_json`/`*_run` and released by the matching
//! `*_free`. Strings handed out by the library are released with
//! [`cl_string_free`]. After a failed call, [`cl_last_error`] describes
//! the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use clonelab::backforth::{Catalog, LazyAutomorphism};
use clonelab::cli::{self, Command, ExperimentConfig, Report};
use clonelab::clone::{CloneFragment, DEFAULT_MAX_ARITY};
use clonelab::fnspace::parse_rational;
use clonelab::json::FragmentDoc;
use clonelab::structures::PartialIso;
use clonelab::{Elem, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    BudgetExceeded = 4,
    NoWitness = 5,
    Unsupported = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

/// Knobs for [`cl_report_run`]. Zero selects the default for the
/// optional fields.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ClRunOptions {
    pub seed: u64,
    pub window_k: u64,
    pub max_size: usize,
    pub max_arity: usize,
    pub trials: usize,
    pub count: usize,
}

pub struct ClReport(Report);

pub struct ClFragment(CloneFragment);

pub struct ClAutomorphism(LazyAutomorphism);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(ClStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match &e {
            Error::BudgetExceeded { .. } | Error::ModulusNotFound { .. } => ClStatus::BudgetExceeded,
            Error::NoWitness(_) | Error::InterpolationFailed => ClStatus::NoWitness,
            Error::Unsupported(_) => ClStatus::Unsupported,
            Error::Io(_) => ClStatus::Internal,
            _ => ClStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure(ClStatus::InvalidInput, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            ClStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ClStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure(ClStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(ClStatus::InvalidUtf8, e.to_string()))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

fn into_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|e| Failure(ClStatus::Internal, e.to_string()))
}

fn catalog(name: &str) -> Result<Catalog, Failure> {
    match name {
        "rationals-order" => Ok(Catalog::RationalsOrder),
        "rado" => Ok(Catalog::Rado),
        _ => Err(Failure(ClStatus::InvalidInput, format!("unknown structure {name:?}"))),
    }
}

fn parse_elem(c: Catalog, s: &str) -> Result<Elem, Failure> {
    match c {
        Catalog::Rado => s.trim().parse::<u64>().map(Elem::Nat).map_err(|e| Failure(ClStatus::InvalidInput, format!("{s:?}: {e}"))),
        Catalog::RationalsOrder => Ok(Elem::Rat(parse_rational(s.trim())?)),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn cl_run_options_default() -> ClRunOptions {
    ClRunOptions { seed: 0, window_k: 1, max_size: 3, max_arity: 0, trials: 5, count: 0 }
}

/// Runs an experiment by command name (as on the command line) with an
/// optional inline JSON input document. Failed checks still produce a
/// report; inspect it with [`cl_report_passed`].
///
/// # Safety
/// `command` must be a NUL-terminated string, `input_json` null or a
/// NUL-terminated string, `options` null or valid, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_report_run(
    command: *const c_char,
    input_json: *const c_char,
    options: *const ClRunOptions,
    out_report: *mut *mut ClReport,
) -> ClStatus {
    guard(|| {
        let slot = out(out_report)?;
        let name = text(command)?;
        let command =
            Command::from_name(name).ok_or_else(|| Failure(ClStatus::InvalidInput, format!("unknown command {name:?}")))?;
        let opts = options.as_ref().copied().unwrap_or_else(|| cl_run_options_default());
        let input_text = if input_json.is_null() { None } else { Some(text(input_json)?.to_owned()) };
        let config = ExperimentConfig {
            input_text,
            seed: opts.seed,
            window_k: opts.window_k,
            max_size: opts.max_size,
            max_arity: (opts.max_arity > 0).then_some(opts.max_arity),
            trials: opts.trials,
            count: (opts.count > 0).then_some(opts.count),
            timestamp: false,
            ..ExperimentConfig::new(command)
        };
        *slot = Box::into_raw(Box::new(ClReport(cli::run(&config))));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_report_passed(report: *const ClReport, out_passed: *mut bool) -> ClStatus {
    guard(|| {
        *out(out_passed)? = handle(report)?.0.passed();
        Ok(())
    })
}

/// Number of failed checks.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_report_failure_count(report: *const ClReport, out_count: *mut usize) -> ClStatus {
    guard(|| {
        *out(out_count)? = handle(report)?.0.failures.len();
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` writable. The string is
/// released with [`cl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cl_report_to_json(report: *const ClReport, out_json: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let slot = out(out_json)?;
        *slot = into_c(handle(report)?.0.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// As for [`cl_report_to_json`].
#[no_mangle]
pub unsafe extern "C" fn cl_report_to_csv(report: *const ClReport, out_csv: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let slot = out(out_csv)?;
        *slot = into_c(handle(report)?.0.to_csv()?)?;
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_report_free(report: *mut ClReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Closes the generators of a fragment document such as
/// `{"carrier":2,"generators":["NOT","AND"]}`. `max_arity` of zero uses
/// the document's bound or the library default.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_fragment_from_json(json: *const c_char, max_arity: usize, out_fragment: *mut *mut ClFragment) -> ClStatus {
    guard(|| {
        let slot = out(out_fragment)?;
        let mut doc: FragmentDoc = serde_json::from_str(text(json)?)?;
        if max_arity > 0 {
            doc.max_arity = Some(max_arity);
        }
        *slot = Box::into_raw(Box::new(ClFragment(doc.close(DEFAULT_MAX_ARITY, None)?)));
        Ok(())
    })
}

/// Number of operations of each arity `1..=max_arity`. Writes the
/// required length to `out_len`; fails with `BufferTooSmall` when
/// `capacity` is short.
///
/// # Safety
/// `fragment` must be a live handle, `out_len` writable and `buf` valid
/// for `capacity` writes (it may be null when `capacity` is zero).
#[no_mangle]
pub unsafe extern "C" fn cl_fragment_profile(
    fragment: *const ClFragment,
    buf: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> ClStatus {
    guard(|| {
        let profile = handle(fragment)?.0.profile();
        *out(out_len)? = profile.len();
        if capacity < profile.len() {
            return Err(Failure(ClStatus::BufferTooSmall, format!("profile needs {} entries", profile.len())));
        }
        if buf.is_null() {
            return Err(null());
        }
        std::slice::from_raw_parts_mut(buf, profile.len()).copy_from_slice(&profile);
        Ok(())
    })
}

/// # Safety
/// `fragment` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_fragment_free(fragment: *mut ClFragment) {
    if !fragment.is_null() {
        drop(Box::from_raw(fragment));
    }
}

/// Automorphism of `"rationals-order"` or `"rado"` extending a finite
/// partial isomorphism given as JSON pairs, e.g. `[["0","1/2"]]` or
/// `[[0,1],[1,2]]`.
///
/// # Safety
/// `structure` and `seed_json` must be NUL-terminated strings and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cl_automorphism_new(
    structure: *const c_char,
    seed_json: *const c_char,
    out_aut: *mut *mut ClAutomorphism,
) -> ClStatus {
    guard(|| {
        let slot = out(out_aut)?;
        let c = catalog(text(structure)?)?;
        let seed: PartialIso = serde_json::from_str(text(seed_json)?)?;
        *slot = Box::into_raw(Box::new(ClAutomorphism(LazyAutomorphism::new(c, seed)?)));
        Ok(())
    })
}

unsafe fn evaluate(aut: *mut ClAutomorphism, point: *const c_char, out_image: *mut *mut c_char, inverse: bool) -> ClStatus {
    guard(|| {
        let slot = out(out_image)?;
        let a = &mut out(aut)?.0;
        let x = parse_elem(a.catalog(), text(point)?)?;
        let y = if inverse { a.unapply(&x)? } else { a.apply(&x)? };
        *slot = into_c(y.to_string())?;
        Ok(())
    })
}

/// Image of a point, written as a decimal integer (Rado) or a reduced
/// fraction (rationals).
///
/// # Safety
/// `aut` must be a live handle, `point` a NUL-terminated string and
/// `out` writable. The string is released with [`cl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cl_automorphism_apply(aut: *mut ClAutomorphism, point: *const c_char, out_image: *mut *mut c_char) -> ClStatus {
    evaluate(aut, point, out_image, false)
}

/// # Safety
/// As for [`cl_automorphism_apply`].
#[no_mangle]
pub unsafe extern "C" fn cl_automorphism_unapply(aut: *mut ClAutomorphism, point: *const c_char, out_preimage: *mut *mut c_char) -> ClStatus {
    evaluate(aut, point, out_preimage, true)
}

/// Queries made so far, as JSON.
///
/// # Safety
/// `aut` must be a live handle and `out` writable. The string is released
/// with [`cl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cl_automorphism_transcript(aut: *const ClAutomorphism, out_json: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let slot = out(out_json)?;
        let t = handle(aut)?.0.transcript()?;
        *slot = into_c(serde_json::to_string(&t)?)?;
        Ok(())
    })
}

/// # Safety
/// `aut` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_automorphism_free(aut: *mut ClAutomorphism) {
    if !aut.is_null() {
        drop(Box::from_raw(aut));
    }
}
