//! C ABI over the hyperpath router.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns an
//! [`HpStatus`] and leaves a message for [`hp_last_error_message`] on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperpath::cube::Vertex;
use hyperpath::fault::{FaultSet, Instance};
use hyperpath::io::{instance_to_json, parse_instance, ResultFile};
use hyperpath::path::PathSystem;
use hyperpath::router::route_with_budget;
use hyperpath::solvers::SolverBudget;
use hyperpath::verify::verify_raw;
use hyperpath::Error;

/// Status codes; the nonzero values below 5 match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    Parse = 1,
    Hypothesis = 2,
    Verify = 3,
    Budget = 4,
    NullArgument = 5,
    Internal = 6,
}

/// Opaque routing instance.
pub struct HpInstance {
    inner: Instance,
}

/// Opaque routing result.
pub struct HpResult {
    paths: PathSystem,
    file: ResultFile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HpStatus {
    match e {
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::InvalidDimension(_)
        | Error::VertexOutOfRange { .. } => HpStatus::Parse,
        Error::Precondition(_) | Error::ExceptionCase | Error::NoValidDimension => {
            HpStatus::Hypothesis
        }
        Error::BudgetExceeded { .. } => HpStatus::Budget,
        _ => HpStatus::Verify,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HpStatus>) -> HpStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HpStatus::Internal
        }
    }
}

fn fail(e: Error) -> HpStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> HpStatus {
    set_error(&format!("{what} is null"));
    HpStatus::NullArgument
}

unsafe fn slice<'a>(p: *const u32, len: usize) -> Option<&'a [u32]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

fn vertices(xs: &[u32]) -> Vec<Vertex> {
    xs.iter().map(|&x| Vertex(x)).collect()
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn hp_status_name(status: HpStatus) -> *const c_char {
    let s: &'static CStr = match status {
        HpStatus::Ok => c"ok",
        HpStatus::Parse => c"parse",
        HpStatus::Hypothesis => c"hypothesis",
        HpStatus::Verify => c"verify",
        HpStatus::Budget => c"budget",
        HpStatus::NullArgument => c"null argument",
        HpStatus::Internal => c"internal",
    };
    s.as_ptr()
}

/// Build an instance from label arrays. `sources` and `sinks` hold `k`
/// labels each.
///
/// # Safety
/// Array pointers must be valid for their lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_instance_new(
    n: u32,
    faults: *const u32,
    fault_count: usize,
    sources: *const u32,
    sinks: *const u32,
    k: usize,
    out: *mut *mut HpInstance,
) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = slice(faults, fault_count).ok_or_else(|| null("faults"))?;
        let s = slice(sources, k).ok_or_else(|| null("sources"))?;
        let t = slice(sinks, k).ok_or_else(|| null("sinks"))?;
        let fs: FaultSet = vertices(f).into_iter().collect();
        let inst = Instance::new(n, fs, vertices(s), vertices(t));
        inst.validate()
            .map_err(|e| fail(Error::Parse(e.to_string())))?;
        *out = Box::into_raw(Box::new(HpInstance { inner: inst }));
        Ok(())
    })
}

/// Parse an instance document (JSON with fields n, k, faults, sources,
/// sinks).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_instance_from_json(
    json: *const c_char,
    out: *mut *mut HpInstance,
) -> HpStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(Error::Parse("input is not UTF-8".into())))?;
        let inst = parse_instance(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(HpInstance { inner: inst }));
        Ok(())
    })
}

/// Serialize an instance; free the string with [`hp_string_free`].
///
/// # Safety
/// `inst` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_instance_to_json(inst: *const HpInstance) -> *mut c_char {
    match inst.as_ref() {
        Some(i) => {
            CString::new(instance_to_json(&i.inner)).map_or(ptr::null_mut(), CString::into_raw)
        }
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `inst` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hp_instance_free(inst: *mut HpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Route an instance. Zero for `node_limit` or `max_base_dim` selects the
/// default.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_route(
    inst: *const HpInstance,
    node_limit: u64,
    max_base_dim: u32,
    out: *mut *mut HpResult,
) -> HpStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut budget = SolverBudget::default();
        if node_limit != 0 {
            budget.node_limit = node_limit;
        }
        if max_base_dim != 0 {
            budget.max_dimension = max_base_dim;
        }
        let (paths, trace) = route_with_budget(&inst.inner, &budget).map_err(fail)?;
        let file = ResultFile::new(&inst.inner, &paths, &trace);
        *out = Box::into_raw(Box::new(HpResult { paths, file }));
        Ok(())
    })
}

/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_result_path_count(res: *const HpResult) -> usize {
    res.as_ref().map_or(0, |r| r.paths.len())
}

/// Vertex count of path `i`, or 0 when out of range.
///
/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_result_path_len(res: *const HpResult, i: usize) -> usize {
    res.as_ref()
        .and_then(|r| r.paths.paths.get(i))
        .map_or(0, |p| p.len())
}

/// Copy up to `cap` labels of path `i` into `buf`; returns the full length.
///
/// # Safety
/// `buf` must be writable for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn hp_result_path(
    res: *const HpResult,
    i: usize,
    buf: *mut u32,
    cap: usize,
) -> usize {
    let Some(p) = res.as_ref().and_then(|r| r.paths.paths.get(i)) else {
        return 0;
    };
    if !buf.is_null() {
        for (j, v) in p.vertices().iter().take(cap).enumerate() {
            *buf.add(j) = v.0;
        }
    }
    p.len()
}

/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_result_coverage(res: *const HpResult) -> usize {
    res.as_ref().map_or(0, |r| r.file.coverage)
}

/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_result_bound(res: *const HpResult) -> usize {
    res.as_ref().map_or(0, |r| r.file.bound)
}

/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_result_verified(res: *const HpResult) -> bool {
    res.as_ref().is_some_and(|r| r.file.verified)
}

/// Result document as JSON; free with [`hp_string_free`].
///
/// # Safety
/// `res` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hp_result_to_json(res: *const HpResult) -> *mut c_char {
    match res.as_ref() {
        Some(r) => CString::new(r.file.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `res` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hp_result_free(res: *mut HpResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Check `count` paths given back to back in `labels`, path `i` having
/// `lens[i]` labels. Returns `HP_STATUS_OK` when the system passes every
/// check and `HP_STATUS_VERIFY` otherwise.
///
/// # Safety
/// `labels` must hold the sum of `lens`; `lens` must hold `count` entries.
#[no_mangle]
pub unsafe extern "C" fn hp_verify(
    inst: *const HpInstance,
    labels: *const u32,
    lens: *const usize,
    count: usize,
) -> HpStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("inst"))?;
        let lens: &[usize] = if count == 0 {
            &[]
        } else if lens.is_null() {
            return Err(null("lens"));
        } else {
            std::slice::from_raw_parts(lens, count)
        };
        let total: usize = lens.iter().sum();
        let flat = slice(labels, total).ok_or_else(|| null("labels"))?;
        let mut paths = Vec::with_capacity(count);
        let mut at = 0;
        for &l in lens {
            paths.push(vertices(&flat[at..at + l]));
            at += l;
        }
        let refs: Vec<&[Vertex]> = paths.iter().map(Vec::as_slice).collect();
        let report = verify_raw(&inst.inner, &refs);
        if report.pass() {
            Ok(())
        } else {
            set_error(&report.failures.join("; "));
            Err(HpStatus::Verify)
        }
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
