//! C ABI over `respetri-core`.
//!
//! Models live behind an opaque `RpModel` handle. Every fallible function
//! returns an `RpStatus`; on failure a message for the calling thread is
//! available from `rp_last_error()`. Strings returned through out-pointers
//! are owned by the caller and released with `rp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use respetri_core::analysis::{check_forbidden, ExplorationBound, VerdictKind};
use respetri_core::audit::{simulate, SimPolicy};
use respetri_core::dsl::{parse_model, serialize_model, ModelSource};
use respetri_core::governance::{apply_patch, model_hash, parse_patch};
use respetri_core::net::Net;

/// Opaque handle to a parsed, validated model.
pub struct RpModel {
    net: Net,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidModel = 4,
    UnknownPredicate = 5,
    SimulationError = 6,
    PatchError = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpVerdict {
    Safe = 0,
    Unsafe = 1,
    Unknown = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(text).expect("NULs stripped")));
}

struct Fail(RpStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(RpStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(RpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn model_ref<'a>(m: *const RpModel) -> Result<&'a RpModel, Fail> {
    m.as_ref()
        .ok_or_else(|| Fail(RpStatus::NullPointer, "model handle is NULL".into()))
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        Err(Fail(RpStatus::NullPointer, "output pointer is NULL".into()))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs stripped").into_raw()
}

fn build(model: respetri_core::net::NetModel) -> Result<Box<RpModel>, Fail> {
    let net = Net::new(model).map_err(|e| Fail(RpStatus::InvalidModel, e.to_string()))?;
    Ok(Box::new(RpModel { net }))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses model text. On success `*out` receives a handle to free with
/// `rp_model_free`.
///
/// # Safety
/// `text` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_parse(text: *const c_char, out: *mut *mut RpModel) -> RpStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(text, "model text")?;
        let model = parse_model(&ModelSource::new(text)).map_err(|e| Fail(RpStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(build(model)?);
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rp_model_free(model: *mut RpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Canonical text of the model.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_serialize(model: *const RpModel, out: *mut *mut c_char) -> RpStatus {
    guard(|| {
        check_out(out)?;
        let m = model_ref(model)?;
        *out = to_c(serialize_model(m.net.model()).text);
        Ok(())
    })
}

/// SHA-256 (lowercase hex) of the canonical text.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_hash(model: *const RpModel, out: *mut *mut c_char) -> RpStatus {
    guard(|| {
        check_out(out)?;
        *out = to_c(model_hash(model_ref(model)?.net.model()));
        Ok(())
    })
}

/// Decides the named forbidden predicate with an exploration of at most
/// `max_states` markings (0 selects the default bound).
///
/// # Safety
/// `model` must be a live handle, `predicate` a NUL-terminated string and
/// `verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_check(
    model: *const RpModel,
    predicate: *const c_char,
    max_states: usize,
    verdict: *mut RpVerdict,
) -> RpStatus {
    guard(|| {
        check_out(verdict)?;
        let m = model_ref(model)?;
        let name = read_str(predicate, "predicate name")?;
        let mut bound = ExplorationBound::default();
        if max_states > 0 {
            bound.max_states = max_states;
        }
        let v = check_forbidden(&m.net, name, &bound).map_err(|e| Fail(RpStatus::UnknownPredicate, e.to_string()))?;
        *verdict = match v.kind() {
            VerdictKind::Safe => RpVerdict::Safe,
            VerdictKind::Unsafe => RpVerdict::Unsafe,
            VerdictKind::Unknown => RpVerdict::Unknown,
        };
        Ok(())
    })
}

/// Same as `rp_model_check`, returning the full verdict (including any
/// violation trace) as JSON.
///
/// # Safety
/// As for `rp_model_check`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_check_json(
    model: *const RpModel,
    predicate: *const c_char,
    max_states: usize,
    out: *mut *mut c_char,
) -> RpStatus {
    guard(|| {
        check_out(out)?;
        let m = model_ref(model)?;
        let name = read_str(predicate, "predicate name")?;
        let mut bound = ExplorationBound::default();
        if max_states > 0 {
            bound.max_states = max_states;
        }
        let v = check_forbidden(&m.net, name, &bound).map_err(|e| Fail(RpStatus::UnknownPredicate, e.to_string()))?;
        *out = to_c(serde_json::to_string(&v).expect("verdicts serialize"));
        Ok(())
    })
}

/// Runs `steps` uniformly random firings from `seed` and returns the run
/// record as JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_simulate_json(
    model: *const RpModel,
    steps: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> RpStatus {
    guard(|| {
        check_out(out)?;
        let m = model_ref(model)?;
        let run = simulate(&m.net, &SimPolicy::UniformRandom { seed }, steps)
            .map_err(|e| Fail(RpStatus::SimulationError, e.to_string()))?;
        *out = to_c(serde_json::to_string(&run).expect("runs serialize"));
        Ok(())
    })
}

/// Applies patch text to `model`, producing a new handle in `*out`. The
/// input handle is left unchanged.
///
/// # Safety
/// `model` must be a live handle, `patch` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_model_apply_patch(
    model: *const RpModel,
    patch: *const c_char,
    out: *mut *mut RpModel,
) -> RpStatus {
    guard(|| {
        check_out(out)?;
        let m = model_ref(model)?;
        let text = read_str(patch, "patch text")?;
        let patch = parse_patch(text).map_err(|errs| {
            Fail(
                RpStatus::ParseError,
                errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"),
            )
        })?;
        let post = apply_patch(m.net.model(), &patch).map_err(|e| Fail(RpStatus::PatchError, e.to_string()))?;
        *out = Box::into_raw(build(post)?);
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
