//! C interface to the simulator, the crawler and the evaluation judge.
//!
//! Every fallible function returns an [`AxcStatus`]. On failure a message is
//! kept per thread and can be read with [`axc_last_error`]. Strings handed
//! out through `out` parameters are owned by the caller and must be released
//! with [`axc_string_free`]; handles are released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use axcrawl::agents::AgentSuite;
use axcrawl::ax::{ActionSpec, Point};
use axcrawl::backend::{Session, SessionFactory};
use axcrawl::crawler::{crawl, CrawlerConfig};
use axcrawl::eval::{judge, parse_prediction};
use axcrawl::sim::{load_app_spec, load_app_spec_file, SimBackend};
use axcrawl::tasks::{synthesize, to_jsonl, SynthesisOptions, TaskRecord};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Backend = 4,
    Panic = 5,
}

/// A loaded application spec.
pub struct AxcApp {
    backend: SimBackend,
}

/// A live simulator session.
pub struct AxcSession {
    inner: Box<dyn Session>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (AxcStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AxcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AxcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AxcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (AxcStatus::NullArgument, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (AxcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn axc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn axc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn axc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an app spec from a JSON string.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn axc_app_from_json(json: *const c_char, out: *mut *mut AxcApp) -> AxcStatus {
    guard(|| {
        let spec = load_app_spec(c_str(json, "json")?.as_bytes()).map_err(|e| (AxcStatus::InvalidInput, e.to_string()))?;
        put(out, Box::into_raw(Box::new(AxcApp { backend: SimBackend::new(spec) })), "out")
    })
}

/// Loads an app spec file (`*.app.json`).
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn axc_app_from_file(path: *const c_char, out: *mut *mut AxcApp) -> AxcStatus {
    guard(|| {
        let spec = load_app_spec_file(Path::new(c_str(path, "path")?)).map_err(|e| (AxcStatus::InvalidInput, e.to_string()))?;
        put(out, Box::into_raw(Box::new(AxcApp { backend: SimBackend::new(spec) })), "out")
    })
}

/// # Safety
/// `app` must come from `axc_app_from_*` and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn axc_app_free(app: *mut AxcApp) {
    if !app.is_null() {
        drop(Box::from_raw(app));
    }
}

/// Starts a fresh session at the app's initial state. The session does not
/// borrow `app`; either may be freed first.
///
/// # Safety
/// `app` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn axc_session_start(app: *const AxcApp, out: *mut *mut AxcSession) -> AxcStatus {
    guard(|| {
        let app = app.as_ref().ok_or_else(|| null("app"))?;
        let inner = app.backend.start().map_err(|e| (AxcStatus::Backend, e.to_string()))?;
        put(out, Box::into_raw(Box::new(AxcSession { inner })), "out")
    })
}

/// # Safety
/// `session` must come from `axc_session_start` and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn axc_session_free(session: *mut AxcSession) {
    if !session.is_null() {
        let mut s = Box::from_raw(session);
        s.inner.close();
    }
}

/// Current screen state as JSON (`tree`, `image_name`, `scaling_factor`).
///
/// # Safety
/// `session` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn axc_session_observe(session: *mut AxcSession, out_json: *mut *mut c_char) -> AxcStatus {
    guard(|| {
        let s = session.as_mut().ok_or_else(|| null("session"))?;
        let state = s.inner.observe().map_err(|e| (AxcStatus::Backend, e.to_string()))?;
        let json = serde_json::to_string(&state).map_err(|e| (AxcStatus::Backend, e.to_string()))?;
        put(out_json, owned(json), "out_json")
    })
}

unsafe fn step(session: *mut AxcSession, action: ActionSpec, out_changed: *mut bool) -> AxcStatus {
    guard(|| {
        let s = session.as_mut().ok_or_else(|| null("session"))?;
        let outcome = s.inner.perform(&action).map_err(|e| (AxcStatus::Backend, e.to_string()))?;
        if !out_changed.is_null() {
            out_changed.write(outcome.state_changed);
        }
        Ok(())
    })
}

/// Clicks at (`x`, `y`) in screen points. `out_changed` may be null.
///
/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn axc_session_click(session: *mut AxcSession, x: f64, y: f64, out_changed: *mut bool) -> AxcStatus {
    if !(x.is_finite() && y.is_finite()) {
        return guard(|| Err((AxcStatus::InvalidInput, "click coordinates must be finite".into())));
    }
    step(session, ActionSpec::click(None, Point::new(x, y)), out_changed)
}

/// Types `text` into element `target_id`. `out_changed` may be null.
///
/// # Safety
/// `session` must be a live handle; `text` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn axc_session_type(session: *mut AxcSession, target_id: u32, text: *const c_char, out_changed: *mut bool) -> AxcStatus {
    let t = match c_str(text, "text") {
        Ok(t) => t.to_string(),
        Err(f) => return guard(|| Err(f)),
    };
    step(session, ActionSpec::type_text(target_id, t), out_changed)
}

/// # Safety
/// `session` must be a live handle. `out_changed` may be null.
#[no_mangle]
pub unsafe extern "C" fn axc_session_press_enter(session: *mut AxcSession, out_changed: *mut bool) -> AxcStatus {
    step(session, ActionSpec::press_enter(), out_changed)
}

/// Crawls the app with deterministic agents and synthesizes its tasks.
/// `config_json` may be null for the defaults; otherwise it is a crawler
/// config object whose missing fields take their defaults. Either output
/// pointer may be null when that output is not wanted.
///
/// # Safety
/// `app` must be a live handle; non-null pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn axc_crawl(
    app: *const AxcApp,
    config_json: *const c_char,
    out_graph_json: *mut *mut c_char,
    out_tasks_jsonl: *mut *mut c_char,
) -> AxcStatus {
    guard(|| {
        let app = app.as_ref().ok_or_else(|| null("app"))?;
        let config: CrawlerConfig = if config_json.is_null() {
            CrawlerConfig::default()
        } else {
            serde_json::from_str(c_str(config_json, "config_json")?).map_err(|e| (AxcStatus::InvalidInput, e.to_string()))?
        };
        config.validate().map_err(|e| (AxcStatus::InvalidInput, e.to_string()))?;
        let agents = AgentSuite::deterministic(config.default_text.clone());
        let outcome = crawl(&app.backend, &config, &agents).map_err(|e| (AxcStatus::Backend, e.to_string()))?;
        if !out_graph_json.is_null() {
            out_graph_json.write(owned(String::from_utf8(outcome.graph.serialize()).expect("graph JSON is UTF-8")));
        }
        if !out_tasks_jsonl.is_null() {
            let records = if config.task_collection {
                synthesize(&outcome.graph, &agents, &SynthesisOptions { screen_id_base: 0, acceptor: Some(&app.backend) })
            } else {
                Vec::new()
            };
            out_tasks_jsonl.write(owned(to_jsonl(&records)));
        }
        match outcome.failure {
            Some(f) => Err((AxcStatus::Backend, f.to_string())),
            None => Ok(()),
        }
    })
}

/// Judges a raw model prediction against one task record (a JSON object as
/// found on a line of `tasks.jsonl`). An unparseable prediction is a miss,
/// not an error.
///
/// # Safety
/// `prediction` and `record_json` must be nul-terminated strings; `out_hit`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn axc_judge(prediction: *const c_char, record_json: *const c_char, out_hit: *mut bool) -> AxcStatus {
    guard(|| {
        let raw = c_str(prediction, "prediction")?;
        let record: TaskRecord =
            serde_json::from_str(c_str(record_json, "record_json")?).map_err(|e| (AxcStatus::InvalidInput, e.to_string()))?;
        let hit = parse_prediction(raw).is_ok_and(|p| judge(&p, &record));
        put(out_hit, hit, "out_hit")
    })
}
