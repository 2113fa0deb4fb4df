//! C ABI over the ifc-mcp tool server.
//!
//! A session handle owns one model. Requests and results cross the boundary
//! as NUL-terminated UTF-8 JSON. Strings returned through `out` pointers are
//! owned by the caller and released with `ifc_mcp_string_free`. After a
//! non-OK status, `ifc_mcp_last_error` describes the failure on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ifc_mcp::mcp::{handle_line, CallOutcome, Registry, Session};
use ifc_mcp::model::IfcModel;
use ifc_mcp::step::GuidGenerator;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfcMcpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    Io = 4,
    Model = 5,
    ToolFailed = 6,
    InvalidParams = 7,
    UnknownTool = 8,
    Panic = 9,
}

/// Opaque session handle.
pub struct IfcMcpSession {
    session: Session,
    registry: Registry,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: IfcMcpStatus, msg: impl Into<String>) -> IfcMcpStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> IfcMcpStatus) -> IfcMcpStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(IfcMcpStatus::Panic, "internal panic"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, IfcMcpStatus> {
    if p.is_null() {
        return Err(fail(IfcMcpStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(IfcMcpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn emit(out: *mut *mut c_char, s: Option<String>) {
    *out = s
        .and_then(|s| CString::new(s).ok())
        .map_or(ptr::null_mut(), CString::into_raw);
}

fn generator(seed: u64, seeded: bool) -> GuidGenerator {
    if seeded {
        GuidGenerator::seeded(seed)
    } else {
        GuidGenerator::random()
    }
}

fn handle(session: Session) -> *mut IfcMcpSession {
    Box::into_raw(Box::new(IfcMcpSession {
        session,
        registry: Registry::standard(),
    }))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ifc_mcp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ifc_mcp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// New session with a fresh model. GUIDs are reproducible when `seeded`.
/// Returns NULL on failure.
///
/// # Safety
/// `project_name` must be NULL or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_session_new(project_name: *const c_char, seed: u64, seeded: bool) -> *mut IfcMcpSession {
    let mut out = ptr::null_mut();
    guarded(|| {
        let name = if project_name.is_null() {
            "My Project"
        } else {
            match text(project_name, "project_name") {
                Ok(n) => n,
                Err(s) => return s,
            }
        };
        out = handle(Session::new(IfcModel::with_generator(name, generator(seed, seeded))));
        IfcMcpStatus::Ok
    });
    out
}

/// Session over a model read from an IFC file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_session_open(
    path: *const c_char,
    seed: u64,
    seeded: bool,
    out: *mut *mut IfcMcpSession,
) -> IfcMcpStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IfcMcpStatus::NullArgument, "out is NULL");
        }
        *out = ptr::null_mut();
        let path = match text(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => return fail(IfcMcpStatus::Io, format!("{path}: {e}")),
        };
        match IfcModel::from_step(&bytes, generator(seed, seeded)) {
            Ok(m) => {
                *out = handle(Session::new(m));
                IfcMcpStatus::Ok
            }
            Err(e) => fail(IfcMcpStatus::Model, e.to_string()),
        }
    })
}

/// Releases a session. NULL is ignored.
///
/// # Safety
/// `session` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_session_free(session: *mut IfcMcpSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Writes the session model to an IFC file.
///
/// # Safety
/// `session` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_session_save(session: *mut IfcMcpSession, path: *const c_char) -> IfcMcpStatus {
    guarded(|| {
        let Some(s) = session.as_mut() else {
            return fail(IfcMcpStatus::NullArgument, "session is NULL");
        };
        let path = match text(path, "path") {
            Ok(p) => p,
            Err(st) => return st,
        };
        let bytes = match s.session.model.to_step() {
            Ok(b) => b,
            Err(e) => return fail(IfcMcpStatus::Model, e.to_string()),
        };
        match std::fs::write(Path::new(path), bytes) {
            Ok(()) => IfcMcpStatus::Ok,
            Err(e) => fail(IfcMcpStatus::Io, format!("{path}: {e}")),
        }
    })
}

/// Handles one JSON-RPC message. `*response` receives the response frame,
/// or NULL for notifications.
///
/// # Safety
/// `session` must be a live handle, `request` a valid NUL-terminated string
/// and `response` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_handle_message(
    session: *mut IfcMcpSession,
    request: *const c_char,
    response: *mut *mut c_char,
) -> IfcMcpStatus {
    guarded(|| {
        if response.is_null() {
            return fail(IfcMcpStatus::NullArgument, "response is NULL");
        }
        *response = ptr::null_mut();
        let Some(s) = session.as_mut() else {
            return fail(IfcMcpStatus::NullArgument, "session is NULL");
        };
        let line = match text(request, "request") {
            Ok(l) => l,
            Err(st) => return st,
        };
        emit(response, handle_line(&s.registry, &mut s.session, line));
        IfcMcpStatus::Ok
    })
}

/// Calls a tool directly. `args_json` may be NULL for no arguments.
/// `*result` receives the tool result, the tool error payload, or the
/// schema violations, depending on the status.
///
/// # Safety
/// `session` must be a live handle, `name` a valid NUL-terminated string,
/// `args_json` NULL or a valid NUL-terminated string, and `result` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_call_tool(
    session: *mut IfcMcpSession,
    name: *const c_char,
    args_json: *const c_char,
    result: *mut *mut c_char,
) -> IfcMcpStatus {
    guarded(|| {
        if result.is_null() {
            return fail(IfcMcpStatus::NullArgument, "result is NULL");
        }
        *result = ptr::null_mut();
        let Some(s) = session.as_mut() else {
            return fail(IfcMcpStatus::NullArgument, "session is NULL");
        };
        let name = match text(name, "name") {
            Ok(n) => n,
            Err(st) => return st,
        };
        let args = if args_json.is_null() {
            serde_json::json!({})
        } else {
            let raw = match text(args_json, "args_json") {
                Ok(a) => a,
                Err(st) => return st,
            };
            match serde_json::from_str(raw) {
                Ok(v) => v,
                Err(e) => return fail(IfcMcpStatus::InvalidJson, e.to_string()),
            }
        };
        match s.session.call_tool(&s.registry, name, &args) {
            CallOutcome::Ok(v) => {
                emit(result, Some(v.to_string()));
                IfcMcpStatus::Ok
            }
            CallOutcome::Failed(f) => {
                emit(result, Some(f.to_json().to_string()));
                fail(IfcMcpStatus::ToolFailed, format!("{}: {}", f.code, f.message))
            }
            CallOutcome::InvalidParams(v) => {
                emit(result, Some(serde_json::json!({ "violations": v }).to_string()));
                fail(IfcMcpStatus::InvalidParams, format!("invalid arguments for {name}"))
            }
            CallOutcome::UnknownTool(n) => fail(IfcMcpStatus::UnknownTool, format!("unknown tool: {n}")),
        }
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ifc_mcp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
