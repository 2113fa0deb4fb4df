use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ifc_mcp_ffi::*;
use serde_json::Value;

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    ifc_mcp_string_free(s);
    out
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn session_roundtrip() {
    unsafe {
        let s = ifc_mcp_session_new(c("My Project").as_ptr(), 7, true);
        assert!(!s.is_null());

        let mut out = ptr::null_mut();
        let st = ifc_mcp_call_tool(s, c("create_wall").as_ptr(), c(r#"{"start":[0,0],"end":[10,0]}"#).as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::Ok);
        let v: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["guid"].as_str().unwrap().len(), 22);

        let st = ifc_mcp_call_tool(s, c("create_wall").as_ptr(), c(r#"{"start":[0,0],"end":[1,0],"height":"x"}"#).as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::InvalidParams);
        assert!(take(out).contains("/height"));

        let st = ifc_mcp_call_tool(s, c("get_object_info").as_ptr(), c(r#"{"guid":"0000000000000000000000"}"#).as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::ToolFailed);
        assert!(take(out).contains("UnknownGuid"));
        assert!(CStr::from_ptr(ifc_mcp_last_error()).to_str().unwrap().starts_with("UnknownGuid"));

        let st = ifc_mcp_call_tool(s, c("nope").as_ptr(), ptr::null(), &mut out);
        assert_eq!(st, IfcMcpStatus::UnknownTool);
        assert!(out.is_null());

        let st = ifc_mcp_call_tool(s, c("get_scene_info").as_ptr(), c("{").as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::InvalidJson);

        let st = ifc_mcp_handle_message(s, c(r#"{"jsonrpc":"2.0","id":1,"method":"tools/list"}"#).as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::Ok);
        let v: Value = serde_json::from_str(&take(out)).unwrap();
        assert!(v["result"]["tools"].as_array().unwrap().len() >= 20);

        let st = ifc_mcp_handle_message(s, c(r#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#).as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::Ok);
        assert!(out.is_null());

        let dir = tempfile::tempdir().unwrap();
        let path = c(dir.path().join("m.ifc").to_str().unwrap());
        assert_eq!(ifc_mcp_session_save(s, path.as_ptr()), IfcMcpStatus::Ok);
        ifc_mcp_session_free(s);

        let mut reopened = ptr::null_mut();
        assert_eq!(ifc_mcp_session_open(path.as_ptr(), 0, false, &mut reopened), IfcMcpStatus::Ok);
        let st = ifc_mcp_call_tool(reopened, c("execute_ifc_query").as_ptr(), c(r#"{"query":"walls | sum(length)"}"#).as_ptr(), &mut out);
        assert_eq!(st, IfcMcpStatus::Ok);
        let v: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["result"], 10.0);
        ifc_mcp_session_free(reopened);
    }
}

#[test]
fn null_and_io_errors() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(ifc_mcp_call_tool(ptr::null_mut(), c("x").as_ptr(), ptr::null(), &mut out), IfcMcpStatus::NullArgument);
        let mut s = ptr::null_mut();
        assert_eq!(ifc_mcp_session_open(c("/nonexistent/x.ifc").as_ptr(), 0, false, &mut s), IfcMcpStatus::Io);
        assert!(s.is_null());
        assert!(!ifc_mcp_last_error().is_null());
        ifc_mcp_session_free(ptr::null_mut());
        ifc_mcp_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(ifc_mcp_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("ifc_mcp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["ifc_mcp_session_new", "ifc_mcp_call_tool", "ifc_mcp_handle_message", "ifc_mcp_string_free", "IFC_MCP_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    assert!(status.success());
}
