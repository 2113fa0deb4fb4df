use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::Arc;

use serde_json::{json, Value};

use super::registry::Registry;
use super::session::{CallOutcome, Session};
use crate::json::pretty;

pub const PROTOCOL_VERSION: &str = "2025-06-18";
pub const SERVER_NAME: &str = "ifc-mcp";

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;

fn error(id: Value, code: i64, message: &str, data: Option<Value>) -> Value {
    let mut err = json!({"code": code, "message": message});
    if let Some(d) = data {
        err["data"] = d;
    }
    json!({"jsonrpc": "2.0", "id": id, "error": err})
}

fn success(id: Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

fn text_content(payload: &Value, is_error: bool) -> Value {
    json!({
        "content": [{"type": "text", "text": pretty(payload)}],
        "isError": is_error,
    })
}

/// Handles one decoded message. Notifications yield `None`.
pub fn handle_request(registry: &Registry, session: &mut Session, msg: &Value) -> Option<Value> {
    let Some(obj) = msg.as_object() else {
        return Some(error(Value::Null, INVALID_REQUEST, "Invalid Request", None));
    };
    let id = obj.get("id").cloned();
    let valid_id = matches!(id, None | Some(Value::String(_) | Value::Number(_) | Value::Null));
    let method = obj.get("method").and_then(Value::as_str);
    if obj.get("jsonrpc").and_then(Value::as_str) != Some("2.0") || !valid_id || method.is_none() {
        let id = if valid_id { id.unwrap_or(Value::Null) } else { Value::Null };
        return Some(error(id, INVALID_REQUEST, "Invalid Request", None));
    }
    let method = method.expect("checked above");
    let params = obj.get("params").cloned().unwrap_or_else(|| json!({}));
    let response = dispatch(registry, session, method, &params);
    let id = id?;
    Some(match response {
        Ok(result) => success(id, result),
        Err((code, message, data)) => error(id, code, &message, data),
    })
}

type RpcError = (i64, String, Option<Value>);

fn dispatch(registry: &Registry, session: &mut Session, method: &str, params: &Value) -> Result<Value, RpcError> {
    match method {
        "initialize" => Ok(json!({
            "protocolVersion": PROTOCOL_VERSION,
            "serverInfo": {
                "name": SERVER_NAME,
                "version": env!("CARGO_PKG_VERSION"),
                "protocolVersion": PROTOCOL_VERSION,
            },
            "capabilities": {"tools": {"listChanged": false}},
        })),
        "ping" => Ok(json!({})),
        "tools/list" => {
            let tools: Vec<Value> = registry.descriptors(session.groups()).iter().map(|d| d.to_json()).collect();
            Ok(json!({ "tools": tools }))
        }
        "tools/call" => {
            let Some(name) = params.get("name").and_then(Value::as_str) else {
                return Err((INVALID_PARAMS, "Invalid params".into(), Some(json!({"violations": [{"path": "/name", "message": "tool name must be a string"}]}))));
            };
            let args = params.get("arguments").cloned().unwrap_or_else(|| json!({}));
            if !args.is_object() {
                return Err((INVALID_PARAMS, "Invalid params".into(), Some(json!({"tool": name, "violations": [{"path": "", "message": "arguments must be an object"}]}))));
            }
            match session.call_tool(registry, name, &args) {
                CallOutcome::Ok(v) => Ok(text_content(&v, false)),
                CallOutcome::Failed(f) => Ok(text_content(&f.to_json(), true)),
                CallOutcome::UnknownTool(n) => Ok(text_content(
                    &json!({"error": "UnknownTool", "message": format!("unknown tool: {n}")}),
                    true,
                )),
                CallOutcome::InvalidParams(v) => Err((
                    INVALID_PARAMS,
                    "Invalid params".into(),
                    Some(json!({"tool": name, "violations": v})),
                )),
            }
        }
        _ if method.starts_with("notifications/") => Ok(Value::Null),
        _ => Err((METHOD_NOT_FOUND, format!("Method not found: {method}"), None)),
    }
}

/// Handles one line of input; undecodable JSON yields a parse error frame.
pub fn handle_line(registry: &Registry, session: &mut Session, line: &str) -> Option<String> {
    let response = match serde_json::from_str::<Value>(line) {
        Ok(msg) => handle_request(registry, session, &msg)?,
        Err(e) => error(Value::Null, PARSE_ERROR, "Parse error", Some(json!(e.to_string()))),
    };
    Some(response.to_string())
}

/// Newline-delimited request loop until end of input.
pub fn serve_lines(registry: &Registry, session: &mut Session, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(resp) = handle_line(registry, session, &line) {
            writeln!(output, "{resp}")?;
            output.flush()?;
        }
    }
    Ok(())
}

pub fn serve_stdio(registry: &Registry, session: &mut Session) -> io::Result<()> {
    let stdin = io::stdin();
    serve_lines(registry, session, stdin.lock(), io::stdout().lock())
}

/// Accepts local TCP clients; each connection gets its own session.
pub fn serve_tcp(
    registry: Arc<Registry>,
    port: u16,
    new_session: impl Fn() -> io::Result<Session> + Send + Sync + 'static,
) -> io::Result<()> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    let new_session = Arc::new(new_session);
    for stream in listener.incoming() {
        let stream = stream?;
        let registry = Arc::clone(&registry);
        let new_session = Arc::clone(&new_session);
        std::thread::spawn(move || -> io::Result<()> {
            let mut session = new_session()?;
            let reader = BufReader::new(stream.try_clone()?);
            serve_lines(&registry, &mut session, reader, stream)
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcp::parse_groups;
    use crate::model::IfcModel;

    fn setup() -> (Registry, Session) {
        (Registry::standard(), Session::new(IfcModel::new_seeded("My Project", 1)))
    }

    fn call(r: &Registry, s: &mut Session, id: i64, method: &str, params: Value) -> Value {
        handle_request(r, s, &json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params})).unwrap()
    }

    fn payload(resp: &Value) -> Value {
        serde_json::from_str(resp["result"]["content"][0]["text"].as_str().unwrap()).unwrap()
    }

    #[test]
    fn initialize_and_list() {
        let (r, mut s) = setup();
        let init = call(&r, &mut s, 1, "initialize", json!({}));
        assert_eq!(init["result"]["protocolVersion"], PROTOCOL_VERSION);
        assert_eq!(init["id"], 1);
        let a = call(&r, &mut s, 2, "tools/list", json!({}));
        let b = call(&r, &mut s, 3, "tools/list", json!({}));
        assert_eq!(a["result"].to_string(), b["result"].to_string());
        assert!(a["result"]["tools"].as_array().unwrap().len() >= 20);
    }

    #[test]
    fn call_and_errors() {
        let (r, mut s) = setup();
        let ok = call(&r, &mut s, 1, "tools/call", json!({"name": "create_wall", "arguments": {"start": [0, 0], "end": [5, 0]}}));
        assert_eq!(ok["result"]["isError"], false);
        assert_eq!(payload(&ok)["guid"].as_str().unwrap().len(), 22);

        let bad = call(&r, &mut s, 2, "tools/call", json!({"name": "create_wall", "arguments": {"start": [0, 0], "end": [5, 0], "height": "-1"}}));
        assert_eq!(bad["error"]["code"], INVALID_PARAMS);
        assert_eq!(bad["error"]["data"]["violations"][0]["path"], "/height");
        assert!(bad.get("result").is_none());

        let neg = call(&r, &mut s, 3, "tools/call", json!({"name": "create_wall", "arguments": {"start": [0, 0], "end": [5, 0], "height": -1}}));
        assert!(neg["error"]["data"]["violations"][0]["message"].as_str().unwrap().contains("greater than 0"));

        let unknown = call(&r, &mut s, 4, "tools/call", json!({"name": "unknown_tool"}));
        assert_eq!(unknown["result"]["isError"], true);
        assert!(payload(&unknown)["message"].as_str().unwrap().contains("unknown tool"));

        let failed = call(&r, &mut s, 5, "tools/call", json!({"name": "get_object_info", "arguments": {"guid": "0000000000000000000000"}}));
        assert_eq!(failed["result"]["isError"], true);
        assert_eq!(payload(&failed)["error"], "UnknownGuid");

        let missing = call(&r, &mut s, 6, "nope", json!({}));
        assert_eq!(missing["error"]["code"], METHOD_NOT_FOUND);
        assert_eq!(s.calls, 2);
    }

    #[test]
    fn framing() {
        let (r, mut s) = setup();
        let parse = handle_line(&r, &mut s, "{not json").unwrap();
        let v: Value = serde_json::from_str(&parse).unwrap();
        assert_eq!(v["error"]["code"], PARSE_ERROR);
        assert_eq!(v["id"], Value::Null);
        assert!(handle_line(&r, &mut s, r#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#).is_none());
        assert!(handle_line(&r, &mut s, r#"{"jsonrpc":"2.0","method":"tools/list"}"#).is_none());
        let v: Value = serde_json::from_str(&handle_line(&r, &mut s, r#"{"id":1,"method":"ping"}"#).unwrap()).unwrap();
        assert_eq!(v["error"]["code"], INVALID_REQUEST);
        let mut out = Vec::new();
        let input = "{\"jsonrpc\":\"2.0\",\"id\":\"a\",\"method\":\"ping\"}\n\n{\"jsonrpc\":\"2.0\",\"method\":\"notifications/x\"}\n";
        serve_lines(&r, &mut s, input.as_bytes(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\"jsonrpc\":\"2.0\",\"id\":\"a\",\"result\":{}}\n");
    }

    #[test]
    fn query_group_only() {
        let r = Registry::standard();
        let mut s = Session::new(IfcModel::new_seeded("P", 1)).with_groups(parse_groups("q").unwrap());
        let list = call(&r, &mut s, 1, "tools/list", json!({}));
        let names: Vec<&str> = list["result"]["tools"].as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap()).collect();
        assert!(names.iter().all(|n| !n.starts_with("create_")));
        let blocked = call(&r, &mut s, 2, "tools/call", json!({"name": "create_wall", "arguments": {"start": [0, 0], "end": [1, 0]}}));
        assert_eq!(blocked["result"]["isError"], true);
        let rename = call(&r, &mut s, 3, "tools/call", json!({"name": "execute_ifc_query", "arguments": {"query": "walls | rename(\"x\")"}}));
        assert_eq!(payload(&rename)["error"], "ReadOnly");
    }

    #[test]
    fn edit_tools() {
        let (r, mut s) = setup();
        let wall = payload(&call(&r, &mut s, 1, "tools/call", json!({"name": "create_wall", "arguments": {"start": [0, 0], "end": [5, 0]}})))["guid"].clone();
        let pset = call(&r, &mut s, 2, "tools/call", json!({"name": "add_property_set", "arguments": {"guid": wall, "pset_name": "Thermal_Properties", "properties": {"U-value": 0.25, "Insulation_Type": "Mineral Wool"}}}));
        assert_eq!(pset["result"]["isError"], false);
        let q = call(&r, &mut s, 3, "tools/call", json!({"name": "execute_ifc_query", "arguments": {"query": "walls | list(pset(\"Thermal_Properties\").U-value)"}}));
        // `U-value` is not an identifier, so the two-argument form is needed
        assert_eq!(q["result"]["isError"], true);
        let q = call(&r, &mut s, 4, "tools/call", json!({"name": "execute_ifc_query", "arguments": {"query": "walls | list(pset(\"Thermal_Properties\", \"U-value\"))"}}));
        assert_eq!(payload(&q)["result"], json!([0.25]));
        let e = call(&r, &mut s, 5, "tools/call", json!({"name": "edit_attributes", "arguments": {"guid": wall, "attributes": {"Description": "outer"}}}));
        assert_eq!(payload(&e)["changed"][0]["new"], "outer");
        let d = call(&r, &mut s, 6, "tools/call", json!({"name": "delete_element", "arguments": {"guid": wall}}));
        assert!(payload(&d)["removed"].as_u64().unwrap() >= 1);
    }
}
