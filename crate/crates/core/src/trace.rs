//! Scripted tool-call replay.
//!
//! A trace is a JSON object with a `steps` list. Each step names a `tool`
//! and its `args`, or sets `"reload": true` to write the model to STEP and
//! read it back. String values of the form `$N.path` are replaced by the
//! value at `path` (dot separated, numeric segments index arrays) in the
//! result of step `N`, counting from 1. An optional `expect` object checks:
//!
//! - `result`: path to expected value, numbers compared within `tolerance`
//! - `lengths`: path to expected array length
//! - `overview_counts`: IFC class to expected count in the scene overview
//! - `queries`: `[{"query": ..., "equals": ...}]` evaluated read-only
//! - `is_error` / `error`: the call must fail, optionally with that code
//!
//! Steps run through [`Session::call_tool`], the same path `tools/call` uses.

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::mcp::{CallOutcome, Registry, Session};
use crate::model::IfcModel;
use crate::query::{eval_query, parse_query};
use crate::scene::get_ifc_scene_overview;

fn default_args() -> Value {
    json!({})
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
pub struct TraceScript {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TraceStep {
    #[serde(default)]
    pub tool: Option<String>,
    #[serde(default = "default_args")]
    pub args: Value,
    #[serde(default)]
    pub reload: bool,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub expect: Expect,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct Expect {
    #[serde(default)]
    pub result: Map<String, Value>,
    #[serde(default)]
    pub lengths: Map<String, Value>,
    #[serde(default)]
    pub overview_counts: Map<String, Value>,
    #[serde(default)]
    pub queries: Vec<QueryExpect>,
    #[serde(default)]
    pub is_error: Option<bool>,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct QueryExpect {
    pub query: String,
    pub equals: Value,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("step {index} failed: {reason}")]
    StepFailed { index: usize, reason: String },
    #[error("invalid trace: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub index: usize,
    pub label: String,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub steps: Vec<StepReport>,
    pub error: Option<TraceError>,
}

impl TraceReport {
    pub fn passed(&self) -> bool {
        self.error.is_none()
    }
}

pub fn parse_trace(text: &str) -> Result<TraceScript, TraceError> {
    serde_json::from_str(text).map_err(|e| TraceError::Invalid(e.to_string()))
}

/// Value at a dot-separated path.
pub fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(v);
    }
    path.split('.').try_fold(v, |cur, seg| match cur {
        Value::Array(items) => items.get(seg.parse::<usize>().ok()?),
        Value::Object(map) => map.get(seg),
        _ => None,
    })
}

fn substitute(v: &Value, results: &[Value], index: usize) -> Result<Value, String> {
    Ok(match v {
        Value::String(s) => match reference(s) {
            Some((n, path)) => {
                if n == 0 || n >= index {
                    return Err(format!("{s} does not refer to an earlier step"));
                }
                lookup(&results[n - 1], path)
                    .cloned()
                    .ok_or_else(|| format!("step {n} result has no field {path}"))?
            }
            None => v.clone(),
        },
        Value::Array(items) => Value::Array(items.iter().map(|x| substitute(x, results, index)).collect::<Result<_, _>>()?),
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, x)| Ok((k.clone(), substitute(x, results, index)?)))
                .collect::<Result<_, String>>()?,
        ),
        other => other.clone(),
    })
}

/// `$N` or `$N.path`.
fn reference(s: &str) -> Option<(usize, &str)> {
    let rest = s.strip_prefix('$')?;
    let digits = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let n = rest[..digits].parse().ok()?;
    match &rest[digits..] {
        "" => Some((n, "")),
        tail => tail.strip_prefix('.').map(|p| (n, p)),
    }
}

/// Structural equality with numbers compared within `tol`.
pub fn approx_eq(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            (x.as_f64().unwrap_or(f64::NAN) - y.as_f64().unwrap_or(f64::NAN)).abs() <= tol
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| approx_eq(p, q, tol)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, p)| y.get(k).is_some_and(|q| approx_eq(p, q, tol)))
        }
        _ => a == b,
    }
}

fn reload(model: &mut IfcModel) -> Result<(), String> {
    let bytes = model.to_step().map_err(|e| e.to_string())?;
    let generator = model.take_generator();
    let mut fresh = IfcModel::from_step(&bytes, Default::default()).map_err(|e| e.to_string())?;
    fresh.set_generator(generator);
    *model = fresh;
    Ok(())
}

fn check(session: &Session, expect: &Expect, result: &Value, results: &[Value], index: usize) -> Result<(), String> {
    let tol = expect.tolerance.unwrap_or_else(default_tolerance);
    for (path, want) in &expect.result {
        let want = substitute(want, results, index)?;
        let got = lookup(result, path).ok_or_else(|| format!("result has no field {path}"))?;
        if !approx_eq(got, &want, tol) {
            return Err(format!("{path} is {got}, expected {want}"));
        }
    }
    for (path, want) in &expect.lengths {
        let got = lookup(result, path)
            .and_then(Value::as_array)
            .ok_or_else(|| format!("{path} is not an array"))?
            .len();
        if Some(got as u64) != want.as_u64() {
            return Err(format!("{path} has {got} items, expected {want}"));
        }
    }
    if !expect.overview_counts.is_empty() {
        let overview = get_ifc_scene_overview(&session.model);
        for (class, want) in &expect.overview_counts {
            let got = overview["class_counts"].get(class).cloned().unwrap_or(json!(0));
            if got.as_u64() != want.as_u64() {
                return Err(format!("{class} count is {got}, expected {want}"));
            }
        }
    }
    for q in &expect.queries {
        let prog = parse_query(&q.query).map_err(|e| format!("{}: {e}", q.query))?;
        let out = eval_query(&session.model, &prog).map_err(|e| format!("{}: {e}", q.query))?;
        if !approx_eq(&out.result, &q.equals, tol) {
            return Err(format!("{} returned {}, expected {}", q.query, out.result, q.equals));
        }
    }
    Ok(())
}

fn run_step(
    registry: &Registry,
    session: &mut Session,
    step: &TraceStep,
    results: &[Value],
    index: usize,
) -> Result<Value, String> {
    if step.reload {
        reload(&mut session.model)?;
        let empty = json!({});
        check(session, &step.expect, &empty, results, index)?;
        return Ok(empty);
    }
    let name = step.tool.as_deref().ok_or("step names neither a tool nor a reload")?;
    let args = substitute(&step.args, results, index)?;
    let (value, failure) = match session.call_tool(registry, name, &args) {
        CallOutcome::Ok(v) => (v, None),
        CallOutcome::Failed(f) => (f.to_json(), Some(f.code)),
        CallOutcome::InvalidParams(v) => (
            json!({"error": "InvalidParams", "violations": v}),
            Some("InvalidParams".to_string()),
        ),
        CallOutcome::UnknownTool(n) => return Err(format!("unknown tool {n}")),
    };
    let want_error = step.expect.is_error.unwrap_or(false) || step.expect.error.is_some();
    match (&failure, want_error) {
        (None, true) => return Err(format!("expected an error, got {value}")),
        (Some(_), false) => return Err(format!("tool failed: {value}")),
        (Some(code), true) => {
            if let Some(want) = &step.expect.error {
                if want != code {
                    return Err(format!("error {code}, expected {want}"));
                }
            }
        }
        (None, false) => {}
    }
    check(session, &step.expect, &value, results, index)?;
    Ok(value)
}

/// Runs every step in order and stops at the first failure.
pub fn run_trace(registry: &Registry, session: &mut Session, script: &TraceScript) -> TraceReport {
    for (i, step) in script.steps.iter().enumerate() {
        if let Some(name) = &step.tool {
            if registry.get(name).is_none() {
                return TraceReport {
                    steps: Vec::new(),
                    error: Some(TraceError::StepFailed {
                        index: i + 1,
                        reason: format!("unknown tool {name}"),
                    }),
                };
            }
        }
    }
    let mut results: Vec<Value> = Vec::with_capacity(script.steps.len());
    let mut steps = Vec::with_capacity(script.steps.len());
    for (i, step) in script.steps.iter().enumerate() {
        let index = i + 1;
        let label = if step.reload {
            "reload".to_string()
        } else {
            step.tool.clone().unwrap_or_default()
        };
        match run_step(registry, session, step, &results, index) {
            Ok(v) => {
                results.push(v);
                steps.push(StepReport {
                    index,
                    label,
                    passed: true,
                    message: step.note.clone(),
                });
            }
            Err(reason) => {
                steps.push(StepReport {
                    index,
                    label,
                    passed: false,
                    message: reason.clone(),
                });
                return TraceReport {
                    steps,
                    error: Some(TraceError::StepFailed { index, reason }),
                };
            }
        }
    }
    TraceReport { steps, error: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> TraceReport {
        let registry = Registry::standard();
        let mut s = Session::new(IfcModel::new_seeded("P", 9));
        run_trace(&registry, &mut s, &parse_trace(text).unwrap())
    }

    #[test]
    fn substitution_and_expectations() {
        let r = run(
            r#"{"steps": [
                {"tool": "create_wall", "args": {"start": [0, 0], "end": [4, 0]}},
                {"tool": "create_door", "args": {"wall_guid": "$1.guid", "position_along_axis": 2},
                 "expect": {"result": {"wall_guid": "$1.guid", "position_along_axis": 2.0},
                            "overview_counts": {"IfcDoor": 1, "IfcWindow": 0},
                            "queries": [{"query": "walls | sum(length)", "equals": 4}]}},
                {"reload": true, "expect": {"queries": [{"query": "doors | count", "equals": 1}]}},
                {"tool": "get_object_info", "args": {"guid": "$2.guid"},
                 "expect": {"result": {"relationships.host.guid": "$1.guid"}, "lengths": {"classifications": 0}}},
                {"tool": "create_wall", "args": {"start": [0, 0], "end": [0, 0]}, "expect": {"error": "InvalidParams"}}
            ]}"#,
        );
        assert!(r.passed(), "{:?}", r);
        assert_eq!(r.steps.len(), 5);
        assert_eq!(r.steps[2].label, "reload");
    }

    #[test]
    fn missing_reference_fails_that_step() {
        let r = run(
            r#"{"steps": [
                {"tool": "get_ifc_scene_overview"},
                {"tool": "get_object_info", "args": {"guid": "$1.guid"}},
                {"tool": "get_ifc_scene_overview"}
            ]}"#,
        );
        assert!(matches!(r.error, Some(TraceError::StepFailed { index: 2, .. })));
        assert_eq!(r.steps.len(), 2);
    }

    #[test]
    fn failed_assertion() {
        let r = run(r#"{"steps": [{"tool": "get_ifc_scene_overview", "expect": {"overview_counts": {"IfcWall": 1}}}]}"#);
        assert!(matches!(r.error, Some(TraceError::StepFailed { index: 1, .. })));
        let r = run(r#"{"steps": [{"tool": "get_scene_info"}, {"tool": "no_such_tool"}]}"#);
        assert!(matches!(r.error, Some(TraceError::StepFailed { index: 2, .. })));
        assert!(r.steps.is_empty());
    }

    #[test]
    fn references() {
        assert_eq!(reference("$12.guids.0"), Some((12, "guids.0")));
        assert_eq!(reference("$3"), Some((3, "")));
        assert_eq!(reference("$x"), None);
        assert_eq!(reference("$3guid"), None);
        assert_eq!(lookup(&json!({"a": [1, {"b": 2}]}), "a.1.b"), Some(&json!(2)));
        assert!(approx_eq(&json!([1.0, 2.0]), &json!([1, 2.0000000001]), 1e-9));
    }
}
