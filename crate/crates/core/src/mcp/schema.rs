//! The JSON Schema subset used by tool descriptors: `type`, `properties`,
//! `required`, `items`, `enum`, numeric bounds and array length. Schemas
//! are open, so unknown properties pass. Values are never coerced.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// JSON pointer into the arguments.
    pub path: String,
    pub message: String,
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn has_type(v: &Value, ty: &str) -> bool {
    match ty {
        "number" => v.is_number(),
        "integer" => match v {
            Value::Number(n) => n.is_i64() || n.is_u64() || n.as_f64().is_some_and(|f| f.fract() == 0.0),
            _ => false,
        },
        other => type_name(v) == other,
    }
}

fn escape_pointer(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

/// Checks `value` against `schema` and lists every violation found.
pub fn validate(schema: &Value, value: &Value) -> Vec<Violation> {
    let mut out = Vec::new();
    check(schema, value, "", &mut out);
    out
}

fn check(schema: &Value, v: &Value, path: &str, out: &mut Vec<Violation>) {
    let mut fail = |message: String| {
        out.push(Violation {
            path: path.to_string(),
            message,
        })
    };
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => has_type(v, t),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| has_type(v, t)),
            _ => true,
        };
        if !ok {
            fail(format!("expected {}, found {}", ty_text(ty), type_name(v)));
            return;
        }
    }
    if let Some(Value::Array(allowed)) = schema.get("enum") {
        if !allowed.contains(v) {
            fail(format!("{v} is not one of {}", Value::Array(allowed.clone())));
        }
    }
    if let Some(x) = v.as_f64() {
        let bound = |k: &str| schema.get(k).and_then(Value::as_f64);
        if let Some(m) = bound("minimum") {
            if x < m {
                fail(format!("{x} is less than the minimum {m}"));
            }
        }
        if let Some(m) = bound("maximum") {
            if x > m {
                fail(format!("{x} is greater than the maximum {m}"));
            }
        }
        if let Some(m) = bound("exclusiveMinimum") {
            if x <= m {
                fail(format!("{x} must be greater than {m}"));
            }
        }
        if let Some(m) = bound("exclusiveMaximum") {
            if x >= m {
                fail(format!("{x} must be less than {m}"));
            }
        }
    }
    if let Some(s) = v.as_str() {
        if let Some(m) = schema.get("minLength").and_then(Value::as_u64) {
            if (s.chars().count() as u64) < m {
                fail(format!("string shorter than {m} characters"));
            }
        }
    }
    if let Value::Array(items) = v {
        if let Some(m) = schema.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < m {
                fail(format!("expected at least {m} items, found {}", items.len()));
            }
        }
        if let Some(m) = schema.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > m {
                fail(format!("expected at most {m} items, found {}", items.len()));
            }
        }
        if let Some(item_schema) = schema.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(item_schema, item, &format!("{path}/{i}"), out);
            }
        }
    }
    if let Value::Object(map) = v {
        if let Some(Value::Array(req)) = schema.get("required") {
            for name in req.iter().filter_map(Value::as_str) {
                if !map.contains_key(name) {
                    out.push(Violation {
                        path: format!("{path}/{}", escape_pointer(name)),
                        message: "required property is missing".into(),
                    });
                }
            }
        }
        if let Some(Value::Object(props)) = schema.get("properties") {
            for (name, sub) in props {
                if let Some(child) = map.get(name) {
                    check(sub, child, &format!("{path}/{}", escape_pointer(name)), out);
                }
            }
        }
        if let Some(sub @ Value::Object(_)) = schema.get("additionalProperties") {
            let props = schema.get("properties").and_then(Value::as_object);
            for (name, child) in map {
                if props.is_none_or(|p| !p.contains_key(name)) {
                    check(sub, child, &format!("{path}/{}", escape_pointer(name)), out);
                }
            }
        }
    }
}

fn ty_text(ty: &Value) -> String {
    match ty {
        Value::String(s) => s.clone(),
        Value::Array(ts) => ts.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(" or "),
        other => other.to_string(),
    }
}
