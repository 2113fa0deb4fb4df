use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use super::parser::{BinOp, Expr, QueryProgram, Selector, SetTarget, TemplatePart, Terminal, ATTRIBUTES, FIELDS};
use super::QueryError;
use crate::geometry::read::{axis_length, height, profile_area};
use crate::model::{attribute_index, display_class, EntityKind, IfcModel, PropertySpec, PropertyValue};
use crate::scene::listed_objects;
use crate::step::StepValue;
use crate::tools::is_wall;

/// Default evaluation budget in expression steps.
pub const STEP_BUDGET: u64 = 1_000_000;

/// Attributes a mutation may write.
const WRITABLE: &[&str] = &["Name", "Description", "ObjectType", "LongName", "Tag"];

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Null,
    Bool(bool),
    Num(f64),
    Str(String),
}

impl Val {
    fn type_name(&self) -> &'static str {
        match self {
            Val::Null => "null",
            Val::Bool(_) => "bool",
            Val::Num(_) => "number",
            Val::Str(_) => "string",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Val::Null => Value::Null,
            Val::Bool(b) => Value::Bool(*b),
            Val::Num(n) => serde_json::Number::from_f64(*n).map_or(Value::Null, Value::Number),
            Val::Str(s) => Value::String(s.clone()),
        }
    }

    /// Text used in templates and string concatenation.
    pub fn display(&self) -> String {
        match self {
            Val::Null => String::new(),
            Val::Bool(b) => b.to_string(),
            Val::Num(n) => format_one_decimal(*n),
            Val::Str(s) => s.clone(),
        }
    }
}

/// One decimal place, rounding halves upwards: 2.25 -> "2.3", 3 -> "3.0".
pub fn format_one_decimal(x: f64) -> String {
    let r = (x * 10.0 + 0.5).floor() / 10.0 + 0.0;
    format!("{r:.1}")
}

fn from_step(v: &StepValue) -> Val {
    match v {
        StepValue::Integer(i) => Val::Num(*i as f64),
        StepValue::Real(r) => Val::Num(*r),
        StepValue::String(s) | StepValue::Enum(s) => Val::Str(s.clone()),
        StepValue::Bool(b) => Val::Bool(*b),
        StepValue::Typed(_, inner) => from_step(inner),
        _ => Val::Null,
    }
}

struct Eval<'m> {
    model: &'m IfcModel,
    steps: u64,
    budget: u64,
}

impl Eval<'_> {
    fn tick(&mut self) -> Result<(), QueryError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(QueryError::BudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn storey_of(&self, id: u64) -> Option<u64> {
        let m = self.model;
        m.containing_storey(id).or_else(|| {
            let host = m
                .opening_filled_by(id)
                .and_then(|o| m.host_of_opening(o))
                .or_else(|| m.host_of_opening(id))?;
            m.containing_storey(host)
        })
    }

    fn field(&self, id: u64, name: &str) -> Val {
        let m = self.model;
        let num = |x: Option<f64>| x.map_or(Val::Null, Val::Num);
        let is_element = m.kind_of(id) == Some(EntityKind::Element);
        match name {
            "length" if is_wall(m, id) => num(axis_length(m, id)),
            "area" if is_wall(m, id) => num(axis_length(m, id).zip(height(m, id)).map(|(l, h)| l * h)),
            "area" if m.class_of(id) == Some("IFCSLAB") => num(profile_area(m, id)),
            "height" if is_element => num(height(m, id)),
            "elevation" if m.class_of(id) == Some("IFCBUILDINGSTOREY") => Val::Num(m.storey_elevation(id)),
            "elevation" => Val::Num(m.world_placement(id).origin.z),
            "storey" => self
                .storey_of(id)
                .and_then(|s| m.name_of(s))
                .map_or(Val::Null, Val::Str),
            "name" => m.name_of(id).map_or(Val::Null, Val::Str),
            "guid" => m.guid_of(id).map_or(Val::Null, Val::Str),
            "class" => m.class_of(id).map_or(Val::Null, |c| Val::Str(display_class(c))),
            "selected" => Val::Bool(m.flags(id).selected),
            "visible" => Val::Bool(m.flags(id).visible),
            _ => Val::Null,
        }
    }

    fn attr(&self, id: u64, name: &str) -> Val {
        if name == "GlobalId" {
            return self.model.guid_of(id).map_or(Val::Null, Val::Str);
        }
        let e = self.model.get(id).expect("selected ids exist");
        attribute_index(e, name).map_or(Val::Null, |i| from_step(e.attr(i)))
    }

    fn expr(&mut self, id: u64, e: &Expr) -> Result<Val, QueryError> {
        self.tick()?;
        Ok(match e {
            Expr::Num(n) => Val::Num(*n),
            Expr::Str(s) => Val::Str(s.clone()),
            Expr::Bool(b) => Val::Bool(*b),
            Expr::Null => Val::Null,
            Expr::Attr(a) => self.attr(id, a),
            Expr::Field(f) => self.field(id, f),
            Expr::Pset(p, q) => self.model.pset_value(id, p, q).map_or(Val::Null, |v| from_step(&v)),
            Expr::Not(x) => match self.expr(id, x)? {
                Val::Bool(b) => Val::Bool(!b),
                Val::Null => Val::Null,
                v => return Err(mismatch("!", &v, None)),
            },
            Expr::Neg(x) => match self.expr(id, x)? {
                Val::Num(n) => Val::Num(-n),
                Val::Null => Val::Null,
                v => return Err(mismatch("-", &v, None)),
            },
            Expr::Bin(BinOp::And, a, b) => {
                if !truthy("&&", self.expr(id, a)?)? {
                    return Ok(Val::Bool(false));
                }
                Val::Bool(truthy("&&", self.expr(id, b)?)?)
            }
            Expr::Bin(BinOp::Or, a, b) => {
                if truthy("||", self.expr(id, a)?)? {
                    return Ok(Val::Bool(true));
                }
                Val::Bool(truthy("||", self.expr(id, b)?)?)
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.expr(id, a)?, self.expr(id, b)?);
                binary(*op, x, y)?
            }
        })
    }
}

fn op_text(op: BinOp) -> &'static str {
    match op {
        BinOp::Or => "||",
        BinOp::And => "&&",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
    }
}

fn mismatch(op: &str, a: &Val, b: Option<&Val>) -> QueryError {
    QueryError::TypeMismatch(match b {
        Some(b) => format!("{} {op} {}", a.type_name(), b.type_name()),
        None => format!("{op}{}", a.type_name()),
    })
}

/// Null counts as false; anything but a bool is an error.
fn truthy(op: &str, v: Val) -> Result<bool, QueryError> {
    match v {
        Val::Bool(b) => Ok(b),
        Val::Null => Ok(false),
        v => Err(mismatch(op, &v, None)),
    }
}

fn binary(op: BinOp, x: Val, y: Val) -> Result<Val, QueryError> {
    use Val::*;
    let text = op_text(op);
    Ok(match op {
        BinOp::Eq => Bool(x == y),
        BinOp::Ne => Bool(x != y),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = match (&x, &y) {
                (Null, _) | (_, Null) => return Ok(Bool(false)),
                (Num(a), Num(b)) => a.partial_cmp(b),
                (Str(a), Str(b)) => Some(a.cmp(b)),
                _ => return Err(mismatch(text, &x, Some(&y))),
            };
            let Some(ord) = ord else { return Ok(Bool(false)) };
            Bool(match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Le => ord.is_le(),
                BinOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        BinOp::Add => match (&x, &y) {
            (Null, _) | (_, Null) => Null,
            (Num(a), Num(b)) => Num(a + b),
            (Str(_), _) | (_, Str(_)) => Str(x.display() + &y.display()),
            _ => return Err(mismatch(text, &x, Some(&y))),
        },
        BinOp::Sub | BinOp::Mul | BinOp::Div => match (&x, &y) {
            (Null, _) | (_, Null) => Null,
            (Num(a), Num(b)) => match op {
                BinOp::Sub => Num(a - b),
                BinOp::Mul => Num(a * b),
                _ if *b == 0.0 => Null,
                _ => Num(a / b),
            },
            _ => return Err(mismatch(text, &x, Some(&y))),
        },
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators are handled by the caller"),
    })
}

fn check_expr(e: &Expr) -> Result<(), QueryError> {
    match e {
        Expr::Attr(a) if !ATTRIBUTES.contains(&a.as_str()) => Err(QueryError::UnknownField(format!(".{a}"))),
        Expr::Field(f) if !FIELDS.contains(&f.as_str()) => Err(QueryError::UnknownField(f.clone())),
        Expr::Not(x) | Expr::Neg(x) => check_expr(x),
        Expr::Bin(_, a, b) => {
            check_expr(a)?;
            check_expr(b)
        }
        _ => Ok(()),
    }
}

/// Rejects unknown fields before any element is visited.
fn check(prog: &QueryProgram) -> Result<(), QueryError> {
    for (_, f) in &prog.filters {
        check_expr(f)?;
    }
    match &prog.terminal {
        Terminal::Count => Ok(()),
        Terminal::Sum(e) | Terminal::Min(e) | Terminal::Max(e) | Terminal::Avg(e) | Terminal::List(e) => check_expr(e),
        Terminal::Select(cols) => cols.iter().try_for_each(|(_, e)| check_expr(e)),
        Terminal::Set(target, value) => {
            if let SetTarget::Attr(a) = target {
                if !WRITABLE.contains(&a.as_str()) {
                    return Err(QueryError::UnknownAttribute(a.clone()));
                }
            }
            check_expr(value)
        }
        Terminal::Rename(parts) => parts.iter().try_for_each(|p| match p {
            TemplatePart::Field(f) if !FIELDS.contains(&f.as_str()) && !ATTRIBUTES.contains(&f.as_str()) => {
                Err(QueryError::UnknownField(f.clone()))
            }
            _ => Ok(()),
        }),
    }
}

fn select(model: &IfcModel, sel: &Selector) -> Vec<u64> {
    let objects = |ids: Vec<u64>| -> Vec<u64> {
        ids.into_iter()
            .filter(|&id| {
                matches!(
                    model.kind_of(id),
                    Some(EntityKind::Project | EntityKind::Spatial | EntityKind::Element | EntityKind::Type)
                )
            })
            .collect()
    };
    match sel {
        Selector::All => listed_objects(model),
        Selector::Classes(cs) => {
            let ids: BTreeSet<u64> = cs.iter().flat_map(|c| model.ids_of_class(c)).collect();
            objects(ids.into_iter().collect())
        }
    }
}

/// Output of a program: JSON result, execution log and changed GUIDs.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutput {
    pub result: Value,
    pub log: Vec<String>,
    pub changed: Vec<String>,
}

enum Change {
    Attr(String, StepValue),
    Pset(String, String, StepValue),
}

type PlannedChange = (u64, Change, String);

/// Runs selector and filters, then the terminal when it is a read.
/// Mutations come back as a plan of per-element changes.
fn run(
    model: &IfcModel,
    prog: &QueryProgram,
    budget: u64,
) -> Result<(Value, Vec<String>, Vec<PlannedChange>), QueryError> {
    check(prog)?;
    let mut ev = Eval { model, steps: 0, budget };
    let mut ids = select(model, &prog.selector);
    let mut log = vec![format!("select {}: {} objects", prog.selector_text, ids.len())];
    for (text, f) in &prog.filters {
        let before = ids.len();
        let mut kept = Vec::with_capacity(before);
        for id in ids {
            ev.tick()?;
            let v = ev.expr(id, f)?;
            if truthy("filter", v)? {
                kept.push(id);
            }
        }
        ids = kept;
        log.push(format!("filter({text}): {before} -> {}", ids.len()));
    }
    let values = |e: &Expr, ev: &mut Eval| -> Result<Vec<Val>, QueryError> {
        ids.iter()
            .map(|&id| {
                ev.tick()?;
                ev.expr(id, e)
            })
            .collect()
    };
    let numbers = |name: &str, vals: Vec<Val>| -> Result<Vec<f64>, QueryError> {
        vals.into_iter()
            .filter(|v| *v != Val::Null)
            .map(|v| match v {
                Val::Num(n) => Ok(n),
                v => Err(QueryError::TypeMismatch(format!("{name} over {}", v.type_name()))),
            })
            .collect()
    };
    let mut plan = Vec::new();
    let result = match &prog.terminal {
        Terminal::Count => {
            log.push(format!("count = {}", ids.len()));
            json!(ids.len())
        }
        Terminal::Sum(e) => {
            let s: f64 = numbers("sum", values(e, &mut ev)?)?.into_iter().sum();
            log.push(format!("sum = {s}"));
            Val::Num(s).to_json()
        }
        Terminal::Min(e) | Terminal::Max(e) => {
            let is_min = matches!(prog.terminal, Terminal::Min(_));
            let ns = numbers(if is_min { "min" } else { "max" }, values(e, &mut ev)?)?;
            let r = ns.into_iter().reduce(if is_min { f64::min } else { f64::max });
            log.push(format!("{} = {}", if is_min { "min" } else { "max" }, r.map_or("null".into(), |x| x.to_string())));
            r.map_or(Value::Null, |x| Val::Num(x).to_json())
        }
        Terminal::Avg(e) => {
            let ns = numbers("avg", values(e, &mut ev)?)?;
            let r = (!ns.is_empty()).then(|| ns.iter().sum::<f64>() / ns.len() as f64);
            log.push(format!("avg over {} values", ns.len()));
            r.map_or(Value::Null, |x| Val::Num(x).to_json())
        }
        Terminal::List(e) => {
            let vs = values(e, &mut ev)?;
            log.push(format!("list of {} values", vs.len()));
            Value::Array(vs.iter().map(Val::to_json).collect())
        }
        Terminal::Select(cols) => {
            let mut rows = Vec::with_capacity(ids.len());
            for &id in &ids {
                ev.tick()?;
                let mut row = Map::new();
                row.insert("guid".into(), json!(model.guid_of(id)));
                for (text, e) in cols {
                    row.insert(text.clone(), ev.expr(id, e)?.to_json());
                }
                rows.push(Value::Object(row));
            }
            log.push(format!("selected {} rows", rows.len()));
            Value::Array(rows)
        }
        Terminal::Set(target, value) => {
            for &id in &ids {
                ev.tick()?;
                let v = ev.expr(id, value)?;
                plan.push(plan_set(model, id, target, v)?);
            }
            Value::Null
        }
        Terminal::Rename(parts) => {
            for &id in &ids {
                ev.tick()?;
                let mut name = String::new();
                for p in parts {
                    match p {
                        TemplatePart::Text(t) => name.push_str(t),
                        TemplatePart::Field(f) => {
                            let v = if FIELDS.contains(&f.as_str()) { ev.field(id, f) } else { ev.attr(id, f) };
                            name.push_str(&v.display());
                        }
                    }
                }
                plan.push(plan_set(model, id, &SetTarget::Attr("Name".into()), Val::Str(name))?);
            }
            Value::Null
        }
    };
    Ok((result, log, plan.into_iter().flatten().collect()))
}

/// Plans one element's change; `None` when the value is already current.
fn plan_set(
    model: &IfcModel,
    id: u64,
    target: &SetTarget,
    v: Val,
) -> Result<Option<(u64, Change, String)>, QueryError> {
    let e = model.get(id).expect("selected ids exist");
    let guid = model.guid_of(id).unwrap_or_default();
    let spatial = matches!(model.kind_of(id), Some(EntityKind::Project | EntityKind::Spatial));
    match target {
        SetTarget::Attr(a) => {
            if spatial && a != "Name" && a != "Description" {
                return Err(QueryError::UnknownAttribute(format!(
                    "{a} is not writable on spatial element {guid}"
                )));
            }
            let idx = attribute_index(e, a)
                .ok_or_else(|| QueryError::UnknownAttribute(format!("{a} on {}", display_class(&e.class_name))))?;
            let new = match v {
                Val::Str(s) => StepValue::str(s),
                Val::Null => StepValue::Unset,
                v => return Err(QueryError::TypeMismatch(format!("{a} needs a string, got {}", v.type_name()))),
            };
            if *e.attr(idx) == new {
                return Ok(None);
            }
            let old = from_step(e.attr(idx)).display();
            let msg = format!("{guid}: {a} {old:?} -> {:?}", from_step(&new).display());
            Ok(Some((id, Change::Attr(a.clone(), new), msg)))
        }
        SetTarget::Pset(p, q) => {
            if spatial {
                return Err(QueryError::UnknownAttribute(format!(
                    "property sets are not writable on spatial element {guid}"
                )));
            }
            let new = match &v {
                Val::Num(n) => StepValue::typed("IFCREAL", StepValue::Real(*n)),
                Val::Str(s) => StepValue::typed("IFCLABEL", StepValue::str(s)),
                Val::Bool(b) => StepValue::typed("IFCBOOLEAN", StepValue::Bool(*b)),
                Val::Null => return Err(QueryError::TypeMismatch(format!("{p}.{q} cannot be set to null"))),
            };
            if model.pset_value(id, p, q).as_ref() == Some(&new) {
                return Ok(None);
            }
            let msg = format!("{guid}: {p}.{q} = {}", v.display());
            Ok(Some((id, Change::Pset(p.clone(), q.clone(), new), msg)))
        }
    }
}

pub fn eval_query_with_budget(model: &IfcModel, prog: &QueryProgram, budget: u64) -> Result<QueryOutput, QueryError> {
    if prog.terminal.is_mutation() {
        return Err(QueryError::ReadOnly);
    }
    let (result, log, _) = run(model, prog, budget)?;
    Ok(QueryOutput {
        result,
        log,
        changed: Vec::new(),
    })
}

/// Evaluates a read-only program. Mutation programs are rejected.
pub fn eval_query(model: &IfcModel, prog: &QueryProgram) -> Result<QueryOutput, QueryError> {
    eval_query_with_budget(model, prog, STEP_BUDGET)
}

/// Applies a mutation program. Every change is computed and validated
/// before the first one is written.
pub fn mutate_query(model: &mut IfcModel, prog: &QueryProgram) -> Result<QueryOutput, QueryError> {
    if !prog.terminal.is_mutation() {
        return Err(QueryError::NotAMutation);
    }
    let (_, mut log, plan) = run(model, prog, STEP_BUDGET)?;
    let mut changed = Vec::with_capacity(plan.len());
    for (id, change, msg) in plan {
        let guid = model.guid_of(id).expect("selected ids are rooted");
        match change {
            Change::Attr(a, v) => {
                model.edit_attributes(&guid, &[(a, v)])?;
            }
            Change::Pset(p, q, v) => {
                let spec = PropertySpec {
                    pset_name: p,
                    properties: vec![PropertyValue { name: q, value: v, unit: None }],
                };
                model.add_property_set(&guid, &spec)?;
            }
        }
        log.push(msg);
        changed.push(guid);
    }
    log.push(format!("changed {} objects", changed.len()));
    Ok(QueryOutput {
        result: json!({ "changed": changed }),
        log,
        changed,
    })
}
