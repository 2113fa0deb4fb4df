//! Closed query/mutation language over the model.
//!
//! ```text
//! program  := selector ('|' stage)*
//! selector := IDENT | 'all'
//! stage    := 'filter(' expr ')' | 'select(' expr (',' expr)* ')'
//!           | 'count' | ('sum'|'min'|'max'|'avg'|'list') '(' expr ')'
//!           | 'set(' target ',' expr ')' | 'rename(' STRING ')'
//! ```
//!
//! Filters come first and exactly one terminal stage ends the pipeline.
//! Expressions read attributes (`.Name`), property values
//! (`pset("Pset_WallCommon").FireRating`) and derived fields (`area`,
//! `length`, `height`, `elevation`, `storey`, `name`, `guid`, `class`,
//! and the session flags `selected` and `visible`).
//! Missing values are `null`: arithmetic on null yields null and ordering
//! comparisons against it are false.

mod eval;
mod lexer;
mod parser;

pub use eval::{eval_query, eval_query_with_budget, format_one_decimal, mutate_query, QueryOutput, Val, STEP_BUDGET};
pub use parser::{
    parse_query, selector_classes, BinOp, Expr, QueryProgram, Selector, SetTarget, TemplatePart, Terminal,
    MAX_DEPTH, MAX_SOURCE,
};

use crate::model::{IfcModel, ModelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("parse error at {pos}: expected {expected}, found {found}")]
    Parse { pos: usize, expected: String, found: String },
    #[error("query is {0} bytes; the limit is 8192")]
    TooLong(usize),
    #[error("expression nesting deeper than 32 at {pos}")]
    TooDeep { pos: usize },
    #[error("evaluation exceeded {0} steps")]
    BudgetExceeded(u64),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unknown field {0}")]
    UnknownField(String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("mutation programs need write access")]
    ReadOnly,
    #[error("program does not end in a mutation")]
    NotAMutation,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Parse { .. } | QueryError::TooLong(_) | QueryError::TooDeep { .. } => "ParseError",
            QueryError::BudgetExceeded(_) => "BudgetExceeded",
            QueryError::TypeMismatch(_) => "TypeMismatch",
            QueryError::UnknownField(_) => "UnknownField",
            QueryError::UnknownAttribute(_) => "UnknownAttribute",
            QueryError::ReadOnly => "ReadOnly",
            QueryError::NotAMutation => "NotAMutation",
            QueryError::Model(_) => "ModelError",
        }
    }
}

/// Parses and runs a program, mutating the model when the terminal is a
/// mutation.
pub fn run_query(model: &mut IfcModel, text: &str) -> Result<QueryOutput, QueryError> {
    let prog = parse_query(text)?;
    if prog.terminal.is_mutation() {
        mutate_query(model, &prog)
    } else {
        eval_query(model, &prog)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area;
    use crate::tools::{create_door, create_slab, create_wall_chain, OpeningParams, SlabParams, WallChainParams};
    use serde_json::json;

    fn scene() -> (IfcModel, Vec<String>) {
        let mut m = IfcModel::new_seeded("P", 3);
        let walls = create_wall_chain(
            &mut m,
            &WallChainParams {
                points: vec![[0., 0.], [10., 0.], [10., 10.], [0., 10.]],
                height: 3.0,
                thickness: 0.2,
                close: true,
                storey: None,
            },
        )
        .unwrap();
        (m, walls)
    }

    fn q(m: &IfcModel, text: &str) -> serde_json::Value {
        eval_query(m, &parse_query(text).unwrap()).unwrap().result
    }

    #[test]
    fn aggregates() {
        let (m, _) = scene();
        assert_eq!(q(&m, "walls | count"), json!(4));
        // oracle: perimeter of the 10 x 10 square
        assert_eq!(q(&m, "walls | sum(length)"), json!(40.0));
        assert_eq!(q(&m, "walls | sum(area)"), json!(120.0));
        assert_eq!(q(&m, "walls | filter(height > 3) | count"), json!(0));
        assert_eq!(q(&m, "walls | filter(height >= 3 && .Name == 'Wall_002') | list(name)"), json!(["Wall_002"]));
        assert_eq!(q(&m, "windows | sum(500)"), json!(0.0));
        assert_eq!(q(&m, "windows | max(height)"), json!(null));
        assert_eq!(q(&m, "all | count"), json!(8));
        assert_eq!(q(&m, "storeys | list(elevation)"), json!([0.0]));
        assert_eq!(q(&m, "walls | avg(length)"), json!(10.0));
        assert_eq!(q(&m, "walls | filter(selected) | count"), json!(0));
        assert_eq!(q(&m, "walls | filter(visible) | count"), json!(4));
        let rows = q(&m, "walls | select(.Name, storey)");
        assert_eq!(rows[0][".Name"], "Wall_001");
        assert_eq!(rows[0]["storey"], "My Storey");
    }

    #[test]
    fn slab_area() {
        let (mut m, _) = scene();
        let outline = vec![[0., 0.], [10., 0.], [10., 5.], [5., 5.], [5., 10.], [0., 10.]];
        create_slab(
            &mut m,
            &SlabParams {
                outline: outline.clone(),
                thickness: 0.25,
                elevation: 0.0,
                name: None,
            },
        )
        .unwrap();
        let poly = crate::geometry::Polygon2::new(outline.iter().map(|p| crate::geometry::Point2::new(p[0], p[1])).collect()).unwrap();
        assert_eq!(q(&m, "slabs | sum(area)").as_f64().unwrap(), polygon_area(&poly));
    }

    #[test]
    fn errors() {
        let (m, _) = scene();
        let run = |t: &str| eval_query(&m, &parse_query(t).unwrap());
        assert!(matches!(run("walls | sum(.Name)"), Err(QueryError::TypeMismatch(_))));
        assert!(matches!(run("walls | sum(volume)"), Err(QueryError::UnknownField(_))));
        assert!(matches!(run("walls | list(.Colour)"), Err(QueryError::UnknownField(_))));
        assert!(matches!(run("walls | filter(.Name) | count"), Err(QueryError::TypeMismatch(_))));
        assert!(matches!(run("walls | rename(\"x\")"), Err(QueryError::ReadOnly)));
        let p = parse_query("all | list(1 + 2 + 3)").unwrap();
        assert!(matches!(eval_query_with_budget(&m, &p, 10), Err(QueryError::BudgetExceeded(10))));
    }

    #[test]
    fn rename_with_height() {
        let (mut m, walls) = scene();
        let out = run_query(&mut m, r#"walls | rename("Wall-{height}m")"#).unwrap();
        assert_eq!(out.changed, walls);
        assert_eq!(q(&m, "walls | list(name)"), json!(vec!["Wall-3.0m"; 4]));
        m.mark_clean();
        // second run changes nothing
        assert!(run_query(&mut m, r#"walls | rename("Wall-{height}m")"#).unwrap().changed.is_empty());
        assert!(!m.is_dirty());
    }

    #[test]
    fn rename_doors_with_storey() {
        let (mut m, walls) = scene();
        create_door(
            &mut m,
            &OpeningParams {
                wall_guid: Some(walls[0].clone()),
                position_along_axis: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        run_query(&mut m, r#"doors | rename("{name} - {storey}")"#).unwrap();
        assert_eq!(q(&m, "doors | list(name)"), json!(["Door_001 - My Storey"]));
    }

    #[test]
    fn empty_mutation_leaves_model_clean() {
        let (mut m, _) = scene();
        m.mark_clean();
        let before = m.to_step().unwrap();
        let out = run_query(&mut m, r#"windows | set(.Description, "x")"#).unwrap();
        assert!(out.changed.is_empty());
        assert!(!m.is_dirty());
        assert_eq!(m.to_step().unwrap(), before);
    }

    #[test]
    fn set_pset_and_attr() {
        let (mut m, walls) = scene();
        let out = run_query(&mut m, r#"walls | filter(.Name == "Wall_001") | set(pset("Pset_WallCommon").FireRating, "EI60")"#).unwrap();
        assert_eq!(out.changed, vec![walls[0].clone()]);
        assert_eq!(q(&m, r#"walls | filter(pset("Pset_WallCommon").FireRating == "EI60") | count"#), json!(1));
        run_query(&mut m, r#"buildings | set(.Description, "High-rise residential tower")"#).unwrap();
        assert_eq!(q(&m, "buildings | list(.Description)"), json!(["High-rise residential tower"]));
        assert!(matches!(
            run_query(&mut m, r#"storeys | set(.ObjectType, "x")"#),
            Err(QueryError::UnknownAttribute(_))
        ));
        assert!(matches!(run_query(&mut m, r#"walls | set(.GlobalId, "x")"#), Err(QueryError::UnknownAttribute(_))));
    }

    #[test]
    fn failed_mutation_is_atomic() {
        let (mut m, _) = scene();
        m.mark_clean();
        let before = m.to_step().unwrap();
        // Wall_001 plans a change, Wall_002 then fails to evaluate
        let r = run_query(&mut m, r#"walls | set(pset("P").x, .Name != "Wall_002" || .Name)"#);
        assert!(matches!(r, Err(QueryError::TypeMismatch(_))));
        assert_eq!(m.to_step().unwrap(), before);
    }

    #[test]
    fn one_decimal_half_up() {
        assert_eq!(format_one_decimal(3.0), "3.0");
        assert_eq!(format_one_decimal(0.25), "0.3");
        assert_eq!(format_one_decimal(2.449), "2.4");
        assert_eq!(format_one_decimal(-0.04), "0.0");
        assert_eq!(format_one_decimal(-0.25), "-0.2");
    }

    #[test]
    fn reads_do_not_change_output() {
        let (mut m, _) = scene();
        let before = m.to_step().unwrap();
        for t in ["walls | count", "all | select(name, elevation)", "walls | sum(area)"] {
            run_query(&mut m, t).unwrap();
        }
        assert_eq!(m.to_step().unwrap(), before);
    }
}
