use super::lexer::{lex, Spanned, Tok};
use super::QueryError;

pub const MAX_SOURCE: usize = 8 * 1024;
pub const MAX_DEPTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Str(String),
    Bool(bool),
    Null,
    /// `.Name`, an entity attribute.
    Attr(String),
    /// Bare identifier: `area`, `length`, `height`, `elevation`, `storey`, ...
    Field(String),
    /// `pset("Pset_WallCommon").FireRating`
    Pset(String, String),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    All,
    /// Upper-case schema class names.
    Classes(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetTarget {
    Attr(String),
    Pset(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terminal {
    Count,
    Sum(Expr),
    Min(Expr),
    Max(Expr),
    Avg(Expr),
    List(Expr),
    /// Projection; the strings are the source text of each expression.
    Select(Vec<(String, Expr)>),
    Set(SetTarget, Expr),
    Rename(Vec<TemplatePart>),
}

impl Terminal {
    pub fn is_mutation(&self) -> bool {
        matches!(self, Terminal::Set(..) | Terminal::Rename(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemplatePart {
    Text(String),
    Field(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryProgram {
    pub selector: Selector,
    pub selector_text: String,
    pub filters: Vec<(String, Expr)>,
    pub terminal: Terminal,
}

const ALIASES: &[(&str, &[&str])] = &[
    ("walls", &["IFCWALL", "IFCWALLSTANDARDCASE"]),
    ("slabs", &["IFCSLAB"]),
    ("roofs", &["IFCROOF"]),
    ("doors", &["IFCDOOR"]),
    ("windows", &["IFCWINDOW"]),
    ("stairs", &["IFCSTAIR"]),
    ("openings", &["IFCOPENINGELEMENT"]),
    ("columns", &["IFCCOLUMN"]),
    ("beams", &["IFCBEAM"]),
    ("proxies", &["IFCBUILDINGELEMENTPROXY"]),
    ("storeys", &["IFCBUILDINGSTOREY"]),
    ("buildings", &["IFCBUILDING"]),
    ("sites", &["IFCSITE"]),
    ("projects", &["IFCPROJECT"]),
    ("spaces", &["IFCSPACE"]),
];

pub fn selector_classes(name: &str) -> Option<Selector> {
    if name == "all" {
        return Some(Selector::All);
    }
    if let Some((_, classes)) = ALIASES.iter().find(|(a, _)| *a == name) {
        return Some(Selector::Classes(classes.iter().map(|c| c.to_string()).collect()));
    }
    if name.len() > 3 && name[..3].eq_ignore_ascii_case("ifc") {
        return Some(Selector::Classes(vec![name.to_ascii_uppercase()]));
    }
    None
}

/// Bare identifiers accepted in expressions and `{...}` template slots.
pub const FIELDS: &[&str] = &[
    "area", "length", "height", "elevation", "storey", "name", "guid", "class", "selected", "visible",
];

/// Attributes readable as `.Attr`.
pub const ATTRIBUTES: &[&str] = &["GlobalId", "Name", "Description", "ObjectType", "LongName", "Tag"];

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Spanned>,
    i: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, QueryError> {
        Err(QueryError::Parse {
            pos: self.pos(),
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), QueryError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, QueryError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, QueryError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn program(&mut self) -> Result<QueryProgram, QueryError> {
        let sel_pos = self.pos();
        let name = self.ident("selector (class name, plural alias or `all`)")?;
        let Some(selector) = selector_classes(&name) else {
            return Err(QueryError::Parse {
                pos: sel_pos,
                expected: "selector (class name, plural alias or `all`)".into(),
                found: format!("identifier `{name}`"),
            });
        };
        let mut filters = Vec::new();
        let mut terminal = None;
        while *self.peek() == Tok::Pipe {
            self.bump();
            if terminal.is_some() {
                return self.fail("end of input after the terminal stage");
            }
            let stage_pos = self.pos();
            let stage = self.ident("stage")?;
            match stage.as_str() {
                "filter" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let (text, e) = self.spanned_expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    filters.push((text, e));
                }
                "count" => terminal = Some(Terminal::Count),
                "sum" | "min" | "max" | "avg" | "list" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let e = self.expr(0)?;
                    self.expect(Tok::RParen, "`)`")?;
                    terminal = Some(match stage.as_str() {
                        "sum" => Terminal::Sum(e),
                        "min" => Terminal::Min(e),
                        "max" => Terminal::Max(e),
                        "avg" => Terminal::Avg(e),
                        _ => Terminal::List(e),
                    });
                }
                "select" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let mut cols = vec![self.spanned_expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        cols.push(self.spanned_expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    terminal = Some(Terminal::Select(cols));
                }
                "set" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let target = match self.expr(0)? {
                        Expr::Attr(a) => SetTarget::Attr(a),
                        Expr::Pset(p, q) => SetTarget::Pset(p, q),
                        _ => {
                            return Err(QueryError::Parse {
                                pos: stage_pos,
                                expected: "`.Attribute` or `pset(\"Name\").prop` as set target".into(),
                                found: "expression".into(),
                            })
                        }
                    };
                    self.expect(Tok::Comma, "`,`")?;
                    let value = self.expr(0)?;
                    self.expect(Tok::RParen, "`)`")?;
                    terminal = Some(Terminal::Set(target, value));
                }
                "rename" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let tpos = self.pos();
                    let t = self.string("template string")?;
                    self.expect(Tok::RParen, "`)`")?;
                    terminal = Some(Terminal::Rename(parse_template(&t, tpos)?));
                }
                _ => {
                    return Err(QueryError::Parse {
                        pos: stage_pos,
                        expected: "stage (filter, select, count, sum, min, max, avg, list, set, rename)".into(),
                        found: format!("identifier `{stage}`"),
                    })
                }
            }
        }
        if *self.peek() != Tok::End {
            return self.fail(if terminal.is_some() { "end of input" } else { "`|`" });
        }
        let Some(terminal) = terminal else {
            return self.fail("terminal stage (aggregation, select or mutation)");
        };
        Ok(QueryProgram {
            selector,
            selector_text: name,
            filters,
            terminal,
        })
    }

    fn spanned_expr(&mut self) -> Result<(String, Expr), QueryError> {
        let start = self.pos();
        let e = self.expr(0)?;
        let end = self.pos();
        Ok((self.src[start..end].trim().to_string(), e))
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, QueryError> {
        self.binary(0, depth)
    }

    fn binary(&mut self, level: usize, depth: usize) -> Result<Expr, QueryError> {
        if depth > MAX_DEPTH {
            return Err(QueryError::TooDeep { pos: self.pos() });
        }
        const LEVELS: [&[(Tok, BinOp)]; 5] = [
            &[(Tok::Or, BinOp::Or)],
            &[(Tok::And, BinOp::And)],
            &[
                (Tok::Eq, BinOp::Eq),
                (Tok::Ne, BinOp::Ne),
                (Tok::Lt, BinOp::Lt),
                (Tok::Le, BinOp::Le),
                (Tok::Gt, BinOp::Gt),
                (Tok::Ge, BinOp::Ge),
            ],
            &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
            &[(Tok::Star, BinOp::Mul), (Tok::Slash, BinOp::Div)],
        ];
        if level == LEVELS.len() {
            return self.unary(depth);
        }
        let mut lhs = self.binary(level + 1, depth)?;
        let mut chain = 0;
        loop {
            let Some(&(_, op)) = LEVELS[level].iter().find(|(t, _)| t == self.peek()) else {
                return Ok(lhs);
            };
            chain += 1;
            if depth + chain > MAX_DEPTH {
                return Err(QueryError::TooDeep { pos: self.pos() });
            }
            self.bump();
            let rhs = self.binary(level + 1, depth + chain)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, QueryError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Expr::Not(Box::new(self.nested_unary(depth)?)))
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.nested_unary(depth)?)))
            }
            _ => self.primary(depth),
        }
    }

    fn nested_unary(&mut self, depth: usize) -> Result<Expr, QueryError> {
        if depth + 1 > MAX_DEPTH {
            return Err(QueryError::TooDeep { pos: self.pos() });
        }
        self.unary(depth + 1)
    }

    fn primary(&mut self, depth: usize) -> Result<Expr, QueryError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Dot => {
                self.bump();
                Ok(Expr::Attr(self.ident("attribute name")?))
            }
            Tok::Ident(id) => {
                self.bump();
                match id.as_str() {
                    "true" => Ok(Expr::Bool(true)),
                    "false" => Ok(Expr::Bool(false)),
                    "null" => Ok(Expr::Null),
                    "pset" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let set = self.string("property set name")?;
                        if *self.peek() == Tok::Comma {
                            self.bump();
                            let prop = self.string("property name")?;
                            self.expect(Tok::RParen, "`)`")?;
                            return Ok(Expr::Pset(set, prop));
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        self.expect(Tok::Dot, "`.`")?;
                        Ok(Expr::Pset(set, self.ident("property name")?))
                    }
                    _ => Ok(Expr::Field(id)),
                }
            }
            _ => self.fail("expression"),
        }
    }
}

fn parse_template(t: &str, pos: usize) -> Result<Vec<TemplatePart>, QueryError> {
    let mut parts = Vec::new();
    let mut text = String::new();
    let mut chars = t.chars().peekable();
    let bad = |what: &str| QueryError::Parse {
        pos,
        expected: what.into(),
        found: format!("template {t:?}"),
    };
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                text.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                text.push('}');
            }
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) => name.push(ch),
                        None => return Err(bad("`}` closing a template field")),
                    }
                }
                let name = name.trim().to_string();
                if name.is_empty() {
                    return Err(bad("field name inside `{}`"));
                }
                if !text.is_empty() {
                    parts.push(TemplatePart::Text(std::mem::take(&mut text)));
                }
                parts.push(TemplatePart::Field(name));
            }
            '}' => return Err(bad("`}}` for a literal brace")),
            c => text.push(c),
        }
    }
    if !text.is_empty() {
        parts.push(TemplatePart::Text(text));
    }
    Ok(parts)
}

pub fn parse_query(text: &str) -> Result<QueryProgram, QueryError> {
    if text.len() > MAX_SOURCE {
        return Err(QueryError::TooLong(text.len()));
    }
    let toks = lex(text)?;
    Parser { src: text, toks, i: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipelines() {
        let p = parse_query("walls | count").unwrap();
        assert_eq!(p.selector, Selector::Classes(vec!["IFCWALL".into(), "IFCWALLSTANDARDCASE".into()]));
        assert_eq!(p.terminal, Terminal::Count);
        let p = parse_query("walls | filter(height > 3) | sum(length)").unwrap();
        assert_eq!(p.filters.len(), 1);
        assert_eq!(p.filters[0].0, "height > 3");
        assert_eq!(p.terminal, Terminal::Sum(Expr::Field("length".into())));
        let p = parse_query("IfcSlab | select(.Name, area * 2)").unwrap();
        match p.terminal {
            Terminal::Select(cols) => assert_eq!(cols[1].0, "area * 2"),
            t => panic!("{t:?}"),
        }
    }

    #[test]
    fn precedence() {
        let p = parse_query("all | list(1 + 2 * 3 == 7 || false)").unwrap();
        let Terminal::List(Expr::Bin(BinOp::Or, lhs, _)) = p.terminal else { panic!() };
        let Expr::Bin(BinOp::Eq, sum, _) = *lhs else { panic!() };
        assert!(matches!(*sum, Expr::Bin(BinOp::Add, _, _)));
    }

    #[test]
    fn mutations() {
        let p = parse_query(r#"walls | rename("Wall-{height}m")"#).unwrap();
        assert_eq!(
            p.terminal,
            Terminal::Rename(vec![
                TemplatePart::Text("Wall-".into()),
                TemplatePart::Field("height".into()),
                TemplatePart::Text("m".into()),
            ])
        );
        let p = parse_query(r#"walls | set(pset("Pset_WallCommon").FireRating, "EI60")"#).unwrap();
        assert!(matches!(p.terminal, Terminal::Set(SetTarget::Pset(..), _)));
        assert!(parse_query("walls | set(height, 3)").is_err());
    }

    #[test]
    fn rejects() {
        assert!(matches!(
            parse_query("walls | import os"),
            Err(QueryError::Parse { pos: 8, .. })
        ));
        assert!(parse_query("walls").is_err());
        assert!(parse_query("walls | count | count").is_err());
        assert!(parse_query("rooms | count").is_err());
        assert!(parse_query("walls | filter(height >)").is_err());
        let long = format!("walls | list(\"{}\")", "x".repeat(MAX_SOURCE));
        assert!(matches!(parse_query(&long), Err(QueryError::TooLong(_))));
    }

    #[test]
    fn depth_limit() {
        let ok = format!("all | list({}1{})", "(".repeat(30), ")".repeat(30));
        assert!(parse_query(&ok).is_ok());
        let deep = format!("all | list({}1{})", "(".repeat(40), ")".repeat(40));
        assert!(matches!(parse_query(&deep), Err(QueryError::TooDeep { .. })));
        let chain = format!("all | list(1{})", " + 1".repeat(40));
        assert!(matches!(parse_query(&chain), Err(QueryError::TooDeep { .. })));
        let neg = format!("all | list({}1)", "-".repeat(40));
        assert!(matches!(parse_query(&neg), Err(QueryError::TooDeep { .. })));
    }
}
