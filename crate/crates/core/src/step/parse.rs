//! ISO 10303-21 reader.
//!
//! The input is treated as ISO-8859-1 bytes. Strings are decoded from the
//! `''`, `\\`, `\X\`, `\X2\`, `\X4\` and `\S\` escapes into Rust strings.

use std::collections::BTreeMap;

use super::value::{is_valid_class_name, EntityInstance, StepHeader, StepValue};
use super::StepError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Keyword(String),
    InstanceName(u64),
    Integer(i64),
    Real(f64),
    Str(String),
    Enum(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Dollar,
    Star,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a [u8]) -> Self {
        Self {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> StepError {
        StepError::Syntax {
            line,
            col,
            message: msg.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), StepError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek_at(1) == Some(b'*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some(b'*') if self.peek() == Some(b'/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => return Err(self.err(line, col, "unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next(&mut self) -> Result<Spanned, StepError> {
        self.skip_trivia()?;
        let (line, col) = (self.line, self.col);
        let tok = match self.peek() {
            None => Tok::Eof,
            Some(b) => match b {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b'=' => {
                    self.bump();
                    Tok::Eq
                }
                b'$' => {
                    self.bump();
                    Tok::Dollar
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'#' => {
                    self.bump();
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                    let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                    let id: u64 = digits
                        .parse()
                        .map_err(|_| self.err(line, col, "expected instance id after '#'"))?;
                    if id == 0 {
                        return Err(self.err(line, col, "instance id must be positive"));
                    }
                    Tok::InstanceName(id)
                }
                b'\'' => Tok::Str(self.string(line, col)?),
                b'.' => {
                    self.bump();
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.bump();
                    }
                    let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                    if name.is_empty() || self.bump() != Some(b'.') {
                        return Err(self.err(line, col, "malformed enumeration token"));
                    }
                    Tok::Enum(name.to_ascii_uppercase())
                }
                b'+' | b'-' | b'0'..=b'9' => self.number(line, col)?,
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'-')
                    {
                        self.bump();
                    }
                    Tok::Keyword(
                        String::from_utf8_lossy(&self.src[start..self.pos]).to_ascii_uppercase(),
                    )
                }
                c => {
                    return Err(self.err(line, col, format!("unexpected character {:?}", c as char)))
                }
            },
        };
        Ok(Spanned { tok, line, col })
    }

    fn number(&mut self, line: usize, col: usize) -> Result<Tok, StepError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.bump();
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == digits_start {
            return Err(self.err(line, col, "expected digits"));
        }
        let mut real = false;
        if self.peek() == Some(b'.') {
            real = true;
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some(b'E') | Some(b'e')) {
            real = true;
            self.bump();
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.bump();
            }
            let exp_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
            if self.pos == exp_start {
                return Err(self.err(line, col, "malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if real {
            // Rust's float parser rejects "1.E-05" and "10."; normalise first.
            let normalised = text.replace(".E", ".0E").replace(".e", ".0e");
            let normalised = if normalised.ends_with('.') {
                format!("{normalised}0")
            } else {
                normalised
            };
            normalised
                .parse::<f64>()
                .map(Tok::Real)
                .map_err(|_| self.err(line, col, format!("malformed real {text:?}")))
        } else {
            text.parse::<i64>()
                .map(Tok::Integer)
                .map_err(|_| self.err(line, col, format!("malformed integer {text:?}")))
        }
    }

    fn string(&mut self, line: usize, col: usize) -> Result<String, StepError> {
        self.bump();
        let mut raw = Vec::new();
        loop {
            match self.bump() {
                Some(b'\'') => {
                    if self.peek() == Some(b'\'') {
                        self.bump();
                        raw.push(b'\'');
                    } else {
                        break;
                    }
                }
                Some(b) => raw.push(b),
                None => return Err(self.err(line, col, "unterminated string")),
            }
        }
        decode_string(&raw).map_err(|m| self.err(line, col, m))
    }
}

fn hex_value(bytes: &[u8]) -> Result<u32, String> {
    let s = std::str::from_utf8(bytes).map_err(|_| "bad hex escape".to_string())?;
    u32::from_str_radix(s, 16).map_err(|_| format!("bad hex escape {s:?}"))
}

fn decode_string(raw: &[u8]) -> Result<String, String> {
    let mut out = String::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let b = raw[i];
        if b != b'\\' {
            out.push(b as char);
            i += 1;
            continue;
        }
        let rest = &raw[i..];
        if rest.starts_with(b"\\\\") {
            out.push('\\');
            i += 2;
        } else if rest.starts_with(b"\\X2\\") || rest.starts_with(b"\\X4\\") {
            let width = if rest[2] == b'2' { 4 } else { 8 };
            i += 4;
            let mut units: Vec<u16> = Vec::new();
            loop {
                if raw[i..].starts_with(b"\\X0\\") {
                    i += 4;
                    break;
                }
                if i + width > raw.len() {
                    return Err("unterminated \\X2\\ or \\X4\\ escape".into());
                }
                let v = hex_value(&raw[i..i + width])?;
                i += width;
                if width == 4 {
                    units.push(v as u16);
                } else {
                    let c = char::from_u32(v).ok_or("invalid code point in \\X4\\")?;
                    let mut buf = [0u16; 2];
                    units.extend_from_slice(c.encode_utf16(&mut buf));
                }
            }
            out.push_str(&String::from_utf16(&units).map_err(|_| "invalid UTF-16 in escape")?);
        } else if rest.starts_with(b"\\X\\") {
            if rest.len() < 5 {
                return Err("truncated \\X\\ escape".into());
            }
            out.push(char::from_u32(hex_value(&rest[3..5])?).unwrap_or('\u{FFFD}'));
            i += 5;
        } else if rest.starts_with(b"\\S\\") {
            if rest.len() < 4 {
                return Err("truncated \\S\\ escape".into());
            }
            out.push(((rest[3] as u32 + 128) as u8) as char);
            i += 4;
        } else if rest.len() >= 4 && rest[1] == b'P' && rest[3] == b'\\' {
            // code page switch; Latin-1 is assumed throughout
            i += 4;
        } else {
            out.push('\\');
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    lex: Lexer<'a>,
    cur: Spanned,
}

impl<'a> Parser<'a> {
    fn new(src: &'a [u8]) -> Result<Self, StepError> {
        let mut lex = Lexer::new(src);
        let cur = lex.next()?;
        Ok(Self { lex, cur })
    }

    fn advance(&mut self) -> Result<Spanned, StepError> {
        let next = self.lex.next()?;
        Ok(std::mem::replace(&mut self.cur, next))
    }

    fn err(&self, msg: impl Into<String>) -> StepError {
        StepError::Syntax {
            line: self.cur.line,
            col: self.cur.col,
            message: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), StepError> {
        if self.cur.tok == tok {
            self.advance()?;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {:?}", self.cur.tok)))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), StepError> {
        match &self.cur.tok {
            Tok::Keyword(k) if k == kw => {
                self.advance()?;
                Ok(())
            }
            other => Err(self.err(format!("expected {kw}, found {other:?}"))),
        }
    }

    fn value(&mut self) -> Result<StepValue, StepError> {
        let sp = self.advance()?;
        Ok(match sp.tok {
            Tok::Integer(i) => StepValue::Integer(i),
            Tok::Real(r) => StepValue::Real(r),
            Tok::Str(s) => StepValue::String(s),
            Tok::Enum(e) => match e.as_str() {
                "T" => StepValue::Bool(true),
                "F" => StepValue::Bool(false),
                _ => StepValue::Enum(e),
            },
            Tok::InstanceName(id) => StepValue::Ref(id),
            Tok::Dollar => StepValue::Unset,
            Tok::Star => StepValue::Derived,
            Tok::LParen => StepValue::List(self.list_tail()?),
            Tok::Keyword(name) => {
                self.expect(Tok::LParen, "'(' after type name")?;
                let mut args = self.list_tail()?;
                if args.len() != 1 {
                    return Err(StepError::Syntax {
                        line: sp.line,
                        col: sp.col,
                        message: format!("typed value {name} takes exactly one argument"),
                    });
                }
                StepValue::Typed(name, Box::new(args.pop().unwrap()))
            }
            other => {
                return Err(StepError::Syntax {
                    line: sp.line,
                    col: sp.col,
                    message: format!("unexpected token {other:?} in parameter list"),
                })
            }
        })
    }

    /// Parses values up to and including the closing parenthesis.
    fn list_tail(&mut self) -> Result<Vec<StepValue>, StepError> {
        let mut items = Vec::new();
        if self.cur.tok == Tok::RParen {
            self.advance()?;
            return Ok(items);
        }
        loop {
            items.push(self.value()?);
            match self.cur.tok {
                Tok::Comma => {
                    self.advance()?;
                }
                Tok::RParen => {
                    self.advance()?;
                    return Ok(items);
                }
                _ => return Err(self.err(format!("expected ',' or ')', found {:?}", self.cur.tok))),
            }
        }
    }

    fn record(&mut self) -> Result<(String, Vec<StepValue>), StepError> {
        let name = match &self.cur.tok {
            Tok::Keyword(k) => k.clone(),
            Tok::LParen => return Err(self.err("complex entity instances are not supported")),
            other => return Err(self.err(format!("expected entity name, found {other:?}"))),
        };
        if !is_valid_class_name(&name) {
            return Err(self.err(format!("invalid entity name {name:?}")));
        }
        self.advance()?;
        self.expect(Tok::LParen, "'('")?;
        let args = self.list_tail()?;
        self.expect(Tok::Semi, "';'")?;
        Ok((name, args))
    }
}

fn strings_of(v: Option<&StepValue>) -> Vec<String> {
    match v {
        Some(StepValue::List(items)) => items
            .iter()
            .filter_map(|i| i.as_str().map(str::to_string))
            .collect(),
        Some(StepValue::String(s)) => vec![s.clone()],
        _ => Vec::new(),
    }
}

fn string_of(v: Option<&StepValue>) -> String {
    v.and_then(|v| v.as_str()).unwrap_or_default().to_string()
}

fn build_header(records: Vec<(String, Vec<StepValue>)>) -> Result<StepHeader, StepError> {
    let mut header = StepHeader::ifc4("", "");
    header.description.clear();
    header.schema.clear();
    let mut seen_schema = false;
    for (name, args) in records {
        match name.as_str() {
            "FILE_DESCRIPTION" => {
                header.description = strings_of(args.first());
                header.implementation_level = string_of(args.get(1));
            }
            "FILE_NAME" => {
                header.name = string_of(args.first());
                header.time_stamp = string_of(args.get(1));
                header.author = strings_of(args.get(2));
                header.organization = strings_of(args.get(3));
                header.preprocessor_version = string_of(args.get(4));
                header.originating_system = string_of(args.get(5));
                header.authorization = string_of(args.get(6));
            }
            "FILE_SCHEMA" => {
                let schemas = strings_of(args.first());
                if schemas.len() != 1 {
                    return Err(StepError::Header(format!(
                        "FILE_SCHEMA must name exactly one schema, found {}",
                        schemas.len()
                    )));
                }
                header.schema = schemas.into_iter().next().unwrap();
                seen_schema = true;
            }
            _ => {}
        }
    }
    if !seen_schema {
        return Err(StepError::Header("missing FILE_SCHEMA".into()));
    }
    Ok(header)
}

/// Parses a complete exchange file.
///
/// Forward references are allowed; references that never resolve are
/// reported as [`StepError::DanglingRef`] once the whole file has been read.
pub fn parse_step(text: &[u8]) -> Result<(StepHeader, BTreeMap<u64, EntityInstance>), StepError> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("ISO-10303-21")?;
    p.expect(Tok::Semi, "';'")?;
    p.expect_keyword("HEADER")?;
    p.expect(Tok::Semi, "';'")?;
    let mut header_records = Vec::new();
    while !matches!(&p.cur.tok, Tok::Keyword(k) if k == "ENDSEC") {
        header_records.push(p.record()?);
    }
    p.advance()?;
    p.expect(Tok::Semi, "';'")?;
    let header = build_header(header_records)?;

    let mut entities = BTreeMap::new();
    loop {
        match &p.cur.tok {
            Tok::Keyword(k) if k == "DATA" => {
                p.advance()?;
                if p.cur.tok == Tok::LParen {
                    // DATA section parameters are ignored.
                    p.advance()?;
                    p.list_tail()?;
                }
                p.expect(Tok::Semi, "';'")?;
                loop {
                    match p.cur.tok {
                        Tok::InstanceName(id) => {
                            p.advance()?;
                            p.expect(Tok::Eq, "'='")?;
                            let (class_name, attributes) = p.record()?;
                            if entities
                                .insert(id, EntityInstance::new(id, class_name, attributes))
                                .is_some()
                            {
                                return Err(StepError::DuplicateId(id));
                            }
                        }
                        Tok::Keyword(ref k) if k == "ENDSEC" => {
                            p.advance()?;
                            p.expect(Tok::Semi, "';'")?;
                            break;
                        }
                        _ => return Err(p.err(format!("expected instance or ENDSEC, found {:?}", p.cur.tok))),
                    }
                }
            }
            Tok::Keyword(k) if k == "END-ISO-10303-21" => {
                p.advance()?;
                p.expect(Tok::Semi, "';'")?;
                break;
            }
            other => return Err(p.err(format!("expected DATA or END-ISO-10303-21, found {other:?}"))),
        }
    }
    if p.cur.tok != Tok::Eof {
        return Err(p.err("trailing content after END-ISO-10303-21"));
    }
    super::check_refs(&entities)?;
    Ok((header, entities))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wrap(data: &str) -> String {
        format!(
            "ISO-10303-21;HEADER;FILE_DESCRIPTION(('x'),'2;1');FILE_NAME('a','t',(''),(''),'p','o','');FILE_SCHEMA(('IFC4'));ENDSEC;DATA;{data}ENDSEC;END-ISO-10303-21;"
        )
    }

    #[test]
    fn minimal_wall() {
        let (h, ents) = parse_step(wrap("#1=IFCWALL($,$,'W',$,$,$,$,$,$);").as_bytes()).unwrap();
        assert_eq!(h.schema, "IFC4");
        assert_eq!(ents.len(), 1);
        let w = &ents[&1];
        assert_eq!(w.class_name, "IFCWALL");
        assert_eq!(w.attributes[2], StepValue::str("W"));
        assert_eq!(w.attributes.len(), 9);
    }

    #[test]
    fn point_record() {
        let (_, ents) = parse_step(wrap("#2=IFCCARTESIANPOINT((0.,0.,0.));").as_bytes()).unwrap();
        assert_eq!(
            ents[&2],
            EntityInstance::new(2, "IFCCARTESIANPOINT", vec![StepValue::reals(&[0.0, 0.0, 0.0])])
        );
    }

    #[test]
    fn forward_refs_comments_and_escapes() {
        let text = wrap(
            "/* c */#1=IFCFOO(#2,'O''Brien','\\X2\\00E9\\X0\\t\\X\\E9',.ELEMENT.,.T.,*,IFCLABEL('x'),1.E-05,-3);\n#2=IFCBAR(());",
        );
        let (_, ents) = parse_step(text.as_bytes()).unwrap();
        let a = &ents[&1].attributes;
        assert_eq!(a[0], StepValue::Ref(2));
        assert_eq!(a[1], StepValue::str("O'Brien"));
        assert_eq!(a[2], StepValue::str("\u{e9}t\u{e9}"));
        assert_eq!(a[3], StepValue::enumeration("ELEMENT"));
        assert_eq!(a[4], StepValue::Bool(true));
        assert_eq!(a[5], StepValue::Derived);
        assert_eq!(a[6], StepValue::label("x"));
        assert_eq!(a[7], StepValue::Real(1e-5));
        assert_eq!(a[8], StepValue::Integer(-3));
        assert_eq!(ents[&2].attributes[0], StepValue::List(vec![]));
    }

    #[test]
    fn latin1_bytes_decode() {
        let mut b = b"ISO-10303-21;HEADER;FILE_SCHEMA(('IFC4'));ENDSEC;DATA;#1=IFCX('caf".to_vec();
        b.push(0xE9);
        b.extend_from_slice(b"');ENDSEC;END-ISO-10303-21;");
        let (_, ents) = parse_step(&b).unwrap();
        assert_eq!(ents[&1].attributes[0], StepValue::str("caf\u{e9}"));
    }

    #[test]
    fn duplicate_and_dangling() {
        let dup = wrap("#1=IFCA();#1=IFCB();");
        assert!(matches!(parse_step(dup.as_bytes()), Err(StepError::DuplicateId(1))));
        let dangling = wrap("#1=IFCA(#7);");
        assert!(matches!(parse_step(dangling.as_bytes()), Err(StepError::DanglingRef(7))));
    }

    #[test]
    fn syntax_error_has_position() {
        let bad = "ISO-10303-21;\nHEADER;FILE_SCHEMA(('IFC4'));ENDSEC;\nDATA;\n#1=IFCA(,);ENDSEC;END-ISO-10303-21;";
        match parse_step(bad.as_bytes()) {
            Err(StepError::Syntax { line, col, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(col, 9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_requires_single_schema() {
        let two = "ISO-10303-21;HEADER;FILE_SCHEMA(('IFC4','IFC2X3'));ENDSEC;DATA;ENDSEC;END-ISO-10303-21;";
        assert!(matches!(parse_step(two.as_bytes()), Err(StepError::Header(_))));
        let ifc2x3 = "ISO-10303-21;HEADER;FILE_SCHEMA(('IFC2X3'));ENDSEC;DATA;#1=IFCWALLSTANDARDCASE($);ENDSEC;END-ISO-10303-21;";
        let (h, _) = parse_step(ifc2x3.as_bytes()).unwrap();
        assert_eq!(h.schema, "IFC2X3");
    }
}
