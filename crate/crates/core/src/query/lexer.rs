use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Pipe,
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    End,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Str(_) => "string".into(),
            Tok::End => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Pipe => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Eq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::And => "&&",
            Tok::Or => "||",
            Tok::Not => "!",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            _ => "",
        }
    }
}

/// Token with its byte offset in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

fn err(pos: usize, expected: &str, found: &str) -> QueryError {
    QueryError::Parse {
        pos,
        expected: expected.into(),
        found: found.into(),
    }
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, QueryError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = |a: u8, b: u8| c == a && bytes.get(i + 1) == Some(&b);
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(src[start..i].to_string()),
                pos: start,
            });
            continue;
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let n: f64 = src[start..i]
                .parse()
                .map_err(|_| err(start, "number", &src[start..i]))?;
            out.push(Spanned { tok: Tok::Num(n), pos: start });
            continue;
        } else if c == b'"' || c == b'\'' {
            let quote = c as char;
            let mut s = String::new();
            let mut chars = src[i + 1..].char_indices();
            let mut closed = None;
            while let Some((k, ch)) = chars.next() {
                match ch {
                    '\\' => match chars.next() {
                        Some((_, 'n')) => s.push('\n'),
                        Some((_, 't')) => s.push('\t'),
                        Some((_, e @ ('\\' | '"' | '\''))) => s.push(e),
                        Some((k2, other)) => {
                            return Err(err(i + 1 + k2, "escape sequence", &other.to_string()))
                        }
                        None => break,
                    },
                    ch if ch == quote => {
                        closed = Some(i + 1 + k + 1);
                        break;
                    }
                    ch => s.push(ch),
                }
            }
            let Some(end) = closed else {
                return Err(err(start, "closing quote", "end of input"));
            };
            i = end;
            out.push(Spanned { tok: Tok::Str(s), pos: start });
            continue;
        } else if two(b'=', b'=') {
            Tok::Eq
        } else if two(b'!', b'=') {
            Tok::Ne
        } else if two(b'<', b'=') {
            Tok::Le
        } else if two(b'>', b'=') {
            Tok::Ge
        } else if two(b'&', b'&') {
            Tok::And
        } else if two(b'|', b'|') {
            Tok::Or
        } else {
            let t = match c {
                b'|' => Tok::Pipe,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'.' => Tok::Dot,
                b'<' => Tok::Lt,
                b'>' => Tok::Gt,
                b'!' => Tok::Not,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                _ => {
                    let ch = src[i..].chars().next().unwrap_or('?');
                    return Err(err(i, "token", &ch.to_string()));
                }
            };
            i += 1;
            out.push(Spanned { tok: t, pos: start });
            continue;
        };
        i += 2;
        out.push(Spanned { tok, pos: start });
    }
    out.push(Spanned {
        tok: Tok::End,
        pos: src.len(),
    });
    Ok(out)
}
