use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::value::{EntityInstance, StepHeader, StepValue};
use super::StepError;

/// Formats a real the STEP way: at most 15 significant digits, shortest
/// round-trip form, always with a decimal point (`0.`, `3.5`, `1.E-05`).
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        // Not representable in Part 21; callers validate geometry before it gets here.
        return "0.".to_string();
    }
    if x == 0.0 {
        return "0.".to_string();
    }
    let mut sci = format!("{x:e}");
    let (mantissa, _) = sci.split_once('e').unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    if digits > 15 {
        let rounded: f64 = format!("{x:.14e}").parse().unwrap();
        sci = format!("{rounded:e}");
    }
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-4..15).contains(&exp) {
        if exp >= 0 {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                out.push_str(&digits);
                out.extend(std::iter::repeat_n('0', int_len - digits.len()));
                out.push('.');
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        } else {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(&digits);
        }
    } else {
        out.push_str(&digits[..1]);
        out.push('.');
        out.push_str(&digits[1..]);
        let _ = write!(out, "E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    out
}

/// Escapes a string for a STEP literal, including the surrounding quotes.
pub fn encode_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\'' => out.push_str("''"),
            '\\' => out.push_str("\\\\"),
            ' '..='~' => out.push(c),
            _ => {
                let start = i;
                while i < chars.len() && !(' '..='~').contains(&chars[i]) {
                    i += 1;
                }
                let run = &chars[start..i];
                if run.iter().any(|c| (*c as u32) > 0xFFFF) {
                    out.push_str("\\X4\\");
                    for c in run {
                        let _ = write!(out, "{:08X}", *c as u32);
                    }
                } else {
                    out.push_str("\\X2\\");
                    for c in run {
                        let _ = write!(out, "{:04X}", *c as u32);
                    }
                }
                out.push_str("\\X0\\");
                continue;
            }
        }
        i += 1;
    }
    out.push('\'');
    out
}

pub(crate) fn write_value(out: &mut String, v: &StepValue) {
    match v {
        StepValue::Integer(i) => {
            let _ = write!(out, "{i}");
        }
        StepValue::Real(r) => out.push_str(&format_real(*r)),
        StepValue::String(s) => out.push_str(&encode_string(s)),
        StepValue::Enum(e) => {
            out.push('.');
            out.push_str(e);
            out.push('.');
        }
        StepValue::Ref(id) => {
            let _ = write!(out, "#{id}");
        }
        StepValue::Typed(name, inner) => {
            out.push_str(name);
            out.push('(');
            write_value(out, inner);
            out.push(')');
        }
        StepValue::List(items) => {
            out.push('(');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(')');
        }
        StepValue::Unset => out.push('$'),
        StepValue::Derived => out.push('*'),
        StepValue::Bool(b) => out.push_str(if *b { ".T." } else { ".F." }),
    }
}

fn string_list(items: &[String]) -> String {
    let parts: Vec<String> = items.iter().map(|s| encode_string(s)).collect();
    format!("({})", parts.join(","))
}

pub fn write_entity(out: &mut String, e: &EntityInstance) {
    let _ = write!(out, "#{}={}(", e.id, e.class_name);
    for (i, a) in e.attributes.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_value(out, a);
    }
    out.push_str(");\n");
}

/// Serializes a header and entity map. Entities are emitted in ascending id
/// order; the output only contains ASCII.
pub fn write_step(
    header: &StepHeader,
    entities: &BTreeMap<u64, EntityInstance>,
) -> Result<Vec<u8>, StepError> {
    super::check_refs(entities)?;
    let mut out = String::new();
    out.push_str("ISO-10303-21;\nHEADER;\n");
    let _ = writeln!(
        out,
        "FILE_DESCRIPTION({},{});",
        string_list(&header.description),
        encode_string(&header.implementation_level)
    );
    let _ = writeln!(
        out,
        "FILE_NAME({},{},{},{},{},{},{});",
        encode_string(&header.name),
        encode_string(&header.time_stamp),
        string_list(&header.author),
        string_list(&header.organization),
        encode_string(&header.preprocessor_version),
        encode_string(&header.originating_system),
        encode_string(&header.authorization)
    );
    let _ = writeln!(out, "FILE_SCHEMA(({}));", encode_string(&header.schema));
    out.push_str("ENDSEC;\nDATA;\n");
    for e in entities.values() {
        write_entity(&mut out, e);
    }
    out.push_str("ENDSEC;\nEND-ISO-10303-21;\n");
    Ok(out.into_bytes())
}
