use std::fmt;

/// One attribute value of a STEP entity instance.
#[derive(Debug, Clone, PartialEq)]
pub enum StepValue {
    Integer(i64),
    Real(f64),
    String(String),
    /// Enumeration token without the surrounding dots, e.g. `ELEMENT`.
    Enum(String),
    Ref(u64),
    /// Typed value such as `IFCLABEL('x')`.
    Typed(String, Box<StepValue>),
    List(Vec<StepValue>),
    /// `$`
    Unset,
    /// `*`
    Derived,
    Bool(bool),
}

impl StepValue {
    pub fn str(s: impl Into<String>) -> Self {
        StepValue::String(s.into())
    }

    pub fn enumeration(s: impl Into<String>) -> Self {
        StepValue::Enum(s.into())
    }

    pub fn typed(type_name: &str, inner: StepValue) -> Self {
        StepValue::Typed(type_name.to_string(), Box::new(inner))
    }

    pub fn label(s: impl Into<String>) -> Self {
        Self::typed("IFCLABEL", StepValue::String(s.into()))
    }

    pub fn reals(values: &[f64]) -> Self {
        StepValue::List(values.iter().map(|v| StepValue::Real(*v)).collect())
    }

    pub fn refs(ids: impl IntoIterator<Item = u64>) -> Self {
        StepValue::List(ids.into_iter().map(StepValue::Ref).collect())
    }

    pub fn is_unset(&self) -> bool {
        matches!(self, StepValue::Unset)
    }

    pub fn as_ref_id(&self) -> Option<u64> {
        match self {
            StepValue::Ref(id) => Some(*id),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            StepValue::String(s) => Some(s),
            StepValue::Typed(_, inner) => inner.as_str(),
            _ => None,
        }
    }

    /// Numeric payload of integers, reals and typed wrappers around them.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            StepValue::Integer(i) => Some(*i as f64),
            StepValue::Real(r) => Some(*r),
            StepValue::Typed(_, inner) => inner.as_f64(),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[StepValue]> {
        match self {
            StepValue::List(items) => Some(items),
            _ => None,
        }
    }

    /// Collects referenced ids from every nested value, in order of appearance.
    pub fn collect_refs(&self, out: &mut Vec<u64>) {
        match self {
            StepValue::Ref(id) => out.push(*id),
            StepValue::Typed(_, inner) => inner.collect_refs(out),
            StepValue::List(items) => items.iter().for_each(|v| v.collect_refs(out)),
            _ => {}
        }
    }

    pub fn references(&self, id: u64) -> bool {
        match self {
            StepValue::Ref(r) => *r == id,
            StepValue::Typed(_, inner) => inner.references(id),
            StepValue::List(items) => items.iter().any(|v| v.references(id)),
            _ => false,
        }
    }
}

/// A single `#id=CLASS(...);` record.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityInstance {
    pub id: u64,
    pub class_name: String,
    pub attributes: Vec<StepValue>,
}

impl EntityInstance {
    pub fn new(id: u64, class_name: impl Into<String>, attributes: Vec<StepValue>) -> Self {
        Self {
            id,
            class_name: class_name.into(),
            attributes,
        }
    }

    pub fn attr(&self, index: usize) -> &StepValue {
        self.attributes.get(index).unwrap_or(&StepValue::Unset)
    }

    pub fn refs(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for a in &self.attributes {
            a.collect_refs(&mut out);
        }
        out
    }
}

pub fn is_valid_class_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// File header records.
#[derive(Debug, Clone, PartialEq)]
pub struct StepHeader {
    pub description: Vec<String>,
    pub implementation_level: String,
    pub name: String,
    pub time_stamp: String,
    pub author: Vec<String>,
    pub organization: Vec<String>,
    pub preprocessor_version: String,
    pub originating_system: String,
    pub authorization: String,
    pub schema: String,
}

impl StepHeader {
    pub fn ifc4(name: impl Into<String>, time_stamp: impl Into<String>) -> Self {
        Self {
            description: vec!["ViewDefinition [DesignTransferView]".to_string()],
            implementation_level: "2;1".to_string(),
            name: name.into(),
            time_stamp: time_stamp.into(),
            author: vec![String::new()],
            organization: vec![String::new()],
            preprocessor_version: concat!("ifc-mcp ", env!("CARGO_PKG_VERSION")).to_string(),
            originating_system: "ifc-mcp".to_string(),
            authorization: String::new(),
            schema: "IFC4".to_string(),
        }
    }
}

impl fmt::Display for StepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        super::write::write_value(&mut s, self);
        f.write_str(&s)
    }
}
