use std::collections::BTreeSet;

use serde_json::{json, Value};

use super::session::Session;
use super::ToolFailure;

/// Tool groups, in listing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Query,
    Create,
    Edit,
    Knowledge,
    Snapshot,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Query, Group::Create, Group::Edit, Group::Knowledge, Group::Snapshot];

    pub fn letter(self) -> char {
        match self {
            Group::Query => 'q',
            Group::Create => 'c',
            Group::Edit => 'e',
            Group::Knowledge => 'k',
            Group::Snapshot => 's',
        }
    }

    pub fn from_name(s: &str) -> Option<Group> {
        Some(match s.trim().to_ascii_lowercase().as_str() {
            "q" | "query" => Group::Query,
            "c" | "create" => Group::Create,
            "e" | "edit" => Group::Edit,
            "k" | "knowledge" => Group::Knowledge,
            "s" | "snapshot" => Group::Snapshot,
            _ => return None,
        })
    }
}

/// Parses a comma-separated group list such as `q,c,e`.
pub fn parse_groups(text: &str) -> Result<BTreeSet<Group>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Group::from_name(s).ok_or_else(|| format!("unknown tool group {s:?}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolDescriptor {
    pub name: &'static str,
    pub group: Group,
    pub description: &'static str,
    pub input_schema: Value,
    pub read_only: bool,
    pub destructive: bool,
}

impl ToolDescriptor {
    /// Wire form used by `tools/list`.
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema,
            "annotations": {
                "readOnlyHint": self.read_only,
                "destructiveHint": self.destructive,
            },
        })
    }
}

pub type Handler = fn(&mut Session, &Value) -> Result<Value, ToolFailure>;

#[derive(Clone)]
pub struct Tool {
    pub descriptor: ToolDescriptor,
    pub handler: Handler,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("duplicate tool name {0}")]
    DuplicateName(String),
}

/// Tools sorted by group, then name.
pub struct Registry {
    tools: Vec<Tool>,
}

impl Registry {
    pub fn new(mut tools: Vec<Tool>) -> Result<Self, RegistryError> {
        let mut seen = BTreeSet::new();
        for t in &tools {
            if !seen.insert(t.descriptor.name) {
                return Err(RegistryError::DuplicateName(t.descriptor.name.to_string()));
            }
        }
        tools.sort_by(|a, b| (a.descriptor.group, a.descriptor.name).cmp(&(b.descriptor.group, b.descriptor.name)));
        Ok(Registry { tools })
    }

    /// Every built-in tool.
    pub fn standard() -> Self {
        Registry::new(super::catalog::tools()).expect("built-in tool names are unique")
    }

    pub fn descriptors(&self, groups: &BTreeSet<Group>) -> Vec<&ToolDescriptor> {
        self.tools
            .iter()
            .map(|t| &t.descriptor)
            .filter(|d| groups.contains(&d.group))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&Tool> {
        self.tools.iter().find(|t| t.descriptor.name == name)
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }
}
