use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use serde_json::Value;

use super::registry::{Group, Registry};
use super::schema::{validate, Violation};
use super::ToolFailure;
use crate::knowledge::{index_corpus, KnowledgeError, KnowledgeIndex};
use crate::model::IfcModel;

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

/// One client's state: its model, enabled groups and knowledge index.
pub struct Session {
    pub id: String,
    pub model: IfcModel,
    pub calls: u64,
    groups: BTreeSet<Group>,
    corpus: Option<PathBuf>,
    knowledge: Option<KnowledgeIndex>,
}

/// Result of routing one tool call.
#[derive(Debug, Clone, PartialEq)]
pub enum CallOutcome {
    Ok(Value),
    Failed(ToolFailure),
    InvalidParams(Vec<Violation>),
    UnknownTool(String),
}

impl Session {
    pub fn new(model: IfcModel) -> Self {
        Session {
            id: format!("session-{}", NEXT_SESSION.fetch_add(1, Ordering::Relaxed)),
            model,
            calls: 0,
            groups: Group::ALL.into_iter().collect(),
            corpus: None,
            knowledge: None,
        }
    }

    pub fn with_groups(mut self, groups: BTreeSet<Group>) -> Self {
        self.groups = groups;
        self
    }

    /// Knowledge source: a saved index file or a directory indexed on first use.
    pub fn with_corpus(mut self, path: impl Into<PathBuf>) -> Self {
        self.corpus = Some(path.into());
        self.knowledge = None;
        self
    }

    pub fn with_index(mut self, index: KnowledgeIndex) -> Self {
        self.knowledge = Some(index);
        self
    }

    pub fn groups(&self) -> &BTreeSet<Group> {
        &self.groups
    }

    pub fn knowledge(&mut self) -> Result<&KnowledgeIndex, KnowledgeError> {
        if self.knowledge.is_none() {
            let path = self.corpus.clone().ok_or(KnowledgeError::EmptyIndex)?;
            let index = if path.is_dir() {
                index_corpus(&path)?
            } else {
                KnowledgeIndex::load(&path)?
            };
            self.knowledge = Some(index);
        }
        Ok(self.knowledge.as_ref().expect("index loaded above"))
    }

    /// Validates `args` against the tool's schema and runs it. Tools in
    /// disabled groups are reported as unknown.
    pub fn call_tool(&mut self, registry: &Registry, name: &str, args: &Value) -> CallOutcome {
        let Some(tool) = registry.get(name).filter(|t| self.groups.contains(&t.descriptor.group)) else {
            return CallOutcome::UnknownTool(name.to_string());
        };
        let violations = validate(&tool.descriptor.input_schema, args);
        if !violations.is_empty() {
            return CallOutcome::InvalidParams(violations);
        }
        self.calls += 1;
        match (tool.handler)(self, args) {
            Ok(v) => CallOutcome::Ok(v),
            Err(e) => CallOutcome::Failed(e),
        }
    }
}
