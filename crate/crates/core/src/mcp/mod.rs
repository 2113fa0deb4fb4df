//! MCP server: JSON-RPC 2.0 framing, tool registry, argument validation
//! and dispatch into the model, query, knowledge and snapshot modules.

mod catalog;
pub mod registry;
pub mod schema;
pub mod server;
pub mod session;

pub use registry::{parse_groups, Group, Registry, RegistryError, Tool, ToolDescriptor};
pub use schema::{validate, Violation};
pub use server::{handle_line, handle_request, serve_lines, serve_stdio, serve_tcp, PROTOCOL_VERSION, SERVER_NAME};
pub use session::{CallOutcome, Session};

use serde_json::{json, Value};

use crate::model::ModelError;
use crate::query::QueryError;
use crate::snapshot::SnapshotError;
use crate::tools::ToolError;

/// In-band tool error: a stable code and a human-readable message.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolFailure {
    pub code: String,
    pub message: String,
}

impl ToolFailure {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ToolFailure {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": self.code, "message": self.message})
    }
}

impl From<ToolError> for ToolFailure {
    fn from(e: ToolError) -> Self {
        ToolFailure::new(e.code(), e.to_string())
    }
}

impl From<ModelError> for ToolFailure {
    fn from(e: ModelError) -> Self {
        ToolError::from(e).into()
    }
}

impl From<QueryError> for ToolFailure {
    fn from(e: QueryError) -> Self {
        ToolFailure::new(e.code(), e.to_string())
    }
}

impl From<SnapshotError> for ToolFailure {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Model(m) => m.into(),
            SnapshotError::EmptyModel => ToolFailure::new("EmptyModel", e.to_string()),
            SnapshotError::UnknownView(_) => ToolFailure::new("InvalidParams", e.to_string()),
        }
    }
}
