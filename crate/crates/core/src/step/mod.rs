//! ISO 10303-21 (STEP) exchange files: values, reader, writer and GlobalIds.

mod guid;
mod parse;
mod value;
mod write;

use std::collections::BTreeMap;

pub use guid::{guid_decode, guid_encode, Guid, GuidError, GuidGenerator, ALPHABET};
pub use parse::parse_step;
pub use value::{is_valid_class_name, EntityInstance, StepHeader, StepValue};
pub use write::{encode_string, format_real, write_entity, write_step};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate instance id #{0}")]
    DuplicateId(u64),
    #[error("reference to undefined instance #{0}")]
    DanglingRef(u64),
    #[error("invalid header: {0}")]
    Header(String),
}

/// Returns the smallest unresolved reference, if any.
pub fn find_dangling(entities: &BTreeMap<u64, EntityInstance>) -> Option<u64> {
    entities
        .values()
        .flat_map(|e| e.refs())
        .filter(|id| !entities.contains_key(id))
        .min()
}

pub(crate) fn check_refs(entities: &BTreeMap<u64, EntityInstance>) -> Result<(), StepError> {
    match find_dangling(entities) {
        Some(id) => Err(StepError::DanglingRef(id)),
        None => Ok(()),
    }
}
