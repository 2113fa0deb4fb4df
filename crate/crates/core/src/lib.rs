pub mod geometry;
pub mod json;
pub mod knowledge;
pub mod mcp;
pub mod model;
pub mod query;
pub mod scene;
pub mod snapshot;
pub mod step;
pub mod tools;
pub mod trace;
