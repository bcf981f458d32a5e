pub mod cli;
pub mod correlation;
pub mod data;
pub mod discrete;
pub mod error;
pub mod evaluation;
pub mod fofc;
pub mod normal;
pub mod sem;
pub mod studies;
pub mod tetrad;

pub use error::{Error, Result};

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;
