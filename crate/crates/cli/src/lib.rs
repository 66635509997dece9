//! Front end for `mmlimits`: manifests, command execution and artifact emission.

pub mod args;
mod commands;
pub mod grid;
pub mod manifest;
mod output;

use std::fmt;

use mmlimits_core::MmError;

pub use commands::execute;
pub use manifest::{CommandKind, ExperimentManifest, Options, OutputPaths, Radius, SpaceSpec};
pub use output::{write_artifact, Artifact};

/// Version tag stamped on every artifact.
pub const VERSION: &str = env!("MMLIMITS_VERSION");

/// Cache directory for measurement sets.
pub const CACHE_ENV: &str = "MMLIMITS_CACHE_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad manifest, arguments or input data. Exit code 2.
    Validation(String),
    /// A resource cap would be exceeded. Exit code 3.
    Resource(String),
    /// Anything else. Exit code 4.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Resource(m) => write!(f, "resource error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<MmError> for CliError {
    fn from(e: MmError) -> Self {
        match e {
            MmError::Resource(_) | MmError::SizeGuard { .. } => CliError::Resource(e.to_string()),
            MmError::Io(_) => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
