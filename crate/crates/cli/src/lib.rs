//! Batch front-end for the anisotropic variable-exponent verification
//! pipelines: structured run configurations, dependency-ordered execution,
//! and machine-readable reports.
//!
//! A run is described by a single JSON document (see [`config::RunConfig`]);
//! unknown keys are hard errors and the report embeds a hash of the exact
//! config bytes, so identical inputs reproduce byte-identical reports.

pub mod atomfile;
pub mod builtins;
pub mod config;
pub mod report;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] aniso_hardy_core::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
