//! Scenario runner and exporters behind the `oimac` binary.

pub mod config;
pub mod emit;
pub mod scenarios;

use std::io::Write;

pub use config::{Args, Format, Scenario, ScenarioConfig};
pub use emit::{emit, Document, Payload};
pub use scenarios::run_scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] oimac::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Run a configured scenario and write its output.
pub fn run(cfg: &ScenarioConfig, sink: &mut dyn Write) -> Result<Document, CliError> {
    let doc = run_scenario(cfg)?;
    emit(&doc, cfg.units, cfg.format, cfg.out.as_deref(), sink)?;
    Ok(doc)
}
