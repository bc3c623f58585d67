//! Scenario runner behind the `qbm` binary.
//!
//! A scenario is a TOML file (see [`config::Config`]); [`run`] evaluates it
//! and writes one CSV plus a `.provenance.toml` sidecar holding the resolved
//! configuration. Output depends only on the scenario, never on thread count
//! or wall-clock time.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{Command, Config};
pub use output::{emit_csv, Series};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in {operation}: {source}")]
    Numerical {
        operation: String,
        #[source]
        source: qbm_core::Error,
    },
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for numerical failures,
    /// 1 for filesystem errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}

pub(crate) trait Context<T> {
    fn during(self, operation: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for qbm_core::Result<T> {
    fn during(self, operation: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical {
            operation: operation.into(),
            source,
        })
    }
}

/// What a completed run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub provenance: PathBuf,
    pub rows: usize,
    /// Regime warnings raised along the way; they do not fail the run.
    pub warnings: Vec<String>,
}

/// Runs a scenario. `command` overrides the scenario's own `command` key;
/// relative paths inside the scenario resolve against `base_dir`.
pub fn run(
    command: Option<Command>,
    config_text: &str,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<RunSummary, CliError> {
    let mut config: Config = config_text.parse()?;
    let command = match (command, config.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Config(format!(
                "command '{a}' conflicts with '{b}' in the scenario"
            )))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(CliError::Config("no command given".into())),
    };
    config.command = Some(command);
    let file_name = config.output.clone().unwrap_or_else(|| format!("{command}.csv"));
    config.output = Some(file_name.clone());

    let outcome = commands::execute(command, &config, base_dir)?;

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let csv = out_dir.join(&file_name);
    let provenance = out_dir.join(format!("{file_name}.provenance.toml"));
    emit_csv(&outcome.series, &csv)?;
    output::emit_provenance(&config.to_toml(), &provenance)?;
    Ok(RunSummary {
        csv,
        provenance,
        rows: outcome.series.rows(),
        warnings: outcome.warnings,
    })
}
