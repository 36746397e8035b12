//! Config-driven runs of the conflux diagnostics, conformal machinery, flux
//! solvers and field-line tracer.
//!
//! Exit codes: 0 pass, 1 threshold or convergence failure, 2 usage or
//! configuration error.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

use serde_json::Value;

pub use config::{Command, RunConfig};
use output::OutDir;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A run that could not produce a verdict.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or usage: exit 2.
    Config(anyhow::Error),
    /// The computation itself failed: exit 1.
    Failure(anyhow::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e:#}"),
            RunError::Failure(e) => write!(f, "run failed: {e:#}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Failure(_) => 1,
        }
    }
}

/// Tags errors with the phase they came from.
pub trait Phase<T> {
    fn config(self) -> Result<T, RunError>;
    fn failure(self) -> Result<T, RunError>;
}

impl<T, E: Into<anyhow::Error>> Phase<T> for Result<T, E> {
    fn config(self) -> Result<T, RunError> {
        self.map_err(|e| RunError::Config(e.into()))
    }

    fn failure(self) -> Result<T, RunError> {
        self.map_err(|e| RunError::Failure(e.into()))
    }
}

/// Verdict and summary of a finished command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub summary: Value,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<std::path::PathBuf>,
    pub seed: Option<u64>,
}

/// Merges the subcommand and overrides into the config.
pub fn resolve(command: Command, mut cfg: RunConfig, overrides: &Overrides) -> Result<RunConfig, RunError> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(RunError::Config(anyhow::anyhow!("config is for `{}` but `{}` was requested", c.name(), command.name())));
        }
    }
    cfg.command = Some(command);
    if let Some(out) = &overrides.out {
        cfg.outputs.dir = out.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    cfg.validate().config()?;
    Ok(cfg)
}

/// Runs a resolved config and writes its outputs plus `manifest.json`.
///
/// The manifest is written even when the run fails, with status `error`.
pub fn execute(cfg: &RunConfig, expect_fail: bool) -> Result<Outcome, RunError> {
    let command = cfg.command.ok_or_else(|| RunError::Config(anyhow::anyhow!("no command")))?;
    let mut out = OutDir::create(&cfg.outputs.dir).config()?;
    out.write_json("config.json", cfg).failure()?;
    let result = match command {
        Command::Check => commands::check::run(cfg, &mut out),
        Command::Conformal => commands::conformal::run(cfg, &mut out),
        Command::Solve => commands::solve::run(cfg, &mut out),
        Command::Trace => commands::trace::run(cfg, &mut out),
        Command::Catalog => commands::catalog::run(cfg, &mut out),
    };
    let (status, summary) = match &result {
        Ok(o) => (if o.pass { "pass" } else { "fail" }, o.summary.clone()),
        Err(e) => ("error", Value::String(e.to_string())),
    };
    out.write_manifest(cfg, status, expect_fail, &summary).failure()?;
    result
}

/// Exit code for a finished run.
pub fn exit_code(result: &Result<Outcome, RunError>, expect_fail: bool) -> i32 {
    match result {
        Ok(o) if o.pass != expect_fail => 0,
        Ok(_) => 1,
        Err(e) => e.exit_code(),
    }
}
