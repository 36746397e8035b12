use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conflux_cli::{execute, exit_code, resolve, Command, Overrides, Phase, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "conflux", version, about = "Flux-form diagnostics, conformal changes, flux solvers and field lines")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `outputs.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Halton start index, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit 0 exactly when the run fails its checks.
    #[arg(long, global = true)]
    expect_fail: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Pointwise residual reports against thresholds.
    Check,
    /// Transformation laws and the energy identity under the canonical metric.
    Conformal,
    /// L² or L¹ flux problem on a complex.
    Solve,
    /// Field lines and their geodesic defects.
    Trace,
    /// List the named fields.
    Catalog,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Check => Command::Check,
            Sub::Conformal => Command::Conformal,
            Sub::Solve => Command::Solve,
            Sub::Trace => Command::Trace,
            Sub::Catalog => Command::Catalog,
        }
    }
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, RunError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", p.display())).config()?;
            RunConfig::from_json(&text).config()
        }
        None => serde_json::from_str("{}").config(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides { out: cli.out.clone(), seed: cli.seed };
    let result = load(cli.config.as_ref())
        .and_then(|cfg| resolve(cli.command.into(), cfg, &overrides))
        .and_then(|cfg| execute(&cfg, cli.expect_fail));
    match &result {
        Ok(o) => eprintln!("{}", if o.pass { "pass" } else { "fail" }),
        Err(e) => eprintln!("{e}"),
    }
    ExitCode::from(exit_code(&result, cli.expect_fail) as u8)
}
