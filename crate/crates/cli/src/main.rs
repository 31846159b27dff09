//! `padic-tori`: run a job file through one of the toolkit's computations and emit a JSON report.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{JobConfig, OracleConfig, SCHEMA_VERSION};
use error::CliError;

#[derive(Parser)]
#[command(name = "padic-tori", version, about = "Admissibility, multiplicities and volumes for anisotropic tori in p-adic Sp(W)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-of-tower precision in uniformizer digits; overrides the job file.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Level N of the finite oracle quotient; overrides the job file.
    #[arg(long, global = true)]
    oracle_level: Option<u32>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized property checks run by `verify`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
enum Command {
    /// List the subtori S_d of T.
    Classify,
    /// Decide admissibility, with certificates.
    Admissible,
    /// Branching multiplicities m(χ).
    Multiplicity,
    /// Volumes of symplectic reductions.
    Volume,
    /// Cross-check closed forms against the finite-quotient oracle.
    Verify,
    /// Classify minimal Z[Γ]-submodules against brute-force enumeration.
    AppendixA,
    /// Whether k′/k carries an elliptic norm-one torus.
    Embeddable,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Admissible => "admissible",
            Command::Multiplicity => "multiplicity",
            Command::Volume => "volume",
            Command::Verify => "verify",
            Command::AppendixA => "appendix-a",
            Command::Embeddable => "embeddable",
        }
    }

    fn needs_config(self) -> bool {
        !matches!(self, Command::AppendixA)
    }
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: u128,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    schema_version: u32,
    command: &'static str,
    config: JobConfig,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema_version: u32,
    error: &'a CliError,
}

fn effective_config(cli: &Cli) -> Result<JobConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => JobConfig::load(path)?,
        None if cli.command.needs_config() => return Err(CliError::config(format!("`{}` needs --config", cli.command.name()))),
        None => JobConfig::default(),
    };
    if let Some(p) = cli.precision {
        cfg.precision = Some(p);
    }
    if let Some(n) = cli.oracle_level {
        cfg.oracle.get_or_insert_with(OracleConfig::default).level = Some(n);
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    Ok(cfg)
}

fn render<T: Serialize>(command: Command, cfg: JobConfig, result: T, start: Instant) -> Result<String, CliError> {
    let timing = cfg.report_timing.then(|| Timing { elapsed_ms: start.elapsed().as_millis() });
    let report = Report { schema_version: SCHEMA_VERSION, command: command.name(), config: cfg, result, timing };
    serde_json::to_string_pretty(&report).map_err(|e| CliError { code: error::ErrorCode::Internal, message: e.to_string() })
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let cfg = effective_config(cli)?;
    let c = cli.command;
    match c {
        Command::Classify => render(c, cfg.clone(), commands::classify(&cfg)?, start),
        Command::Admissible => render(c, cfg.clone(), commands::admissible(&cfg)?, start),
        Command::Multiplicity => render(c, cfg.clone(), commands::multiplicities(&cfg)?, start),
        Command::Volume => render(c, cfg.clone(), commands::volumes(&cfg)?, start),
        Command::Verify => render(c, cfg.clone(), commands::verify(&cfg)?, start),
        Command::AppendixA => render(c, cfg.clone(), commands::appendix_a(&cfg)?, start),
        Command::Embeddable => render(c, cfg.clone(), commands::embeddable(&cfg)?, start),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::io(format!("{}: {e}", path.display()))),
        None => writeln!(std::io::stdout(), "{text}").map_err(|e| CliError::io(e.to_string())),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::to_string(&ErrorReport { schema_version: SCHEMA_VERSION, error: &e }).unwrap_or_default();
            eprintln!("{body}");
            ExitCode::from(e.code.exit_status() as u8)
        }
    }
}
