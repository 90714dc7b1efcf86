//! Command-line interface for the phase covariant channel toolkit.
//!
//! Subcommands: `region` (parameter-space scans), `simulate` (trajectory
//! and rate time series), `divisibility` (interval reports), `kernel`
//! (Laplace-domain admissibility), `family-list` (built-in presets).
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.
//! Errors are emitted as JSON on stderr.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{KernelConfig, RunConfig, ScanConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Parser)]
#[command(name = "phasecov", version, about = "Phase covariant qubit channel toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the classification tolerance band
    #[arg(long)]
    tol: Option<f64>,
    /// Override grid steps (all three axes for region, time grid otherwise)
    #[arg(long)]
    grid: Option<usize>,
    /// Override the time horizon
    #[arg(long)]
    t_max: Option<f64>,
    /// Worker threads for scans (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan a (lambda, lambda_z, t_z) grid against region predicates
    Region(Common),
    /// Emit trajectory, rate, and population time series
    Simulate(Common),
    /// Classify CP-/P-divisibility and distinguishability intervals
    Divisibility(Common),
    /// Analyze a Laplace-domain memory kernel
    Kernel(Common),
    /// List the built-in dynamics families
    FamilyList(Common),
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Option<PathBuf>) -> Result<Option<T>, CliError> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| CliError::Config(format!("invalid config {}: {e}", p.display())))
        }
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        }
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
    }
}

fn setup_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn tol_of(common: &Common) -> Result<f64, CliError> {
    match common.tol {
        None => Ok(phasecov::EPS),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(CliError::Config(format!(
            "tol must be a positive finite number, got {t}"
        ))),
    }
}

fn run(cmd: &Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Region(common) => {
            setup_threads(common.threads)?;
            let mut cfg: ScanConfig = load_config(&common.config)?.unwrap_or_default();
            if let Some(steps) = common.grid {
                cfg.lambda.steps = steps;
                cfg.lambda_z.steps = steps;
                cfg.t_z.steps = steps;
            }
            let format = common.format.unwrap_or(Format::Csv);
            let out = commands::cmd_region(&cfg, format, tol_of(common)?)?;
            write_output(&common.out, &out)
        }
        Cmd::Simulate(common) | Cmd::Divisibility(common) => {
            let mut cfg: RunConfig = load_config(&common.config)?.ok_or_else(|| {
                CliError::Config("a --config file with a \"source\" is required".into())
            })?;
            if let Some(t) = common.t_max {
                cfg.t_max = t;
            }
            if let Some(n) = common.grid {
                cfg.n_grid = n;
            }
            match cmd {
                Cmd::Simulate(_) => {
                    let format = common.format.unwrap_or(Format::Csv);
                    write_output(&common.out, &commands::cmd_simulate(&cfg, format)?)
                }
                _ => {
                    let format = common.format.unwrap_or(Format::Json);
                    write_output(&common.out, &commands::cmd_divisibility(&cfg, format)?)
                }
            }
        }
        Cmd::Kernel(common) => {
            let mut cfg: KernelConfig = load_config(&common.config)?.ok_or_else(|| {
                CliError::Config("a --config file with a kernel or example is required".into())
            })?;
            if let Some(t) = common.t_max {
                cfg.t_max = t;
            }
            if let Some(n) = common.grid {
                cfg.n_grid = n;
            }
            let format = common.format.unwrap_or(Format::Json);
            write_output(&common.out, &commands::cmd_kernel(&cfg, format)?)
        }
        Cmd::FamilyList(common) => {
            let format = common.format.unwrap_or(Format::Json);
            write_output(&common.out, &commands::cmd_family_list(format)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let doc = serde_json::json!({
                "schema": commands::SCHEMA,
                "error": { "kind": "config", "message": e.to_string() },
            });
            eprintln!("{doc}");
            return ExitCode::from(2);
        }
    };
    match run(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({
                "schema": commands::SCHEMA,
                "error": { "kind": e.kind(), "message": e.message() },
            });
            eprintln!("{doc}");
            ExitCode::from(e.exit_code())
        }
    }
}
