//! `ktbill`: runs billiard and projectivity experiments described by a
//! config file and writes CSV/SVG artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ktbill_core::config::ExperimentConfig;
use ktbill_core::Error;

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "ktbill", version, about = "T-billiard and projective reflection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment file with `[body NAME]` and `[experiment]` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Tolerance; overrides `tol` in the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Reflect one line at the boundary of K under every reflection law.
    Reflect,
    /// Iterate the T-billiard map and draw the orbit.
    Trace,
    /// Measure how far parallel-chord involutions are from projective.
    Projtest,
    /// Osculating conics (2D) or quadrics (higher dimensions) along the boundary.
    Osculate,
    /// Least action of closed orbits for m = 2..m_max bounces.
    Capacity,
    /// Projectivity residual along the ellipse-to-superellipse family.
    Sweep,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { line, message } if line == 0 => CliError::Config(message),
            Error::Parse { line, message } => CliError::Config(format!("line {line}: {message}")),
            other => CliError::Numeric(other),
        }
    }
}

pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub tol: Option<f64>,
}

impl Context {
    pub fn tol_or(&self, default: f64) -> Result<f64, CliError> {
        match self.tol {
            Some(t) => Ok(t),
            None => Ok(self.config.f64_or("tol", default)?),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    if let Some(t) = cli.tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::Config("--tol must be a positive number".into()));
        }
    }
    let config = ExperimentConfig::load(&path).map_err(|e| match CliError::from(e) {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let ctx = Context {
        config,
        seed: cli.seed,
        out: cli.out,
        tol: cli.tol,
    };
    match cli.command {
        Command::Reflect => commands::reflect(&ctx),
        Command::Trace => commands::trace(&ctx),
        Command::Projtest => commands::projtest(&ctx),
        Command::Osculate => commands::osculate(&ctx),
        Command::Capacity => commands::capacity(&ctx),
        Command::Sweep => commands::sweep(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Io(m)) => {
            eprintln!("output error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("numeric failure: {e}");
            ExitCode::from(2)
        }
    }
}
