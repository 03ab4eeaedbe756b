//! `hardy-sim`: exact tables, Monte Carlo counts and LHV analysis for the
//! two-interferometer Hardy experiment.
//!
//! Data goes to standard output (or `--out`), the human summary to standard
//! error. Exit codes: 0 success, 2 configuration or parse error, 3
//! inconclusive statistics.

mod commands;
mod config;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommonArgs, Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hardy-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Exact coincidence probabilities for the four settings
    Analytic,
    /// Sampled counts for the four settings plus the LHV verdict
    Simulate {
        /// Calibrate pair efficiencies over all shutter combinations first
        #[arg(long)]
        calibrate: bool,
    },
    /// Outcome table of the annihilation thought experiment
    Thought,
    /// u/v-setting coincidence rate against source delay
    ScanDelay,
    /// Single-photon fringe p(d | detected) against phase
    ScanPhase,
    /// Check the local bound on all 16 deterministic strategies
    VerifyLhv,
    /// LHV margin against distinguishability and its zero crossing
    Threshold,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(hardy_core::Error),
    Inconclusive(String),
    Io(io::Error),
}

impl From<hardy_core::Error> for CliError {
    fn from(e: hardy_core::Error) -> Self {
        match e {
            hardy_core::Error::Statistics(msg) => CliError::Inconclusive(msg),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(_) => 2,
            CliError::Inconclusive(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Inconclusive(msg) => write!(f, "inconclusive: {msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Result of one subcommand.
pub struct Output {
    pub csv: String,
    pub json: serde_json::Value,
    pub summary: Vec<String>,
    /// Data is written but the statistics did not settle the question.
    pub inconclusive: bool,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg: RunConfig = config::resolve(&cli.common)?;
    if let Command::Simulate { calibrate: true } = cli.command {
        cfg.calibrate = true;
    }
    let uses_network = matches!(cli.command, Command::Analytic | Command::Simulate { .. });
    if cfg.network.is_some() && !uses_network {
        return Err(CliError::Config(
            "--network applies only to analytic and simulate".into(),
        ));
    }
    let out = match cli.command {
        Command::Analytic => commands::analytic(&cfg)?,
        Command::Simulate { .. } => commands::simulate(&cfg)?,
        Command::Thought => commands::thought()?,
        Command::ScanDelay => commands::scan_delay(&cfg)?,
        Command::ScanPhase => commands::scan_phase(&cfg)?,
        Command::VerifyLhv => commands::verify_lhv(&cfg)?,
        Command::Threshold => commands::threshold(&cfg)?,
    };
    let data = match cfg.format {
        Format::Csv => out.csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json values serialize");
            s.push('\n');
            s
        }
    };
    match &cfg.out {
        Some(path) => fs::write(path, data).map_err(CliError::Io)?,
        None => io::stdout()
            .write_all(data.as_bytes())
            .map_err(CliError::Io)?,
    }
    for line in &out.summary {
        eprintln!("{line}");
    }
    Ok(out.inconclusive)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("hardy-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
