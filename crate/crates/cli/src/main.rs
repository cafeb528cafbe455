//! `replayforge`: runs continual-learning benchmarks, exports task data and
//! summarizes run reports.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod config;
mod export;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "replayforge", version, about = "Continual-learning benchmark for one-way-delay regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every (method, seed) pair through a task sequence and write reports.
    Run(RunArgs),
    /// Write a case's synthesized task datasets and schema.
    ExportData(ExportArgs),
    /// Print a methods-by-metrics table for a directory of reports.
    Report(ReportArgs),
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Fixed sequence id (1..=8).
    #[arg(long, conflicts_with = "scenario")]
    pub case: Option<u8>,
    /// `key = value` scenario document; flags override its values.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Comma-separated method names (default: all).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Real-data mixing weight in [0, 1] (default 0.5).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated seeds (default: five seeds from REPLAYFORGE_SEED or 1).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Rows per task (default 2000).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report directory (default `runs`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tail percentile in (0, 100) (default 90).
    #[arg(long)]
    pub tail_pct: Option<f64>,
    /// Parallel runs (default 1).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Checkpoint directory; existing checkpoints there are resumed.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Replay volume policy (`match-current`).
    #[arg(long)]
    pub policy: Option<String>,
    /// Solver epochs per task.
    #[arg(long)]
    pub solver_epochs: Option<usize>,
    /// Generator epochs per fit.
    #[arg(long)]
    pub generator_epochs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub case: u8,
    #[arg(long)]
    pub out: PathBuf,
    /// Data seed (default REPLAYFORGE_SEED or 1).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rows per task (default 2000).
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding run reports.
    pub dir: PathBuf,
    /// Show one metric: `ave_mape`, `forgetting` or `f_k`.
    #[arg(long)]
    pub metric: Option<String>,
    /// Step size for `--metric f_k`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Tail view: tail AveMAPE, tail forgetting and coverage.
    #[arg(long)]
    pub tail: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run::cmd_run(&args),
        Command::ExportData(args) => export::cmd_export_data(&args),
        Command::Report(args) => report::cmd_report(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
