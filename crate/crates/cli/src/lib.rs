//! The `fdpu` command-line tool.
//!
//! ```text
//! fdpu moments    --config run.json [--threshold T]... [--engine mc|approx] ...
//! fdpu simulate   [--config table.json] [--factors-removed K] ...
//! fdpu two-sample [X.csv Y.csv] [--config cfg.json] [--ridge-lambda cv|VALUE] ...
//! ```
//!
//! Each command writes its report, the effective `config.json` and a
//! `manifest.json` into `--out`. Exit codes: 0 success, 2 usage, config or
//! input errors, 3 numeric failures.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::Execution;
use config::{absolute, config_hash};
use error::{CliError, CliResult};
use fdpu_core::pairwise_cov::EngineKind;
use manifest::{timestamp_now, RunManifest, TOOL_VERSION};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "fdpu", version, about = "Asymptotic mean and variance of the false discovery proportion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// FDP moments and diagnostics for a given μ and Σ.
    Moments(MomentsArgs),
    /// Simulation table over the synthetic dependence models.
    Simulate(SimulateArgs),
    /// Estimated FDP mean and SD for a two-sample comparison.
    TwoSample(TwoSampleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "FDPU_WORKERS")]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "fdpu_out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Rejection threshold; repeat for several.
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineFlag>,
    #[arg(long)]
    pub mc_reps: Option<usize>,
    #[arg(long)]
    pub quad_nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineFlag {
    Mc,
    Approx,
}

impl From<EngineFlag> for EngineKind {
    fn from(e: EngineFlag) -> Self {
        match e {
            EngineFlag::Mc => EngineKind::MonteCarlo,
            EngineFlag::Approx => EngineKind::Quadrature,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Principal factors removed from each model's correlation.
    #[arg(long)]
    pub factors_removed: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TwoSampleArgs {
    /// First sample (CSV or .bin); rows are observations.
    pub x: Option<PathBuf>,
    /// Second sample, same columns as the first.
    pub y: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub factors_removed: Option<usize>,
    #[arg(long)]
    pub pi0_lambda: Option<f64>,
    /// `cv` or a fixed penalty.
    #[arg(long)]
    pub ridge_lambda: Option<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Simulate(_) => "simulate",
            Command::TwoSample(_) => "two-sample",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Moments(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::TwoSample(a) => &a.common,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fdpu: error: {e}");
            e.exit_code()
        }
    }
}

fn worker_count(flag: Option<usize>) -> CliResult<usize> {
    match flag {
        Some(0) => Err(CliError::config("--workers must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn run(command: Command) -> CliResult<()> {
    let start = Instant::now();
    let common = command.common().clone();
    let workers = worker_count(common.workers)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    let exec = pool
        .install(|| match &command {
            Command::Moments(a) => commands::moments::run(a),
            Command::Simulate(a) => commands::simulate::run(a),
            Command::TwoSample(a) => commands::two_sample::run(a),
        })
        .map_err(|e| e.context(command.name()))?;
    write_outputs(exec, &common.out, workers, start)
}

fn write_outputs(exec: Execution, out: &std::path::Path, workers: usize, start: Instant) -> CliResult<()> {
    let out = absolute(out)?;
    std::fs::create_dir_all(&out).map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;
    let write = |name: &str, bytes: &[u8]| -> CliResult<PathBuf> {
        let path = out.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    };
    let mut outputs = Vec::new();
    for (name, bytes) in &exec.files {
        outputs.push(write(name, bytes)?);
    }
    outputs.push(write("config.json", &commands::pretty(&exec.config)?)?);
    let manifest = RunManifest {
        command: exec.command.to_owned(),
        config_hash: config_hash(&exec.config)?,
        root_seed: exec.seed,
        tool_version: TOOL_VERSION.to_owned(),
        timestamp: timestamp_now(),
        outputs,
        inputs: exec.inputs,
        workers,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    write("manifest.json", &commands::pretty(&manifest)?)?;
    Ok(())
}
