pub mod moments;
pub mod simulate;
pub mod two_sample;

use crate::config::RawConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::InputFile;
use crate::EngineArgs;
use fdpu_core::numerics::QuadSpec;
use fdpu_core::pairwise_cov::{CovMethod, EngineKind};
use fdpu_core::rng::{derive_seed, purpose};
use serde::Serialize;
use fdpu_core::io::{read_matrix, NamedMatrix};
use serde_json::Value;
use std::path::Path;

/// Everything a command produces, written out by the caller.
#[derive(Debug)]
pub struct Execution {
    pub command: &'static str,
    /// Effective config with flags applied and paths absolute.
    pub config: Value,
    pub seed: u64,
    pub inputs: Vec<InputFile>,
    /// File name and contents, in write order.
    pub files: Vec<(String, Vec<u8>)>,
}

pub fn pretty<T: Serialize>(v: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| CliError::config(format!("cannot serialize: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::config(format!("cannot serialize config: {e}")))
}

/// Threshold, mc-reps and quad-nodes overrides shared by all commands.
pub(crate) fn apply_engine_flags(raw: &mut RawConfig, flags: &EngineArgs) -> CliResult<()> {
    if !flags.thresholds.is_empty() {
        raw.set("thresholds", flags.thresholds.clone());
    }
    raw.set_opt("mc_reps", flags.mc_reps);
    if let Some(nodes) = flags.quad_nodes {
        raw.set_nested("quad", "nodes_1d", nodes)?;
    }
    Ok(())
}

pub(crate) fn engine_value(kind: EngineKind) -> CliResult<Value> {
    to_value(&kind)
}

pub(crate) fn cov_method(engine: EngineKind, mc_reps: usize, quad: QuadSpec, seed: u64) -> CovMethod {
    match engine {
        EngineKind::MonteCarlo => CovMethod::MonteCarlo {
            reps: mc_reps,
            seed: derive_seed(seed, &[purpose::PAIR_MC]),
        },
        EngineKind::Quadrature => CovMethod::Quadrature { spec: quad },
    }
}

pub(crate) fn validate_quad(quad: &QuadSpec) -> CliResult<()> {
    QuadSpec::new(quad.nodes_1d, quad.domain_halfwidth)?;
    Ok(())
}

pub(crate) fn validate_thresholds(ts: &[f64]) -> CliResult<()> {
    if ts.is_empty() {
        return Err(CliError::config("config: at `thresholds`: at least one threshold is required"));
    }
    if let Some(bad) = ts.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(CliError::config(format!("config: at `thresholds`: {bad} is not in (0, 1)")));
    }
    Ok(())
}

/// Input files are data, so every failure to read one is an input error
/// naming the file.
pub(crate) fn input_error(path: &Path, e: fdpu_core::Error) -> CliError {
    match e {
        fdpu_core::Error::Io(_) => CliError::config(e.to_string()),
        e => CliError::config(format!("{}: {e}", path.display())),
    }
}

pub(crate) fn read_input(path: &Path) -> CliResult<NamedMatrix> {
    read_matrix(path).map_err(|e| input_error(path, e))
}

/// Display value: ×100 rounded to two decimals.
pub(crate) fn x100(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

pub(crate) fn default_mc_reps() -> usize {
    10_000
}

pub(crate) fn default_engine() -> EngineKind {
    EngineKind::Quadrature
}
