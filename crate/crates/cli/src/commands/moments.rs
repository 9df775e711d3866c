//! `fdpu moments`: asymptotic FDP moments for a fixed μ and Σ.
//!
//! Config schema:
//!
//! ```json
//! {
//!   "n": 200,
//!   "mu": {"values": [..]} | {"file": "mu.csv"} | {"alternatives": {"p1": 10, "signal_multiple": 2.0}},
//!   "sigma": {"identity": 500} | {"file": "sigma.csv"} | {"values": [[..], ..]},
//!   "thresholds": [0.02, 0.05],
//!   "engine": "approx",
//!   "mc_reps": 10000,
//!   "quad": {"nodes_1d": 24, "domain_halfwidth": 8.0},
//!   "seed": 0,
//!   "sparsity_cutoff": 0.0
//! }
//! ```
//!
//! With `alternatives`, `p1` randomly placed tests get noncentrality
//! `signal_multiple · |q_t|` at each threshold; the placement depends on the
//! seed only.

use super::{apply_engine_flags, cov_method, default_engine, default_mc_reps, to_value, x100, Execution};
use crate::config::RawConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::InputFile;
use crate::MomentsArgs;
use fdpu_core::fdp_moments::diagnostics;
use fdpu_core::io::read_vector;
use fdpu_core::numerics::QuadSpec;
use fdpu_core::pairwise_cov::{CovMethod, EngineKind};
use fdpu_core::rng::{derive_seed, purpose};
use fdpu_core::sim::alternative_mu;
use fdpu_core::{fdp_moments, DiagnosticsReport, FdpMoments, PairwiseCovariances, TestingProblem, Threshold};
use nalgebra::DMatrix;
use std::path::PathBuf;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub n: usize,
    pub mu: MuSpec,
    pub sigma: SigmaSpec,
    pub thresholds: Vec<f64>,
    #[serde(default = "default_engine")]
    pub engine: EngineKind,
    #[serde(default = "default_mc_reps")]
    pub mc_reps: usize,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sparsity_cutoff: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MuSpec {
    Values(Vec<f64>),
    File(PathBuf),
    Alternatives(AlternativesSpec),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativesSpec {
    pub p1: usize,
    #[serde(default = "default_signal")]
    pub signal_multiple: f64,
}

fn default_signal() -> f64 {
    2.0
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSpec {
    Identity(usize),
    File(PathBuf),
    Values(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentsReport {
    pub n: usize,
    pub p: usize,
    pub p1: usize,
    pub method: CovMethod,
    pub sparsity_cutoff: f64,
    pub results: Vec<ThresholdResult>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ThresholdResult {
    pub t: f64,
    pub critical: f64,
    /// Noncentrality given to the alternatives when generated from the config.
    pub alternative_mu: Option<f64>,
    pub mean_x100: String,
    pub sd_x100: String,
    pub moments: FdpMoments,
    pub diagnostics: DiagnosticsReport,
}

pub fn load(args: &MomentsArgs) -> CliResult<(MomentsConfig, Vec<InputFile>)> {
    if args.common.config.is_none() {
        return Err(CliError::config("moments needs --config"));
    }
    let mut raw = RawConfig::load(args.common.config.as_deref())?;
    apply_engine_flags(&mut raw, &args.engine)?;
    if let Some(e) = args.engine.engine {
        raw.set("engine", super::engine_value(e.into())?);
    }
    raw.set_opt("seed", args.common.seed);
    let mut cfg: MomentsConfig = raw.parse()?;
    let mut inputs = Vec::new();
    if let MuSpec::File(p) = &mut cfg.mu {
        *p = raw.resolve(p);
    }
    if let SigmaSpec::File(p) = &mut cfg.sigma {
        *p = raw.resolve(p);
    }
    cfg.validate()?;
    if let MuSpec::File(p) = &cfg.mu {
        inputs.push(InputFile::hash(p)?);
    }
    if let SigmaSpec::File(p) = &cfg.sigma {
        inputs.push(InputFile::hash(p)?);
    }
    Ok((cfg, inputs))
}

impl MomentsConfig {
    pub fn validate(&self) -> CliResult<()> {
        super::validate_thresholds(&self.thresholds)?;
        super::validate_quad(&self.quad)?;
        if !(self.sparsity_cutoff >= 0.0) {
            return Err(CliError::config("config: at `sparsity_cutoff`: must be ≥ 0"));
        }
        if self.engine == EngineKind::MonteCarlo && self.mc_reps < 100 {
            return Err(CliError::config("config: at `mc_reps`: need at least 100 replicates"));
        }
        Ok(())
    }

    fn sigma(&self) -> CliResult<DMatrix<f64>> {
        match &self.sigma {
            SigmaSpec::Identity(p) => Ok(DMatrix::identity(*p, *p)),
            SigmaSpec::File(path) => Ok(super::read_input(path)?.data),
            SigmaSpec::Values(rows) => {
                let p = rows.len();
                if let Some(i) = rows.iter().position(|r| r.len() != p) {
                    return Err(CliError::config(format!(
                        "config: at `sigma.values[{i}]`: expected {p} entries, found {}",
                        rows[i].len()
                    )));
                }
                Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
            }
        }
    }

    fn mu(&self, p: usize, thr: &Threshold) -> CliResult<(Vec<f64>, Option<f64>)> {
        let mu = match &self.mu {
            MuSpec::Values(v) => v.clone(),
            MuSpec::File(path) => read_vector(path).map_err(|e| super::input_error(path, e))?,
            MuSpec::Alternatives(a) => {
                if a.p1 > p {
                    return Err(CliError::config(format!(
                        "config: at `mu.alternatives.p1`: {} alternatives exceed p = {p}",
                        a.p1
                    )));
                }
                let value = a.signal_multiple * thr.critical();
                let seed = derive_seed(self.seed, &[purpose::ALT_LOCATIONS]);
                return Ok((alternative_mu(p, a.p1, value, seed), Some(value)));
            }
        };
        if mu.len() != p {
            return Err(CliError::config(format!("mu has {} entries but sigma is {p}×{p}", mu.len())));
        }
        Ok((mu, None))
    }
}

pub fn compute(cfg: &MomentsConfig) -> CliResult<MomentsReport> {
    let sigma = cfg.sigma()?;
    let p = sigma.nrows();
    let method = cov_method(cfg.engine, cfg.mc_reps, cfg.quad, cfg.seed);
    let mut results = Vec::with_capacity(cfg.thresholds.len());
    let mut p1 = 0;
    for &t in &cfg.thresholds {
        let thr = Threshold::new(t, cfg.n)?;
        let (mu, alternative) = cfg.mu(p, &thr)?;
        let problem = TestingProblem::new(cfg.n, mu, sigma.clone())?;
        p1 = problem.p1();
        let cov = PairwiseCovariances::new(&problem, &thr, method, cfg.sparsity_cutoff)?;
        let moments = fdp_moments(&problem, &thr, &cov)?;
        results.push(ThresholdResult {
            t,
            critical: thr.critical(),
            alternative_mu: alternative,
            mean_x100: x100(moments.mean),
            sd_x100: x100(moments.sd),
            diagnostics: diagnostics(&problem, &thr)?,
            moments,
        });
    }
    Ok(MomentsReport {
        n: cfg.n,
        p,
        p1,
        method,
        sparsity_cutoff: cfg.sparsity_cutoff,
        results,
    })
}

pub fn run(args: &MomentsArgs) -> CliResult<Execution> {
    let (cfg, inputs) = load(args)?;
    let report = compute(&cfg)?;
    Ok(Execution {
        command: "moments",
        config: to_value(&cfg)?,
        seed: cfg.seed,
        inputs,
        files: vec![("moments.json".into(), super::pretty(&report)?)],
    })
}
