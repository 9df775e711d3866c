//! `fdpu two-sample`: estimated FDP mean and SD from two samples.
//!
//! Config schema (every key but `x` and `y` optional):
//!
//! ```json
//! {
//!   "x": "x.csv", "y": "y.csv",
//!   "thresholds": [0.005, 0.02, 0.05],
//!   "k_deflate": 2,
//!   "pi0_lambda": 0.5,
//!   "ridge_lambda": "cv",
//!   "cv_folds": 5,
//!   "cv_grid": [0.0001, ..., 100.0],
//!   "engine": "approx",
//!   "mc_reps": 10000,
//!   "quad": {"nodes_1d": 24, "domain_halfwidth": 8.0},
//!   "seed": 0,
//!   "sparsity_cutoff": 0.0
//! }
//! ```
//!
//! Positional `X Y` arguments override `x` and `y`.

use super::{apply_engine_flags, cov_method, default_engine, default_mc_reps, to_value, x100, Execution};
use crate::config::{absolute, RawConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::InputFile;
use crate::TwoSampleArgs;
use fdpu_core::estimate::{log_grid, RidgeConfig, RidgeLambda, RidgeTarget, TwoSampleConfig, TwoSampleFit, DEFAULT_PI0_LAMBDA};
use fdpu_core::fdp_moments::DiagnosticsReport;
use fdpu_core::numerics::QuadSpec;
use fdpu_core::pairwise_cov::{CovMethod, EngineKind};
use fdpu_core::FdpMoments;
use serde_json::Value;
use std::path::PathBuf;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSampleSettings {
    pub x: PathBuf,
    pub y: PathBuf,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_k")]
    pub k_deflate: usize,
    #[serde(default = "default_pi0_lambda")]
    pub pi0_lambda: f64,
    #[serde(default)]
    pub ridge_lambda: RidgeChoice,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_grid")]
    pub cv_grid: Vec<f64>,
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

/// `"cv"` or a fixed penalty.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum RidgeChoice {
    Fixed(f64),
    #[default]
    #[serde(with = "cv_keyword")]
    Cv,
}

mod cv_keyword {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("cv")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        match String::deserialize(d)?.as_str() {
            "cv" => Ok(()),
            other => Err(D::Error::custom(format!("expected \"cv\" or a number, got {other:?}"))),
        }
    }
}

fn default_thresholds() -> Vec<f64> {
    vec![0.005, 0.02, 0.05]
}
fn default_k() -> usize {
    2
}
fn default_pi0_lambda() -> f64 {
    DEFAULT_PI0_LAMBDA
}
fn default_folds() -> usize {
    RidgeConfig::default().cv_folds
}
fn default_grid() -> Vec<f64> {
    log_grid(1e-4, 1e2, 25)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TwoSampleOutput {
    pub x: PathBuf,
    pub y: PathBuf,
    pub variables: Vec<String>,
    pub p: usize,
    pub n_eff: usize,
    pub method: CovMethod,
    pub results: Vec<ThresholdRow>,
    pub fit: TwoSampleFit,
}

/// One threshold: the estimated FDP limit and SD, raw and ×100.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ThresholdRow {
    pub t: f64,
    pub critical: f64,
    pub mean: f64,
    pub sd: f64,
    pub mean_x100: String,
    pub sd_x100: String,
    pub moments: FdpMoments,
    pub diagnostics: DiagnosticsReport,
}

impl TwoSampleSettings {
    pub fn core_config(&self) -> CliResult<TwoSampleConfig> {
        let ridge = RidgeConfig {
            lambda: match self.ridge_lambda {
                RidgeChoice::Fixed(v) => RidgeLambda::Fixed(v),
                RidgeChoice::Cv => RidgeLambda::Cv,
            },
            cv_grid: self.cv_grid.clone(),
            cv_folds: self.cv_folds,
            target: RidgeTarget::ScaledIdentity,
            seed: self.seed,
        };
        ridge.validate()?;
        if !(self.pi0_lambda > 0.0 && self.pi0_lambda < 1.0) {
            return Err(CliError::config(format!(
                "config: at `pi0_lambda`: {} is not in (0, 1)",
                self.pi0_lambda
            )));
        }
        Ok(TwoSampleConfig {
            k_deflate: self.k_deflate,
            ridge,
            pi0_lambda: self.pi0_lambda,
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        super::validate_thresholds(&self.thresholds)?;
        super::validate_quad(&self.quad)?;
        if !(self.sparsity_cutoff >= 0.0) {
            return Err(CliError::config("config: at `sparsity_cutoff`: must be ≥ 0"));
        }
        if self.engine == EngineKind::MonteCarlo && self.mc_reps < 100 {
            return Err(CliError::config("config: at `mc_reps`: need at least 100 replicates"));
        }
        self.core_config().map(|_| ())
    }
}

fn ridge_flag(s: &str) -> CliResult<Value> {
    if s.eq_ignore_ascii_case("cv") {
        return Ok(Value::from("cv"));
    }
    let v: f64 = s
        .parse()
        .map_err(|_| CliError::config(format!("--ridge-lambda: expected `cv` or a number, got {s:?}")))?;
    Ok(Value::from(v))
}

pub fn load(args: &TwoSampleArgs) -> CliResult<TwoSampleSettings> {
    let mut raw = RawConfig::load(args.common.config.as_deref())?;
    match (&args.x, &args.y) {
        (Some(x), Some(y)) => {
            raw.set("x", absolute(x)?.to_string_lossy().into_owned());
            raw.set("y", absolute(y)?.to_string_lossy().into_owned());
        }
        (None, None) => {}
        _ => return Err(CliError::config("both X and Y are required")),
    }
    apply_engine_flags(&mut raw, &args.engine)?;
    if let Some(e) = args.engine.engine {
        raw.set("engine", super::engine_value(e.into())?);
    }
    raw.set_opt("k_deflate", args.factors_removed);
    raw.set_opt("pi0_lambda", args.pi0_lambda);
    if let Some(s) = &args.ridge_lambda {
        raw.set("ridge_lambda", ridge_flag(s)?);
    }
    raw.set_opt("seed", args.common.seed);
    let mut cfg: TwoSampleSettings = raw.parse()?;
    cfg.x = raw.resolve(&cfg.x);
    cfg.y = raw.resolve(&cfg.y);
    cfg.validate()?;
    Ok(cfg)
}

pub fn compute(cfg: &TwoSampleSettings) -> CliResult<TwoSampleOutput> {
    let x = super::read_input(&cfg.x)?;
    let y = super::read_input(&cfg.y)?;
    if x.names.len() != y.names.len() {
        return Err(CliError::config(format!(
            "{} has {} columns but {} has {}",
            cfg.x.display(),
            x.names.len(),
            cfg.y.display(),
            y.names.len()
        )));
    }
    if let Some(j) = (0..x.names.len()).find(|&j| x.names[j] != y.names[j]) {
        return Err(CliError::config(format!(
            "column {} is named {:?} in {} but {:?} in {}",
            j + 1,
            x.names[j],
            cfg.x.display(),
            y.names[j],
            cfg.y.display()
        )));
    }
    let fit = TwoSampleFit::new(&x.data, &y.data, &cfg.core_config()?)?;
    let method = cov_method(cfg.engine, cfg.mc_reps, cfg.quad, cfg.seed);
    let mut results = Vec::with_capacity(cfg.thresholds.len());
    for &t in &cfg.thresholds {
        let r = fit.evaluate(t, method, cfg.sparsity_cutoff)?;
        results.push(ThresholdRow {
            t,
            critical: r.critical,
            mean: r.moments.mean,
            sd: r.moments.sd,
            mean_x100: x100(r.moments.mean),
            sd_x100: x100(r.moments.sd),
            moments: r.moments,
            diagnostics: r.diagnostics,
        });
    }
    Ok(TwoSampleOutput {
        x: cfg.x.clone(),
        y: cfg.y.clone(),
        p: x.names.len(),
        variables: x.names,
        n_eff: fit.n_eff(),
        method,
        results,
        fit,
    })
}

pub fn run(args: &TwoSampleArgs) -> CliResult<Execution> {
    let cfg = load(args)?;
    let inputs = vec![InputFile::hash(&cfg.x)?, InputFile::hash(&cfg.y)?];
    let report = compute(&cfg)?;
    Ok(Execution {
        command: "two-sample",
        config: to_value(&cfg)?,
        seed: cfg.seed,
        inputs,
        files: vec![("two_sample.json".into(), super::pretty(&report)?)],
    })
}
