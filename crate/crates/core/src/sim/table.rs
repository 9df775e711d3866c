use super::deflate::{build_sigma, DeflationReport, FactorRule};
use super::fdp::simulate_fdp;
use super::models::{ModelKind, SimulationModel};
use crate::fdp_moments::{asymptotic_mean, fdp_moments};
use crate::numerics::QuadSpec;
use crate::pairwise_cov::{CovMethod, EngineKind, PairwiseCovariances};
use crate::rng::{self, purpose};
use crate::{Error, Result, TestingProblem, Threshold};
use nalgebra::DMatrix;
use rand::seq::index::sample;

fn default_p() -> usize {
    500
}
fn default_n() -> usize {
    200
}
fn default_p1() -> Vec<usize> {
    vec![10, 20, 50]
}
fn default_thresholds() -> Vec<f64> {
    vec![0.02, 0.05]
}
fn default_reps() -> usize {
    1000
}
fn default_mc_reps() -> usize {
    10_000
}
fn default_m() -> usize {
    400
}
fn default_signal() -> f64 {
    2.0
}
fn default_engines() -> Vec<EngineKind> {
    vec![EngineKind::MonteCarlo, EngineKind::Quadrature]
}

/// Settings for a grid of (model, p₁, t) simulation cells.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub models: Vec<ModelKind>,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p1")]
    pub p1: Vec<usize>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// Empirical replicates per cell.
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Monte Carlo replicates per pair for the MC engine.
    #[serde(default = "default_mc_reps")]
    pub mc_reps: usize,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default = "default_engines")]
    pub engines: Vec<EngineKind>,
    /// Draws used to form the sample covariance of each model.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Factors removed; automatic when absent.
    #[serde(default)]
    pub k_deflate: Option<usize>,
    #[serde(default)]
    pub sparsity_cutoff: f64,
    /// Alternatives have noncentrality `signal_multiple · |q|`.
    #[serde(default = "default_signal")]
    pub signal_multiple: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TableConfig {
    pub fn new(models: Vec<ModelKind>, seed: u64) -> Self {
        Self {
            models,
            p: default_p(),
            n: default_n(),
            p1: default_p1(),
            thresholds: default_thresholds(),
            reps: default_reps(),
            mc_reps: default_mc_reps(),
            quad: QuadSpec::default(),
            engines: default_engines(),
            m: default_m(),
            k_deflate: None,
            sparsity_cutoff: 0.0,
            signal_multiple: default_signal(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid("p", "dimension must be ≥ 1"));
        }
        if self.n < 3 {
            return Err(Error::invalid("n", format!("need n ≥ 3, got {}", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps", "need at least one replicate"));
        }
        if self.engines.contains(&EngineKind::MonteCarlo) && self.mc_reps < 100 {
            return Err(Error::invalid("mc_reps", format!("need at least 100, got {}", self.mc_reps)));
        }
        if self.m < 2 {
            return Err(Error::invalid("m", format!("need at least 2 draws, got {}", self.m)));
        }
        if let Some(&bad) = self.p1.iter().find(|&&k| k > self.p) {
            return Err(Error::invalid("p1", format!("{bad} alternatives exceed p = {}", self.p)));
        }
        if let Some(&bad) = self.thresholds.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::invalid("thresholds", format!("{bad} is not in (0, 1)")));
        }
        if !(self.sparsity_cutoff >= 0.0) {
            return Err(Error::invalid("sparsity_cutoff", "must be ≥ 0"));
        }
        if !self.signal_multiple.is_finite() {
            return Err(Error::invalid("signal_multiple", "must be finite"));
        }
        QuadSpec::new(self.quad.nodes_1d, self.quad.domain_halfwidth)?;
        Ok(())
    }
}

/// One output row. Values are raw proportions; the `*_x100` columns are the
/// same quantities scaled by 100 and rounded to two decimals for display.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TableRow {
    pub model: ModelKind,
    pub p1: usize,
    pub t: f64,
    pub empr_mean: Option<f64>,
    pub asym_mean: Option<f64>,
    pub empr_sd: Option<f64>,
    pub asym_mc_sd: Option<f64>,
    pub asym_ap_sd: Option<f64>,
    pub empr_mean_x100: Option<String>,
    pub asym_mean_x100: Option<String>,
    pub empr_sd_x100: Option<String>,
    pub asym_mc_sd_x100: Option<String>,
    pub asym_ap_sd_x100: Option<String>,
    pub p: usize,
    pub n: usize,
    pub reps: usize,
    pub mc_reps: usize,
    pub quad_nodes: usize,
    pub k_removed: Option<usize>,
    pub weak_dep_after: Option<f64>,
    pub root_seed: u64,
    pub sigma_seed: u64,
    pub alt_seed: u64,
    pub data_seed: u64,
    pub mc_seed: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ModelSigma {
    pub model: ModelKind,
    pub sigma_seed: u64,
    pub deflation: Option<DeflationReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TableArtifact {
    pub rows: Vec<TableRow>,
    pub sigmas: Vec<ModelSigma>,
}

fn x100(v: Option<f64>) -> Option<String> {
    v.map(|v| format!("{:.2}", 100.0 * v))
}

/// Noncentralities with `p1` alternatives at positions drawn from `seed`.
pub fn alternative_mu(p: usize, p1: usize, value: f64, seed: u64) -> Vec<f64> {
    let mut mu = vec![0.0; p];
    let mut r = rng::stream(seed, &[]);
    let mut idx = sample(&mut r, p, p1).into_vec();
    idx.sort_unstable();
    for j in idx {
        mu[j] = value;
    }
    mu
}

struct CellSeeds {
    alt: u64,
    data: u64,
    mc: u64,
}

fn cell_seeds(root: u64, model: ModelKind, p1: usize, t: f64) -> CellSeeds {
    let key = |what: u64| rng::derive_seed(root, &[purpose::TABLE_CELL, what, model.code(), p1 as u64, t.to_bits()]);
    CellSeeds {
        // shared by every threshold of a (model, p₁) pair
        alt: rng::derive_seed(root, &[purpose::TABLE_CELL, purpose::ALT_LOCATIONS, model.code(), p1 as u64]),
        data: key(purpose::DATA),
        mc: key(purpose::PAIR_MC),
    }
}

fn run_cell(cfg: &TableConfig, sigma: &DMatrix<f64>, p1: usize, t: f64, seeds: &CellSeeds, row: &mut TableRow) -> Result<()> {
    let thr = Threshold::new(t, cfg.n)?;
    let mu = alternative_mu(cfg.p, p1, cfg.signal_multiple * thr.critical(), seeds.alt);
    let problem = TestingProblem::new_unchecked_psd(cfg.n, mu, sigma.clone())?;
    row.asym_mean = Some(asymptotic_mean(&problem, &thr)?.mean);
    for engine in &cfg.engines {
        let method = match engine {
            EngineKind::Quadrature => CovMethod::Quadrature { spec: cfg.quad },
            EngineKind::MonteCarlo => CovMethod::MonteCarlo {
                reps: cfg.mc_reps,
                seed: seeds.mc,
            },
        };
        let cov = PairwiseCovariances::new(&problem, &thr, method, cfg.sparsity_cutoff)?;
        let sd = fdp_moments(&problem, &thr, &cov)?.sd;
        match engine {
            EngineKind::Quadrature => row.asym_ap_sd = Some(sd),
            EngineKind::MonteCarlo => row.asym_mc_sd = Some(sd),
        }
    }
    let empr = simulate_fdp(&problem, &thr, cfg.reps, seeds.data)?;
    row.empr_mean = Some(empr.mean);
    row.empr_sd = Some(empr.sd);
    Ok(())
}

/// Runs every (model, p₁, t) cell. Failures are recorded in the affected
/// rows and the run continues.
pub fn table_run(cfg: &TableConfig) -> Result<TableArtifact> {
    cfg.validate()?;
    let rule = FactorRule::from(cfg.k_deflate);
    let mut rows = Vec::new();
    let mut sigmas = Vec::new();
    for &model in &cfg.models {
        let sigma_seed = rng::derive_seed(cfg.seed, &[purpose::MODEL_LOADINGS, model.code()]);
        let built = build_sigma(&SimulationModel::new(model), cfg.p, cfg.m, rule, sigma_seed);
        let (sigma, report) = match built {
            Ok((s, r)) => (Some(s), Some(r)),
            Err(e) => {
                sigmas.push(ModelSigma {
                    model,
                    sigma_seed,
                    deflation: None,
                    error: Some(e.to_string()),
                });
                (None, None)
            }
        };
        if let Some(r) = &report {
            sigmas.push(ModelSigma {
                model,
                sigma_seed,
                deflation: Some(r.clone()),
                error: None,
            });
        }
        for &p1 in &cfg.p1 {
            for &t in &cfg.thresholds {
                let seeds = cell_seeds(cfg.seed, model, p1, t);
                let mut row = TableRow {
                    model,
                    p1,
                    t,
                    empr_mean: None,
                    asym_mean: None,
                    empr_sd: None,
                    asym_mc_sd: None,
                    asym_ap_sd: None,
                    empr_mean_x100: None,
                    asym_mean_x100: None,
                    empr_sd_x100: None,
                    asym_mc_sd_x100: None,
                    asym_ap_sd_x100: None,
                    p: cfg.p,
                    n: cfg.n,
                    reps: cfg.reps,
                    mc_reps: cfg.mc_reps,
                    quad_nodes: cfg.quad.nodes_1d,
                    k_removed: report.as_ref().map(|r| r.k_removed),
                    weak_dep_after: report.as_ref().map(|r| r.weak_dep_after),
                    root_seed: cfg.seed,
                    sigma_seed,
                    alt_seed: seeds.alt,
                    data_seed: seeds.data,
                    mc_seed: seeds.mc,
                    error: None,
                };
                match &sigma {
                    Some(s) => {
                        if let Err(e) = run_cell(cfg, s, p1, t, &seeds, &mut row) {
                            row.error = Some(e.to_string());
                        }
                    }
                    None => row.error = Some("correlation matrix could not be built".into()),
                }
                row.empr_mean_x100 = x100(row.empr_mean);
                row.asym_mean_x100 = x100(row.asym_mean);
                row.empr_sd_x100 = x100(row.empr_sd);
                row.asym_mc_sd_x100 = x100(row.asym_mc_sd);
                row.asym_ap_sd_x100 = x100(row.asym_ap_sd);
                rows.push(row);
            }
        }
    }
    Ok(TableArtifact { rows, sigmas })
}

/// Writes rows as CSV with a header row.
pub fn write_csv<W: std::io::Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(TABLE_COLUMNS).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Column order of [`write_csv`].
pub const TABLE_COLUMNS: [&str; 26] = [
    "model",
    "p1",
    "t",
    "empr_mean",
    "asym_mean",
    "empr_sd",
    "asym_mc_sd",
    "asym_ap_sd",
    "empr_mean_x100",
    "asym_mean_x100",
    "empr_sd_x100",
    "asym_mc_sd_x100",
    "asym_ap_sd_x100",
    "p",
    "n",
    "reps",
    "mc_reps",
    "quad_nodes",
    "k_removed",
    "weak_dep_after",
    "root_seed",
    "sigma_seed",
    "alt_seed",
    "data_seed",
    "mc_seed",
    "error",
];
