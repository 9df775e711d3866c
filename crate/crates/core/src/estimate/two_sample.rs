use super::correlation::{pooled_covariance, ridge_correlation_grouped, RidgeConfig, RidgeFit};
use super::{estimate_mu, storey_pi0, MuEstimate, Pi0Estimate, DEFAULT_PI0_LAMBDA};
use crate::fdp_moments::{diagnostics, fdp_moments, DiagnosticsReport, FdpMoments};
use crate::numerics::t_two_sided_pvalue;
use crate::pairwise_cov::{CovMethod, PairwiseCovariances};
use crate::sim::{deflate_to_correlation, DeflationReport, FactorRule};
use crate::{Error, Result, TestingProblem, Threshold};
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TwoSampleConfig {
    /// Principal factors removed from the estimated correlation.
    pub k_deflate: usize,
    pub ridge: RidgeConfig,
    pub pi0_lambda: f64,
}

impl Default for TwoSampleConfig {
    fn default() -> Self {
        Self {
            k_deflate: 2,
            ridge: RidgeConfig::default(),
            pi0_lambda: DEFAULT_PI0_LAMBDA,
        }
    }
}

/// Everything estimated from the two samples, independent of the threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TwoSampleFit {
    pub n: usize,
    pub m: usize,
    pub tstats: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub pi0: Pi0Estimate,
    pub mu: MuEstimate,
    pub ridge: RidgeFit,
    pub deflation: DeflationReport,
    /// Factors are removed from the correlation only; the statistics are
    /// used as computed.
    pub statistics_adjusted: bool,
    #[serde(skip)]
    pub correlation: DMatrix<f64>,
}

/// Moments and diagnostics at one threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TwoSampleReport {
    pub t: f64,
    pub critical: f64,
    pub moments: FdpMoments,
    pub diagnostics: DiagnosticsReport,
}

impl TwoSampleFit {
    /// Pooled two-sample t-statistics `√(nm/(n+m))·(X̄ − Ȳ)/s_j` with
    /// p-values from `t_{n+m−2}`, Storey `π̂₀`, plug-in `μ̂`, and the ridge
    /// correlation of the pooled data with `k_deflate` factors removed.
    pub fn new(x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &TwoSampleConfig) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} columns but Y has {}",
                x.ncols(),
                y.ncols()
            )));
        }
        let (n, m, p) = (x.nrows(), y.nrows(), x.ncols());
        if n < 2 || m < 2 {
            return Err(Error::invalid("n", format!("each group needs at least 2 rows, got {n} and {m}")));
        }
        if p == 0 {
            return Err(Error::invalid("p", "no variables"));
        }
        let pooled = pooled_covariance(&[x, y])?;
        let bad: Vec<usize> = (0..p).filter(|&j| !(pooled[(j, j)] > 0.0)).collect();
        if !bad.is_empty() {
            return Err(Error::DegenerateColumns(bad));
        }
        let scale = ((n * m) as f64 / (n + m) as f64).sqrt();
        let (mx, my) = (x.row_mean(), y.row_mean());
        let tstats: Vec<f64> = (0..p).map(|j| scale * (mx[j] - my[j]) / pooled[(j, j)].sqrt()).collect();
        let df = (n + m - 2) as f64;
        let pvalues: Vec<f64> = tstats.iter().map(|&t| t_two_sided_pvalue(t, df)).collect();
        let pi0 = storey_pi0(&pvalues, cfg.pi0_lambda)?;
        let mu = estimate_mu(&tstats, &pi0);
        let ridge = ridge_correlation_grouped(&[x, y], &cfg.ridge)?;
        let (correlation, deflation) = deflate_to_correlation(&ridge.correlation, FactorRule::Fixed(cfg.k_deflate))?;
        Ok(Self {
            n,
            m,
            tstats,
            pvalues,
            pi0,
            mu,
            ridge,
            deflation,
            statistics_adjusted: false,
            correlation,
        })
    }

    /// Effective sample size: the pooled statistic has `n + m − 2` degrees
    /// of freedom, i.e. that of a one-sample test on `n + m − 1` points.
    pub fn n_eff(&self) -> usize {
        self.n + self.m - 1
    }

    pub fn threshold(&self, t: f64) -> Result<Threshold> {
        Threshold::new(t, self.n_eff())
    }

    pub fn problem(&self) -> Result<TestingProblem> {
        TestingProblem::new(self.n_eff(), self.mu.values.clone(), self.correlation.clone())
    }

    pub fn evaluate(&self, t: f64, method: CovMethod, sparsity_cutoff: f64) -> Result<TwoSampleReport> {
        let thr = self.threshold(t)?;
        let problem = self.problem()?;
        let cov = PairwiseCovariances::new(&problem, &thr, method, sparsity_cutoff)?;
        Ok(TwoSampleReport {
            t,
            critical: thr.critical(),
            moments: fdp_moments(&problem, &thr, &cov)?,
            diagnostics: diagnostics(&problem, &thr)?,
        })
    }
}

/// One-shot pipeline at a single threshold.
pub fn two_sample_pipeline(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    t: f64,
    cfg: &TwoSampleConfig,
    method: CovMethod,
) -> Result<(FdpMoments, DiagnosticsReport, MuEstimate, Pi0Estimate)> {
    let fit = TwoSampleFit::new(x, y, cfg)?;
    let report = fit.evaluate(t, method, 0.0)?;
    Ok((report.moments, report.diagnostics, fit.mu, fit.pi0))
}
