//! Covariance of the rejection indicators of two dependent t-tests.
//!
//! Given the sample standard deviations, `(T_j, T_k)` is bivariate normal, so
//! the conditional indicator covariance is a sum of four orthant
//! probabilities ([`conditional_cov`]). Two engines integrate it over the law
//! of the variances: [`mc_cov`] samples the exact law, [`approx_cov`] uses
//! tensor Gauss–Hermite quadrature over the bivariate-normal CLT law of
//! `(σ̂_j², σ̂_k²)`.

mod approx;
mod conditional;
mod matrix;
mod mc;

pub use approx::approx_cov;
pub use conditional::conditional_cov;
pub use matrix::PairwiseCovariances;
pub use mc::{mc_cov, mc_var, MC_BLOCK};

use crate::numerics::QuadSpec;
use crate::{Error, Result};

/// Inputs for one pair of tests.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PairSpec {
    pub mu_j: f64,
    pub mu_k: f64,
    pub rho: f64,
    pub n: usize,
}

impl PairSpec {
    pub fn new(mu_j: f64, mu_k: f64, rho: f64, n: usize) -> Result<Self> {
        if !mu_j.is_finite() || !mu_k.is_finite() {
            return Err(Error::invalid("mu", "noncentralities must be finite"));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::invalid("rho", format!("|rho| must be ≤ 1, got {rho}")));
        }
        if n < 3 {
            return Err(Error::invalid("n", format!("pair engines need n ≥ 3, got {n}")));
        }
        Ok(Self { mu_j, mu_k, rho, n })
    }

    /// The CLT law of the variances is unreliable for small samples.
    pub fn small_sample(&self) -> bool {
        self.n < 30
    }

    pub fn swapped(&self) -> Self {
        Self {
            mu_j: self.mu_k,
            mu_k: self.mu_j,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[serde(alias = "mc")]
    MonteCarlo,
    #[serde(alias = "approx")]
    Quadrature,
}

/// How pair covariances are computed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum CovMethod {
    MonteCarlo { reps: usize, seed: u64 },
    Quadrature { spec: QuadSpec },
}

impl CovMethod {
    pub fn kind(&self) -> EngineKind {
        match self {
            CovMethod::MonteCarlo { .. } => EngineKind::MonteCarlo,
            CovMethod::Quadrature { .. } => EngineKind::Quadrature,
        }
    }
}

impl Default for CovMethod {
    fn default() -> Self {
        CovMethod::Quadrature {
            spec: QuadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CovEstimate {
    pub value: f64,
    /// Present for Monte Carlo estimates only.
    pub std_error: Option<f64>,
    pub method: EngineKind,
    /// Replicates (Monte Carlo) or nodes per axis (quadrature).
    pub reps_or_nodes: usize,
}
