use super::approx::{order_key, CltGrid};
use super::conditional::Acceptance;
use super::mc::mc_cov_keyed;
use super::{CovEstimate, CovMethod, PairSpec};
use crate::fdp_moments::CovProvider;
use crate::{Error, Result, TestingProblem, Threshold};
use rayon::prelude::*;
use std::cmp::Ordering;

#[derive(Debug)]
struct QuadCache {
    grid: CltGrid,
    first: Vec<Vec<Option<Acceptance>>>,
    nodes_1d: usize,
}

/// Pair covariance provider for every pair of a [`TestingProblem`].
///
/// For the quadrature engine the acceptance intervals of each variable at
/// each first-axis node are computed once up front; the cache is read-only
/// afterwards. Pairs with `|σ_jk| ≤ sparsity_cutoff` are exactly zero.
#[derive(Debug)]
pub struct PairwiseCovariances<'a> {
    problem: &'a TestingProblem,
    thr: Threshold,
    method: CovMethod,
    cutoff: f64,
    quad: Option<QuadCache>,
}

impl<'a> PairwiseCovariances<'a> {
    pub fn new(problem: &'a TestingProblem, thr: &Threshold, method: CovMethod, sparsity_cutoff: f64) -> Result<Self> {
        if !(sparsity_cutoff >= 0.0) {
            return Err(Error::invalid("sparsity_cutoff", format!("must be ≥ 0, got {sparsity_cutoff}")));
        }
        if thr.n != problem.n() {
            return Err(Error::invalid(
                "n",
                format!("problem has n = {} but threshold has n = {}", problem.n(), thr.n),
            ));
        }
        let quad = match method {
            CovMethod::Quadrature { spec } => {
                let grid = CltGrid::new(problem.n(), &spec)?;
                let c = thr.critical();
                let first = problem.mu().par_iter().map(|&m| grid.first_axis(m, c)).collect();
                Some(QuadCache {
                    grid,
                    first,
                    nodes_1d: spec.nodes_1d,
                })
            }
            CovMethod::MonteCarlo { reps, .. } => {
                if reps < 100 {
                    return Err(Error::invalid("reps", format!("need at least 100 replicates, got {reps}")));
                }
                None
            }
        };
        Ok(Self {
            problem,
            thr: *thr,
            method,
            cutoff: sparsity_cutoff,
            quad,
        })
    }

    pub fn method(&self) -> &CovMethod {
        &self.method
    }

    /// Full estimate for pair `(j, k)`, `j ≠ k`.
    pub fn estimate(&self, j: usize, k: usize) -> Result<CovEstimate> {
        let p = self.problem.p();
        if j == k || j >= p || k >= p {
            return Err(Error::invalid("pair", format!("({j}, {k}) is not a pair of distinct tests among {p}")));
        }
        let (j, k) = (j.min(k), j.max(k));
        self.estimate_ordered(j, k).map_err(|e| Error::Pair {
            j,
            k,
            source: Box::new(e),
        })
    }

    fn estimate_ordered(&self, j: usize, k: usize) -> Result<CovEstimate> {
        let rho = self.problem.sigma()[(j, k)];
        let mu = self.problem.mu();
        match (&self.method, &self.quad) {
            (CovMethod::Quadrature { .. }, Some(cache)) => {
                let est = CovEstimate {
                    value: 0.0,
                    std_error: None,
                    method: super::EngineKind::Quadrature,
                    reps_or_nodes: cache.nodes_1d,
                };
                if rho.abs() <= self.cutoff {
                    return Ok(est);
                }
                let (first, second) = if order_key(mu[k], mu[j]) == Ordering::Less { (k, j) } else { (j, k) };
                let value = cache
                    .grid
                    .integrate(&cache.first[first], mu[second], rho, self.thr.critical())?;
                Ok(CovEstimate { value, ..est })
            }
            (&CovMethod::MonteCarlo { reps, seed }, _) => {
                if rho.abs() <= self.cutoff {
                    return Ok(CovEstimate {
                        value: 0.0,
                        std_error: Some(0.0),
                        method: super::EngineKind::MonteCarlo,
                        reps_or_nodes: reps,
                    });
                }
                let pair = PairSpec::new(mu[j], mu[k], rho, self.problem.n())?;
                let id = (j * self.problem.p() + k) as u64;
                mc_cov_keyed(&pair, &self.thr, reps, seed, id)
            }
            _ => unreachable!("quadrature cache is built with the provider"),
        }
    }
}

impl CovProvider for PairwiseCovariances<'_> {
    fn cov(&self, j: usize, k: usize) -> Result<f64> {
        self.estimate(j, k).map(|e| e.value)
    }
}
