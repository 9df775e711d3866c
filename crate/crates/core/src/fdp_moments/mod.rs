//! Asymptotic mean and variance of the FDP, and the weak-dependence
//! diagnostics that qualify them.
//!
//! With `ξ_j = P(|T_j| > |q|)` the marginal rejection probability, the FDP
//! converges to `p₀t / (p₀t + Σ_{H₁} ξ_j)`. Its asymptotic variance splits
//! into `V1`, the variance an independent family would have, and `V2`, a
//! weighted sum of pairwise indicator covariances over null–null,
//! null–alternative and alternative–alternative pairs.

mod diagnostics;

pub use diagnostics::{
    diagnostics, h_function, mu_t_root, weak_dependence_measure, DiagnosticsReport, HFunction,
};

use crate::numerics::{std_normal_cdf, QuadSpec, SigmaHatLaw};
use crate::{Error, Result, TestingProblem, Threshold};
use rayon::prelude::*;

/// Source of `Cov(t_j, t_k)` for `j ≠ k`.
///
/// Implementations must be safe to query concurrently for disjoint pairs.
pub trait CovProvider: Sync {
    fn cov(&self, j: usize, k: usize) -> Result<f64>;
}

impl<F> CovProvider for F
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    fn cov(&self, j: usize, k: usize) -> Result<f64> {
        self(j, k)
    }
}

/// Marginal rejection probabilities `ξ(μ)` for one threshold.
#[derive(Debug, Clone)]
pub struct XiEvaluator {
    law: SigmaHatLaw,
    q: f64,
}

impl XiEvaluator {
    pub fn new(thr: &Threshold) -> Result<Self> {
        Ok(Self {
            law: SigmaHatLaw::new(thr.n, &QuadSpec::SIGMA_HAT)?,
            q: thr.q,
        })
    }

    /// `E[Φ(qσ̂ + μ) + Φ(qσ̂ − μ)]`.
    pub fn xi(&self, mu: f64) -> f64 {
        let q = self.q;
        self.law
            .expect(|s| std_normal_cdf(q * s + mu) + std_normal_cdf(q * s - mu))
    }
}

/// Marginal rejection probability of a test with noncentrality `mu`.
pub fn xi(mu: f64, thr: &Threshold) -> Result<f64> {
    Ok(XiEvaluator::new(thr)?.xi(mu))
}

/// The asymptotic FDP limit together with the alternative rejection rates.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AsymptoticMean {
    pub mean: f64,
    /// `ξ̄`, absent when there are no alternatives.
    pub xi_bar: Option<f64>,
    pub p0: usize,
    pub p1: usize,
}

pub fn asymptotic_mean(problem: &TestingProblem, thr: &Threshold) -> Result<AsymptoticMean> {
    let eval = XiEvaluator::new(thr)?;
    let p0 = problem.p0();
    let p1 = problem.p1();
    let alt_sum: f64 = problem
        .mu()
        .iter()
        .filter(|&&m| m != 0.0)
        .map(|&m| eval.xi(m))
        .sum();
    let null_mass = p0 as f64 * thr.t;
    let mean = if p1 == 0 {
        1.0
    } else {
        null_mass / (null_mass + alt_sum)
    };
    Ok(AsymptoticMean {
        mean,
        xi_bar: (p1 > 0).then(|| alt_sum / p1 as f64),
        p0,
        p1,
    })
}

fn denominator(p0: usize, p1: usize, t: f64, xi_bar: Option<f64>) -> Result<f64> {
    let d = p0 as f64 * t + p1 as f64 * xi_bar.unwrap_or(0.0);
    if d <= 0.0 {
        return Err(Error::numeric("v1", "p₀t + p₁ξ̄ is zero"));
    }
    Ok(d)
}

/// Variance of the FDP under independence.
pub fn v1(p0: usize, p1: usize, t: f64, xi_bar: Option<f64>) -> Result<f64> {
    if let Some(x) = xi_bar {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid("xi_bar", format!("must lie in [0, 1], got {x}")));
        }
    }
    let d = denominator(p0, p1, t, xi_bar)?;
    let (p0, p1) = (p0 as f64, p1 as f64);
    let xb = xi_bar.unwrap_or(0.0);
    let num = (p1 * xb).powi(2) * p0 * t * (1.0 - t) + (p0 * t).powi(2) * p1 * xb * (1.0 - xb);
    Ok(num / d.powi(4))
}

/// Sums of pairwise indicator covariances by hypothesis class, over `j < k`.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct PairSums {
    pub null_null: f64,
    pub null_alt: f64,
    pub alt_alt: f64,
}

/// Sweep all pairs `j < k` in parallel by row; row partials are combined in
/// row order so the result is identical for any worker count.
pub fn pair_sums(problem: &TestingProblem, cov: &dyn CovProvider) -> Result<PairSums> {
    let p = problem.p();
    let rows: Vec<Result<[f64; 3]>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let mut acc = [0.0; 3];
            let j_null = problem.is_null(j);
            for k in j + 1..p {
                let c = cov.cov(j, k).map_err(|e| match e {
                    e @ Error::Pair { .. } => e,
                    e => Error::Pair {
                        j,
                        k,
                        source: Box::new(e),
                    },
                })?;
                let slot = match (j_null, problem.is_null(k)) {
                    (true, true) => 0,
                    (false, false) => 2,
                    _ => 1,
                };
                acc[slot] += c;
            }
            Ok(acc)
        })
        .collect();
    let mut sums = PairSums::default();
    for row in rows {
        let [a, b, c] = row?;
        sums.null_null += a;
        sums.null_alt += b;
        sums.alt_alt += c;
    }
    Ok(sums)
}

/// Dependence-induced variance from precomputed pair sums.
pub fn v2_from_sums(p0: usize, p1: usize, t: f64, xi_bar: Option<f64>, sums: &PairSums) -> Result<f64> {
    let d4 = denominator(p0, p1, t, xi_bar)?.powi(4);
    let (p0, p1) = (p0 as f64, p1 as f64);
    // p₁ξ̄ = 0 when there are no alternatives
    let alt_mass = p1 * xi_bar.unwrap_or(0.0);
    let null_mass = p0 * t;
    Ok((2.0 * alt_mass * alt_mass * sums.null_null - 2.0 * null_mass * alt_mass * sums.null_alt
        + 2.0 * null_mass * null_mass * sums.alt_alt)
        / d4)
}

/// Variance of the FDP contributed by dependence between tests.
pub fn v2(problem: &TestingProblem, thr: &Threshold, cov: &dyn CovProvider) -> Result<f64> {
    let m = asymptotic_mean(problem, thr)?;
    let sums = pair_sums(problem, cov)?;
    v2_from_sums(m.p0, m.p1, thr.t, m.xi_bar, &sums)
}

/// Asymptotic mean and variance decomposition of the FDP.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FdpMoments {
    pub mean: f64,
    pub xi_bar: Option<f64>,
    pub v1: f64,
    pub v2: f64,
    /// `max(v1 + v2, 0)`.
    pub variance: f64,
    pub sd: f64,
    /// Set when `v1 + v2 < −1e−12` and the variance was clamped to zero.
    pub variance_clamped: bool,
    pub pair_sums: PairSums,
}

pub fn fdp_moments(problem: &TestingProblem, thr: &Threshold, cov: &dyn CovProvider) -> Result<FdpMoments> {
    let m = asymptotic_mean(problem, thr)?;
    let v1 = v1(m.p0, m.p1, thr.t, m.xi_bar)?;
    let sums = pair_sums(problem, cov)?;
    let v2 = v2_from_sums(m.p0, m.p1, thr.t, m.xi_bar, &sums)?;
    let raw = v1 + v2;
    let variance = raw.max(0.0);
    Ok(FdpMoments {
        mean: m.mean,
        xi_bar: m.xi_bar,
        v1,
        v2,
        variance,
        sd: variance.sqrt(),
        variance_clamped: raw < -1e-12,
        pair_sums: sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn zero_cov(_: usize, _: usize) -> Result<f64> {
        Ok(0.0)
    }

    #[test]
    fn xi_null_equals_level_on_grid() {
        for n in [10, 50, 200] {
            for t in [0.005, 0.02, 0.05, 0.2] {
                let thr = Threshold::new(t, n).unwrap();
                let v = xi(0.0, &thr).unwrap();
                assert!((v - t).abs() < 1e-6, "n={n} t={t}: {v}");
            }
        }
    }

    #[test]
    fn xi_limits_and_shape() {
        let thr = Threshold::new(0.02, 200).unwrap();
        let eval = XiEvaluator::new(&thr).unwrap();
        assert!((eval.xi(1e6) - 1.0).abs() < 1e-12);
        let mut prev = eval.xi(0.0);
        for i in 1..60 {
            let mu = i as f64 * 0.1;
            let v = eval.xi(mu);
            assert_eq!(v, eval.xi(-mu));
            assert!(v > prev, "not increasing at {mu}");
            assert!(v > 0.0 && v < 1.0);
            prev = v;
        }
    }

    #[test]
    fn mean_edge_cases() {
        let thr = Threshold::new(0.05, 50).unwrap();
        let null_only = TestingProblem::new(50, vec![0.0; 4], DMatrix::identity(4, 4)).unwrap();
        let m = asymptotic_mean(&null_only, &thr).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.xi_bar, None);

        let huge = TestingProblem::new(50, vec![0.0, 0.0, 0.0, 1e6, -1e6], DMatrix::identity(5, 5)).unwrap();
        let m = asymptotic_mean(&huge, &thr).unwrap();
        let expect = 3.0 * 0.05 / (3.0 * 0.05 + 2.0);
        assert!((m.mean - expect).abs() < 1e-12);
    }

    #[test]
    fn mean_decreases_with_signal() {
        let thr = Threshold::new(0.02, 200).unwrap();
        let mut prev = 1.0;
        for i in 1..20 {
            let mu = i as f64 * 0.3;
            let problem = TestingProblem::new(200, vec![0.0, 0.0, 0.0, mu, -mu], DMatrix::identity(5, 5)).unwrap();
            let m = asymptotic_mean(&problem, &thr).unwrap().mean;
            assert!(m > 0.0 && m <= 1.0 && m < prev);
            prev = m;
        }
    }

    #[test]
    fn v1_edge_cases_and_arithmetic() {
        assert_eq!(v1(10, 0, 0.05, None).unwrap(), 0.0);
        assert_eq!(v1(10, 5, 1.0, Some(1.0)).unwrap(), 0.0);
        assert!(v1(0, 5, 0.05, Some(0.0)).is_err());
        assert!(v1(3, 5, 0.05, Some(1.5)).is_err());

        // independent re-derivation: Var of V/E R − E V R/(E R)² under independence
        let (p0, p1, t, xb) = (490.0f64, 10.0f64, 0.02f64, 0.94f64);
        let er = p0 * t + p1 * xb;
        let ev = p0 * t;
        let (a, b) = (1.0 / er - ev / (er * er), -ev / (er * er));
        // coefficients on V and S; Var V = p0 t(1−t), Var S = p1 ξ(1−ξ)
        let oracle = a * a * p0 * t * (1.0 - t) + b * b * p1 * xb * (1.0 - xb);
        let got = v1(490, 10, 0.02, Some(0.94)).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn v2_is_zero_without_dependence() {
        let thr = Threshold::new(0.05, 30).unwrap();
        let problem = TestingProblem::new(30, vec![0.0, 0.0, 2.0, 3.0], DMatrix::identity(4, 4)).unwrap();
        assert_eq!(v2(&problem, &thr, &zero_cov).unwrap(), 0.0);
        let mom = fdp_moments(&problem, &thr, &zero_cov).unwrap();
        assert_eq!(mom.sd, mom.v1.sqrt());
        assert_eq!(mom.v2, 0.0);
    }

    #[test]
    fn v2_without_alternatives_vanishes() {
        let thr = Threshold::new(0.05, 30).unwrap();
        let problem = TestingProblem::new(30, vec![0.0; 3], DMatrix::identity(3, 3)).unwrap();
        let v = v2(&problem, &thr, &|_: usize, _: usize| Ok(0.01)).unwrap();
        assert_eq!(v, 0.0);
        let single = TestingProblem::new(30, vec![0.0], DMatrix::identity(1, 1)).unwrap();
        let m = fdp_moments(&single, &thr, &zero_cov).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.variance, m.v1);
    }

    #[test]
    fn v2_weights_each_pair_class() {
        let thr = Threshold::new(0.05, 30).unwrap();
        let problem = TestingProblem::new(30, vec![0.0, 0.0, 2.5, 3.0], DMatrix::identity(4, 4)).unwrap();
        let m = asymptotic_mean(&problem, &thr).unwrap();
        let xb = m.xi_bar.unwrap();
        let cov = |j: usize, k: usize| Ok(0.001 * (j + 2 * k) as f64);
        // pairs: (0,1) nn; (0,2),(0,3),(1,2),(1,3) na; (2,3) aa
        let nn = 0.001 * 2.0;
        let na = 0.001 * (4.0 + 6.0 + 5.0 + 7.0);
        let aa = 0.001 * 8.0;
        let (p0, p1, t) = (2.0, 2.0, 0.05);
        let d = p0 * t + p1 * xb;
        let oracle = (2.0 * (p1 * xb).powi(2) * nn - 2.0 * p0 * p1 * t * xb * na + 2.0 * (p0 * t).powi(2) * aa) / d.powi(4);
        let got = v2(&problem, &thr, &cov).unwrap();
        assert!((got - oracle).abs() < 1e-15);
    }

    #[test]
    fn clamps_negative_variance() {
        let thr = Threshold::new(0.05, 30).unwrap();
        let problem = TestingProblem::new(30, vec![0.0, 0.0, 2.0], DMatrix::identity(3, 3)).unwrap();
        let m = fdp_moments(&problem, &thr, &|_: usize, _: usize| Ok(-0.2)).unwrap();
        assert!(m.v1 + m.v2 < 0.0);
        assert!(m.variance_clamped);
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.sd, 0.0);
    }

    #[test]
    fn provider_errors_carry_pair_identity() {
        let thr = Threshold::new(0.05, 30).unwrap();
        let problem = TestingProblem::new(30, vec![0.0; 3], DMatrix::identity(3, 3)).unwrap();
        let failing = |j: usize, k: usize| {
            if (j, k) == (1, 2) {
                Err(Error::numeric("test", "boom"))
            } else {
                Ok(0.0)
            }
        };
        match fdp_moments(&problem, &thr, &failing) {
            Err(Error::Pair { j: 1, k: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
