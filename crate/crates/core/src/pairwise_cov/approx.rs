use super::conditional::Acceptance;
use super::{CovEstimate, EngineKind, PairSpec};
use crate::numerics::{gauss_nodes, BvnExcess, QuadSpec};
use crate::{Error, Result, Threshold};
use std::cmp::Ordering;

const MIN_VARIANCE: f64 = 1e-6;
const MAX_DROPPED: f64 = 0.5;

/// Tensor Gauss–Hermite rule for `(σ̂_j², σ̂_k²) ~ N((1, 1), a²·[[1, ρ²], [ρ², 1]])`
/// with `a² = 2/(n−1)`, parameterised as
/// `v₁ = 1 + a·x₁`, `v₂ = 1 + a·(ρ²x₁ + √(1−ρ⁴)·x₂)`.
#[derive(Debug, Clone)]
pub(crate) struct CltGrid {
    nodes: Vec<(f64, f64)>,
    a: f64,
}

impl CltGrid {
    pub(crate) fn new(n: usize, spec: &QuadSpec) -> Result<Self> {
        let spec = QuadSpec::new(spec.nodes_1d, spec.domain_halfwidth)?;
        if n < 3 {
            return Err(Error::invalid("n", format!("need n ≥ 3, got {n}")));
        }
        Ok(Self {
            nodes: gauss_nodes(&spec),
            a: (2.0 / (n - 1) as f64).sqrt(),
        })
    }

    /// Acceptance intervals of the first variable at each first-axis node;
    /// `None` where the variance node is not positive.
    pub(crate) fn first_axis(&self, mu: f64, critical: f64) -> Vec<Option<Acceptance>> {
        self.nodes
            .iter()
            .map(|&(x, _)| {
                let v = 1.0 + self.a * x;
                (v > MIN_VARIANCE).then(|| Acceptance::new(mu, v.sqrt(), critical))
            })
            .collect()
    }

    /// Integrates the conditional covariance against the CLT law, with the
    /// first variable's intervals precomputed.
    pub(crate) fn integrate(
        &self,
        first: &[Option<Acceptance>],
        mu_second: f64,
        rho: f64,
        critical: f64,
    ) -> Result<f64> {
        if rho == 0.0 {
            return Ok(0.0);
        }
        let r2 = rho * rho;
        let s = (1.0 - r2 * r2).max(0.0).sqrt();
        let ex = BvnExcess::new(rho);
        let mut acc = 0.0;
        let mut kept = 0.0;
        let mut dropped = 0.0;
        for (&(x1, w1), a) in self.nodes.iter().zip(first) {
            for &(x2, w2) in &self.nodes {
                let w = w1 * w2;
                let v2 = 1.0 + self.a * (r2 * x1 + s * x2);
                match a {
                    Some(a) if v2 > MIN_VARIANCE => {
                        let b = Acceptance::new(mu_second, v2.sqrt(), critical);
                        acc += w * a.cov_with(&b, &ex);
                        kept += w;
                    }
                    _ => dropped += w,
                }
            }
        }
        if dropped > MAX_DROPPED * (kept + dropped) {
            return Err(Error::numeric(
                "approx_cov",
                format!("{:.1}% of the variance-law mass lies at non-positive variances", 100.0 * dropped / (kept + dropped)),
            ));
        }
        Ok(acc / kept)
    }
}

/// Ordering key of a variable in a pair: `|μ|`, then `μ`.
pub(crate) fn order_key(a: f64, b: f64) -> Ordering {
    a.abs().total_cmp(&b.abs()).then(a.total_cmp(&b))
}

/// Orders a pair so the first variable has the smaller key, making the
/// result independent of the order the pair is given in and of a common
/// sign flip of both noncentralities.
pub(crate) fn canonical(pair: &PairSpec) -> PairSpec {
    if order_key(pair.mu_k, pair.mu_j) == Ordering::Less {
        pair.swapped()
    } else {
        *pair
    }
}

/// Quadrature approximation of `Cov(t_j, t_k)`.
pub fn approx_cov(pair: &PairSpec, thr: &Threshold, spec: &QuadSpec) -> Result<CovEstimate> {
    let pair = PairSpec::new(pair.mu_j, pair.mu_k, pair.rho, pair.n)?;
    let grid = CltGrid::new(pair.n, spec)?;
    let value = if pair.rho == 0.0 {
        0.0
    } else {
        let pair = canonical(&pair);
        let c = thr.critical();
        grid.integrate(&grid.first_axis(pair.mu_j, c), pair.mu_k, pair.rho, c)?
    };
    Ok(CovEstimate {
        value,
        std_error: None,
        method: EngineKind::Quadrature,
        reps_or_nodes: spec.nodes_1d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{std_normal_pdf, SigmaHatLaw};

    fn cov(mu_j: f64, mu_k: f64, rho: f64, thr: &Threshold) -> f64 {
        let pair = PairSpec::new(mu_j, mu_k, rho, thr.n).unwrap();
        approx_cov(&pair, thr, &QuadSpec::default()).unwrap().value
    }

    #[test]
    fn zero_correlation_is_exactly_zero() {
        let thr = Threshold::new(0.02, 200).unwrap();
        assert_eq!(cov(0.0, 4.7, 0.0, &thr), 0.0);
    }

    #[test]
    fn swap_is_bit_exact() {
        let thr = Threshold::new(0.05, 200).unwrap();
        for &(a, b, r) in &[(0.0, 4.0, 0.5), (-1.0, 2.0, -0.8), (3.0, 3.0, 0.2), (0.0, -0.0, 0.9)] {
            assert_eq!(cov(a, b, r, &thr), cov(b, a, r, &thr));
        }
    }

    #[test]
    fn sign_symmetries() {
        let thr = Threshold::new(0.02, 200).unwrap();
        let q2 = 2.0 * thr.critical();
        for &(a, b) in &[(0.0, 0.0), (0.0, q2), (q2, q2), (1.0, -2.0)] {
            for &r in &[-0.8, -0.2, 0.5] {
                let base = cov(a, b, r, &thr);
                assert_eq!(base, cov(-a, -b, r, &thr));
                assert!((base - cov(-a, b, -r, &thr)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn negative_rho_equals_reflected_second_mean() {
        let thr = Threshold::new(0.02, 200).unwrap();
        let q2 = 2.0 * thr.critical();
        assert!((cov(0.0, q2, -0.5, &thr) - cov(0.0, -q2, 0.5, &thr)).abs() < 1e-10);
    }

    #[test]
    fn refinement_is_stable() {
        for t in [0.02, 0.05] {
            let thr = Threshold::new(t, 200).unwrap();
            let q2 = 2.0 * thr.critical();
            for &(a, b) in &[(0.0, 0.0), (0.0, q2), (q2, q2)] {
                for &r in &[-0.8, -0.5, -0.2, 0.2, 0.5, 0.8] {
                    let pair = PairSpec::new(a, b, r, 200).unwrap();
                    let base = approx_cov(&pair, &thr, &QuadSpec::default()).unwrap().value;
                    let fine = approx_cov(&pair, &thr, &QuadSpec::default().refined()).unwrap().value;
                    assert!((base - fine).abs() < 1e-5, "{a} {b} {r}: {base} vs {fine}");
                }
            }
        }
    }

    #[test]
    fn small_rho_null_pair_expansion() {
        // ratio approaches 2(E[φ(qσ̂)qσ̂])² as ρ → 0
        let thr = Threshold::new(0.2, 200).unwrap();
        let law = SigmaHatLaw::new(200, &QuadSpec::SIGMA_HAT).unwrap();
        let q = thr.q;
        let g = law.expect(|s| std_normal_pdf(q * s) * q * s);
        let limit = 2.0 * g * g;
        let ratio = cov(0.0, 0.0, 0.005, &thr) / (0.005 * 0.005);
        assert!(((ratio - limit) / limit).abs() < 2e-3, "{ratio} vs {limit}");
    }

    #[test]
    fn too_small_samples_are_rejected() {
        let thr = Threshold::new(0.05, 3).unwrap();
        let pair = PairSpec::new(0.0, 0.0, 0.5, 3).unwrap();
        // a = 1: a large share of the Gaussian mass sits below zero variance,
        // but not more than half
        assert!(approx_cov(&pair, &thr, &QuadSpec::default()).is_ok());
        assert!(PairSpec::new(0.0, 0.0, 0.5, 2).is_err());
        assert!(approx_cov(&pair, &thr, &QuadSpec { nodes_1d: 1, domain_halfwidth: 8.0 }).is_err());
    }
}
