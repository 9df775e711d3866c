use super::PairSpec;
use crate::numerics::{std_normal_cdf, BvnExcess};
use crate::{Error, Result, Threshold};

/// Acceptance interval of one standardized statistic given `σ̂`:
/// the test accepts when `Z ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Acceptance {
    lo: f64,
    hi: f64,
    phi_lo: f64,
    phi_hi: f64,
}

impl Acceptance {
    pub(crate) fn new(mu: f64, sigma_hat: f64, critical: f64) -> Self {
        let half = sigma_hat * critical;
        let lo = -half - mu;
        let hi = half - mu;
        Self {
            lo,
            hi,
            phi_lo: std_normal_cdf(lo),
            phi_hi: std_normal_cdf(hi),
        }
    }

    /// Conditional covariance of the rejection indicators, which equals that
    /// of the acceptance indicators.
    pub(crate) fn cov_with(&self, other: &Acceptance, ex: &BvnExcess) -> f64 {
        let e = |x: f64, px: f64, y: f64, py: f64| ex.eval(x, y, px, py);
        // grouped so that reflecting both intervals only reorders operands
        let same = e(self.hi, self.phi_hi, other.hi, other.phi_hi) + e(self.lo, self.phi_lo, other.lo, other.phi_lo);
        let cross = e(self.hi, self.phi_hi, other.lo, other.phi_lo) + e(self.lo, self.phi_lo, other.hi, other.phi_hi);
        same - cross
    }
}

/// `Cov(t_j, t_k | σ̂_j, σ̂_k)`.
pub fn conditional_cov(pair: &PairSpec, sh_j: f64, sh_k: f64, thr: &Threshold) -> Result<f64> {
    if !(sh_j > 0.0 && sh_k > 0.0) || !sh_j.is_finite() || !sh_k.is_finite() {
        return Err(Error::invalid(
            "sigma_hat",
            format!("sample standard deviations must be positive, got ({sh_j}, {sh_k})"),
        ));
    }
    let c = thr.critical();
    let a = Acceptance::new(pair.mu_j, sh_j, c);
    let b = Acceptance::new(pair.mu_k, sh_k, c);
    Ok(a.cov_with(&b, &BvnExcess::new(pair.rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn zero_correlation_is_zero() {
        let thr = Threshold::new(0.05, 200).unwrap();
        let pair = PairSpec::new(0.3, -2.0, 0.0, 200).unwrap();
        assert_eq!(conditional_cov(&pair, 0.9, 1.2, &thr).unwrap(), 0.0);
    }

    #[test]
    fn perfect_correlation_gives_bernoulli_variance() {
        let thr = Threshold::new(0.05, 200).unwrap();
        let pair = PairSpec::new(0.0, 0.0, 1.0, 200).unwrap();
        let sh = 1.05;
        let m = 2.0 * std_normal_cdf(-sh * thr.critical());
        let got = conditional_cov(&pair, sh, sh, &thr).unwrap();
        assert!((got - m * (1.0 - m)).abs() < 1e-12, "{got} vs {}", m * (1.0 - m));
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        let thr = Threshold::new(0.05, 200).unwrap();
        let pair = PairSpec::new(0.0, 0.0, 0.5, 200).unwrap();
        assert!(conditional_cov(&pair, 0.0, 1.0, &thr).is_err());
        assert!(conditional_cov(&pair, 1.0, -1.0, &thr).is_err());
    }

    #[test]
    fn matches_bivariate_normal_monte_carlo() {
        let thr = Threshold::new(0.05, 200).unwrap();
        let pair = PairSpec::new(0.0, 3.0, 0.5, 200).unwrap();
        let (sj, sk) = (0.9, 1.1);
        let got = conditional_cov(&pair, sj, sk, &thr).unwrap();

        let c = thr.critical();
        let reps = 10_000_000u64;
        let s = (1.0f64 - 0.25).sqrt();
        let mut rng = rng::stream(11, &[99]);
        let (mut na, mut nb, mut nab) = (0u64, 0u64, 0u64);
        for _ in 0..reps {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let zj = z1;
            let zk = 0.5 * z1 + s * z2;
            let a = (zj + pair.mu_j).abs() > sj * c;
            let b = (zk + pair.mu_k).abs() > sk * c;
            na += a as u64;
            nb += b as u64;
            nab += (a && b) as u64;
        }
        let r = reps as f64;
        let (pa, pb) = (na as f64 / r, nb as f64 / r);
        let cov = nab as f64 / r - pa * pb;
        // influence-function SE from the four cell counts
        let cells = [
            (nab, (1.0 - pa) * (1.0 - pb)),
            (na - nab, (1.0 - pa) * -pb),
            (nb - nab, -pa * (1.0 - pb)),
            (reps + nab - na - nb, pa * pb),
        ];
        let var: f64 = cells.iter().map(|&(m, psi)| m as f64 * (psi - cov).powi(2)).sum::<f64>() / (r - 1.0);
        let se = (var / r).sqrt();
        assert!((got - cov).abs() <= 3.0 * se, "{got} vs {cov} ± {se}");
    }
}
