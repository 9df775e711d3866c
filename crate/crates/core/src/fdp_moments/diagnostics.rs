use crate::numerics::{std_normal_pdf, QuadSpec, SigmaHatLaw};
use crate::{Error, Result, TestingProblem, Threshold};
use nalgebra::DMatrix;

const ROOT_EPS: f64 = 1e-6;
const ROOT_MAX: f64 = 1e3;
const CMAX_GRID: usize = 1000;
/// Universal constant of the alternative–alternative condition.
pub const COND6_CONSTANT: f64 = 1.0;
/// Finite-p proxy for `= o(·)` in the fourth-moment condition.
pub const COND7_FACTOR: f64 = 0.01;

/// `p⁻² Σ_{j,k} |σ_jk|`, diagonal included.
pub fn weak_dependence_measure(sigma: &DMatrix<f64>) -> f64 {
    let p = sigma.nrows() as f64;
    sigma.iter().map(|v| v.abs()).sum::<f64>() / (p * p)
}

/// The boundary function `H(μ)` for one threshold.
#[derive(Debug, Clone)]
pub struct HFunction {
    law: SigmaHatLaw,
    c: f64,
}

impl HFunction {
    pub fn new(thr: &Threshold, spec: &QuadSpec) -> Result<Self> {
        Ok(Self {
            law: SigmaHatLaw::new(thr.n, spec)?,
            c: thr.critical(),
        })
    }

    pub fn eval(&self, mu: f64) -> f64 {
        let c = self.c;
        self.law.expect(|s| {
            let a = c * s + mu;
            let b = c * s - mu;
            std_normal_pdf(c * s) * s * (std_normal_pdf(a) * a + std_normal_pdf(b) * b)
        })
    }

    /// `E[φ(σ̂|q|)·σ̂|q|]`.
    pub fn density_moment(&self) -> f64 {
        let c = self.c;
        self.law.expect(|s| std_normal_pdf(c * s) * c * s)
    }

    /// Positive root of `H` by bisection, bracketing from `1e−6` and growing
    /// the upper end geometrically up to `1e3`.
    pub fn root(&self) -> Result<f64> {
        let mut lo = ROOT_EPS;
        if self.eval(lo) <= 0.0 {
            return Err(Error::numeric("mu_t_root", "H is not positive near zero"));
        }
        let mut hi = 1.0;
        while self.eval(hi) >= 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > ROOT_MAX {
                return Err(Error::numeric(
                    "mu_t_root",
                    format!("no sign change of H on (1e-6, {ROOT_MAX})"),
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let h = self.eval(mid);
            if h == 0.0 || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(mid);
            }
            if h > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Supremum of `H` over an evenly spaced open grid on `(−μ_t, μ_t)`.
    pub fn sup_below(&self, mu_t: f64) -> f64 {
        (1..=CMAX_GRID)
            .map(|i| mu_t * (-1.0 + 2.0 * i as f64 / (CMAX_GRID + 1) as f64))
            .map(|mu| self.eval(mu))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn h_function(mu: f64, thr: &Threshold) -> Result<f64> {
    Ok(HFunction::new(thr, &QuadSpec::SIGMA_HAT)?.eval(mu))
}

pub fn mu_t_root(thr: &Threshold) -> Result<f64> {
    HFunction::new(thr, &QuadSpec::SIGMA_HAT)?.root()
}

/// Numeric status of the weak-dependence conditions for one problem and
/// threshold. Raw left/right-hand sides are reported so callers can apply
/// their own cut-offs.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticsReport {
    pub weak_dep_measure: f64,
    pub mu_t: Option<f64>,
    pub c_t_max: Option<f64>,
    /// `E²[φ(σ̂|q|)·σ̂|q|]`.
    pub density_moment_sq: f64,
    pub cond5_lhs: f64,
    pub cond5_rhs: Option<f64>,
    pub cond5_ok: Option<bool>,
    pub cond6_lhs: f64,
    pub cond6_rhs: f64,
    pub cond6_ok: bool,
    pub cond7_lhs: f64,
    pub cond7_rhs: f64,
    pub cond7_ok: bool,
}

pub fn diagnostics(problem: &TestingProblem, thr: &Threshold) -> Result<DiagnosticsReport> {
    let sigma = problem.sigma();
    let p = problem.p();
    let h = HFunction::new(thr, &QuadSpec::SIGMA_HAT)?;
    let mu_t = h.root().ok();
    let c_t_max = mu_t.map(|m| h.sup_below(m));
    let density_moment_sq = h.density_moment().powi(2);

    // ordered-pair sums over j ≠ k
    let mut null_sq = 0.0;
    let mut alt_sq = 0.0;
    let mut fourth = 0.0;
    let mut weak_alt_null_sq = 0.0;
    for j in 0..p {
        for k in 0..p {
            if j == k {
                continue;
            }
            let s2 = sigma[(j, k)].powi(2);
            fourth += s2 * s2;
            match (problem.is_null(j), problem.is_null(k)) {
                (true, true) => null_sq += s2,
                (false, false) => alt_sq += s2,
                (false, true) => {
                    if let Some(m) = mu_t {
                        if problem.mu()[j].abs() <= m {
                            weak_alt_null_sq += s2;
                        }
                    }
                }
                (true, false) => {}
            }
        }
    }

    let cond5_rhs = c_t_max.map(|c| c / density_moment_sq * weak_alt_null_sq);
    let cond6_lhs = null_sq + p as f64;
    let cond6_rhs = COND6_CONSTANT * alt_sq;
    let cond7_rhs = null_sq + problem.p0() as f64;
    Ok(DiagnosticsReport {
        weak_dep_measure: weak_dependence_measure(sigma),
        mu_t,
        c_t_max,
        density_moment_sq,
        cond5_lhs: null_sq,
        cond5_rhs,
        cond5_ok: cond5_rhs.map(|r| null_sq >= r),
        cond6_lhs,
        cond6_rhs,
        cond6_ok: cond6_lhs >= cond6_rhs,
        cond7_lhs: fourth,
        cond7_rhs,
        cond7_ok: fourth <= COND7_FACTOR * cond7_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_positive_at_zero_and_even() {
        let thr = Threshold::new(0.05, 200).unwrap();
        let h = HFunction::new(&thr, &QuadSpec::SIGMA_HAT).unwrap();
        assert!(h.eval(0.0) > 0.0);
        for mu in [0.3, 1.1, 2.5, 4.0] {
            assert_eq!(h.eval(mu), h.eval(-mu));
        }
    }

    #[test]
    fn root_brackets_sign_change() {
        let thr = Threshold::new(0.02, 200).unwrap();
        let h = HFunction::new(&thr, &QuadSpec::SIGMA_HAT).unwrap();
        let root = h.root().unwrap();
        assert!(h.eval(root).abs() <= 1e-10);
        assert!(h.eval(ROOT_EPS) > 0.0);
        assert!(h.eval(root + 1.0) < 0.0);
        let refined = HFunction::new(&thr, &QuadSpec::SIGMA_HAT.refined()).unwrap().root().unwrap();
        assert!((root - refined).abs() < 1e-6);
    }

    #[test]
    fn c_max_is_at_least_h_zero() {
        let thr = Threshold::new(0.05, 200).unwrap();
        let h = HFunction::new(&thr, &QuadSpec::SIGMA_HAT).unwrap();
        let root = h.root().unwrap();
        let c = h.sup_below(root);
        // grid is symmetric with an odd midpoint count → includes μ = 0
        assert!(c >= h.eval(0.0) - 1e-15);
    }

    #[test]
    fn identity_diagnostics() {
        let p = 40;
        let mut mu = vec![0.0; p];
        mu[3] = 2.0;
        mu[7] = 4.0;
        let problem = TestingProblem::new(200, mu, DMatrix::identity(p, p)).unwrap();
        let thr = Threshold::new(0.02, 200).unwrap();
        let d = diagnostics(&problem, &thr).unwrap();
        assert!((d.weak_dep_measure - 1.0 / p as f64).abs() < 1e-15);
        assert_eq!(d.cond5_ok, Some(true));
        assert!(d.cond6_ok);
        assert!(d.cond7_ok);
        assert_eq!(d.cond7_lhs, 0.0);
    }

    #[test]
    fn equal_correlation_measure() {
        let p = 100;
        let sigma = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.5 });
        assert!((weak_dependence_measure(&sigma) - 0.505).abs() < 1e-12);
    }
}
