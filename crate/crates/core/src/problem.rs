use crate::numerics::t_quantile;
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Rejection threshold `t` for two-sided t-tests on `n` observations.
///
/// `q` is the `t/2` quantile of `t_{n−1}` (negative); test `j` rejects when
/// `|T_j| > |q|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Threshold {
    pub t: f64,
    pub n: usize,
    pub q: f64,
}

impl Threshold {
    pub fn new(t: f64, n: usize) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::invalid("t", format!("threshold must lie in (0, 1), got {t}")));
        }
        if n < 2 {
            return Err(Error::invalid("n", format!("sample size must be ≥ 2, got {n}")));
        }
        let q = t_quantile(0.5 * t, n - 1)?;
        Ok(Self { t, n, q })
    }

    pub fn df(&self) -> usize {
        self.n - 1
    }

    /// `|q|`, the critical value of `|T|`.
    pub fn critical(&self) -> f64 {
        -self.q
    }
}

/// A multiple-testing instance: noncentralities `mu` on the test-statistic
/// scale and the unit-diagonal correlation `sigma` of the observations.
#[derive(Debug, Clone)]
pub struct TestingProblem {
    n: usize,
    mu: Vec<f64>,
    sigma: DMatrix<f64>,
}

const DIAG_TOL: f64 = 1e-10;
const SYM_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

impl TestingProblem {
    /// Validates shape, symmetry, unit diagonal, entry bounds and positive
    /// semidefiniteness (smallest eigenvalue ≥ −1e−8).
    pub fn new(n: usize, mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let problem = Self::new_unchecked_psd(n, mu, sigma)?;
        let min_eig = min_eigenvalue(&problem.sigma);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidMatrix(format!(
                "sigma is not positive semidefinite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(problem)
    }

    /// Like [`TestingProblem::new`] but skips the O(p³) definiteness check;
    /// for matrices that are PSD by construction.
    pub fn new_unchecked_psd(n: usize, mu: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", format!("sample size must be ≥ 2, got {n}")));
        }
        let p = mu.len();
        if p == 0 {
            return Err(Error::invalid("mu", "dimension must be ≥ 1"));
        }
        if sigma.nrows() != p || sigma.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "mu has length {p} but sigma is {}×{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if let Some(j) = mu.iter().position(|m| !m.is_finite()) {
            return Err(Error::invalid("mu", format!("entry {j} is not finite")));
        }
        check_correlation(&sigma)?;
        Ok(Self { n, mu, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn is_null(&self, j: usize) -> bool {
        self.mu[j] == 0.0
    }

    pub fn nulls(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.is_null(j)).collect()
    }

    pub fn alternatives(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| !self.is_null(j)).collect()
    }

    pub fn p0(&self) -> usize {
        self.mu.iter().filter(|&&m| m == 0.0).count()
    }

    pub fn p1(&self) -> usize {
        self.p() - self.p0()
    }

    /// Reorders variables by `perm` (new index `i` takes old index `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let p = self.p();
        let mut seen = vec![false; p];
        if perm.len() != p || perm.iter().any(|&i| i >= p || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::invalid("perm", "not a permutation of 0..p"));
        }
        let mu = perm.iter().map(|&i| self.mu[i]).collect();
        let sigma = DMatrix::from_fn(p, p, |a, b| self.sigma[(perm[a], perm[b])]);
        Ok(Self {
            n: self.n,
            mu,
            sigma,
        })
    }
}

fn check_correlation(sigma: &DMatrix<f64>) -> Result<()> {
    let p = sigma.nrows();
    for j in 0..p {
        let d = sigma[(j, j)];
        if (d - 1.0).abs() > DIAG_TOL {
            return Err(Error::InvalidMatrix(format!(
                "diagonal entry {j} is {d}, expected 1"
            )));
        }
        for k in 0..j {
            let a = sigma[(j, k)];
            let b = sigma[(k, j)];
            if !a.is_finite() || (a - b).abs() > SYM_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "not symmetric at ({j}, {k}): {a} vs {b}"
                )));
            }
            if a.abs() > 1.0 + DIAG_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({j}, {k}) = {a} exceeds 1 in magnitude"
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_quantile_is_negative() {
        let thr = Threshold::new(0.02, 200).unwrap();
        assert!(thr.q < 0.0);
        assert!((thr.q + 2.345_232_231_110_364).abs() < 1e-9);
        assert!(Threshold::new(0.0, 200).is_err());
        assert!(Threshold::new(1.0, 200).is_err());
        assert!(Threshold::new(0.05, 1).is_err());
    }

    #[test]
    fn problem_validation() {
        let id = DMatrix::identity(3, 3);
        let p = TestingProblem::new(10, vec![0.0, 2.0, 0.0], id.clone()).unwrap();
        assert_eq!((p.p0(), p.p1()), (2, 1));
        assert_eq!(p.alternatives(), vec![1]);

        let mut asym = id.clone();
        asym[(0, 1)] = 0.3;
        assert!(TestingProblem::new(10, vec![0.0; 3], asym).is_err());

        let mut diag = id.clone();
        diag[(2, 2)] = 0.9;
        assert!(TestingProblem::new(10, vec![0.0; 3], diag).is_err());

        // symmetric, unit diagonal, but indefinite
        let bad = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        assert!(TestingProblem::new(10, vec![0.0; 3], bad).is_err());

        assert!(TestingProblem::new(10, vec![0.0; 2], id).is_err());
    }

    #[test]
    fn permutation_reorders_both() {
        let sigma = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 1.0, 0.3, 0.1, 0.3, 1.0]);
        let p = TestingProblem::new(10, vec![0.0, 1.0, 2.0], sigma).unwrap();
        let q = p.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(q.mu(), &[2.0, 0.0, 1.0]);
        assert_eq!(q.sigma()[(0, 2)], 0.3);
        assert!(p.permuted(&[0, 0, 1]).is_err());
    }
}
