use super::models::SimulationModel;
use crate::fdp_moments::weak_dependence_measure;
use crate::problem::min_eigenvalue;
use crate::rng::{self, purpose};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

/// Largest number of factors the automatic rule will remove.
pub const MAX_AUTO_FACTORS: usize = 10;
/// Weak-dependence level the automatic rule aims for.
pub const AUTO_TARGET: f64 = 0.05;

/// How many principal factors to remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FactorRule {
    Fixed(usize),
    /// Smallest `k ≤ 10` whose deflated correlation has weak-dependence
    /// measure at most 0.05, else 10.
    Auto,
}

impl From<Option<usize>> for FactorRule {
    fn from(k: Option<usize>) -> Self {
        k.map_or(FactorRule::Auto, FactorRule::Fixed)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DeflationReport {
    pub k_removed: usize,
    /// Descending.
    pub removed_eigenvalues: Vec<f64>,
    pub weak_dep_before: f64,
    pub weak_dep_after: f64,
    pub min_eigen_after: f64,
}

/// Eigenpairs sorted by descending eigenvalue; each eigenvector's first
/// nonzero component is made positive.
pub fn sorted_eigen(sigma: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(sigma.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(sigma.nrows(), order.len());
    for (c, &i) in order.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        if v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0) {
            v.neg_mut();
        }
        vectors.set_column(c, &v);
    }
    (values, vectors)
}

fn check_square(sigma: &DMatrix<f64>) -> Result<()> {
    if sigma.nrows() != sigma.ncols() || sigma.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}×{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    Ok(())
}

/// `Σ_{i>k} λ_i v_i v_iᵀ`, which equals `Σ − Σ_{i≤k} λ_i v_i v_iᵀ` but does
/// not cancel against large removed eigenvalues. Negative rounding-level
/// eigenvalues are taken as zero, so the result is a Gram matrix.
fn remove_components(values: &[f64], vectors: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let p = vectors.nrows();
    let mut rest = vectors.columns(k, p - k).into_owned();
    for (mut col, &l) in rest.column_iter_mut().zip(&values[k..]) {
        col *= l.max(0.0).sqrt();
    }
    let out = &rest * rest.transpose();
    (&out + out.transpose()) * 0.5
}

/// `Σ − Σ_{i≤k} λ_i v_i v_iᵀ` over the top-`k` eigenpairs.
///
/// Computed from the remaining eigenpairs.
pub fn pfa_deflate(sigma: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    check_square(sigma)?;
    let p = sigma.nrows();
    if k >= p {
        return Err(Error::invalid("k", format!("cannot remove {k} factors from a {p}×{p} matrix")));
    }
    if k == 0 {
        return Ok(sigma.clone());
    }
    let (values, vectors) = sorted_eigen(sigma);
    Ok(remove_components(&values, &vectors, k))
}

/// Rescales a covariance matrix to unit diagonal.
pub fn to_correlation(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(cov)?;
    let p = cov.nrows();
    let bad: Vec<usize> = (0..p).filter(|&j| !(cov[(j, j)] > 0.0)).collect();
    if !bad.is_empty() {
        return Err(Error::DegenerateColumns(bad));
    }
    let sd: Vec<f64> = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        }
    }))
}

/// Unbiased sample covariance of the rows of `x`.
pub fn sample_covariance(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = x.nrows();
    if m < 2 {
        return Err(Error::invalid("m", format!("need at least 2 observations, got {m}")));
    }
    let means = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let s = centered.tr_mul(&centered) / (m - 1) as f64;
    Ok((&s + s.transpose()) * 0.5)
}

/// Deflates a covariance matrix and renormalises it to a correlation matrix.
pub fn deflate_to_correlation(cov: &DMatrix<f64>, rule: FactorRule) -> Result<(DMatrix<f64>, DeflationReport)> {
    check_square(cov)?;
    let p = cov.nrows();
    let before = to_correlation(cov)?;
    let weak_dep_before = weak_dependence_measure(&before);
    let (values, vectors) = sorted_eigen(cov);
    let k_max = p.saturating_sub(1);
    let build = |k: usize| -> Result<DMatrix<f64>> { to_correlation(&remove_components(&values, &vectors, k)) };
    let (k, corr) = match rule {
        FactorRule::Fixed(k) => {
            if k >= p {
                return Err(Error::invalid("k", format!("cannot remove {k} factors from a {p}×{p} matrix")));
            }
            (k, if k == 0 { before.clone() } else { build(k)? })
        }
        FactorRule::Auto => {
            let mut chosen = None;
            for k in 0..=MAX_AUTO_FACTORS.min(k_max) {
                let c = if k == 0 { before.clone() } else { build(k)? };
                if weak_dependence_measure(&c) <= AUTO_TARGET {
                    chosen = Some((k, c));
                    break;
                }
            }
            match chosen {
                Some(found) => found,
                None => {
                    let k = MAX_AUTO_FACTORS.min(k_max);
                    (k, if k == 0 { before.clone() } else { build(k)? })
                }
            }
        }
    };
    let report = DeflationReport {
        k_removed: k,
        removed_eigenvalues: values[..k].to_vec(),
        weak_dep_before,
        weak_dep_after: weak_dependence_measure(&corr),
        min_eigen_after: min_eigenvalue(&corr),
    };
    Ok((corr, report))
}

/// Draws `m` vectors from the model, forms their sample covariance, removes
/// principal factors and returns the resulting correlation matrix.
///
/// Loadings come from stream `(seed, MODEL_LOADINGS)` and draw `i` from
/// `(seed, MODEL_DRAWS, i)`.
pub fn build_sigma(
    model: &SimulationModel,
    p: usize,
    m: usize,
    rule: FactorRule,
    seed: u64,
) -> Result<(DMatrix<f64>, DeflationReport)> {
    if p == 0 {
        return Err(Error::invalid("p", "dimension must be ≥ 1"));
    }
    if m < 2 {
        return Err(Error::invalid("m", format!("need at least 2 draws, got {m}")));
    }
    let inst = model.instantiate(p, &mut rng::stream(seed, &[purpose::MODEL_LOADINGS]));
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| inst.draw_vec(&mut rng::stream(seed, &[purpose::MODEL_DRAWS, i as u64])))
        .collect();
    let x = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    deflate_to_correlation(&sample_covariance(&x)?, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ModelKind;
    use rand::Rng;

    fn random_spd(p: usize, seed: u64) -> DMatrix<f64> {
        let mut r = rng::stream(seed, &[]);
        let a = DMatrix::from_fn(p, p, |_, _| r.random::<f64>() - 0.5);
        &a * a.transpose() + DMatrix::identity(p, p) * 0.1
    }

    #[test]
    fn zero_factors_is_identity_map() {
        let s = random_spd(6, 1);
        assert_eq!(pfa_deflate(&s, 0).unwrap(), s);
        assert!(pfa_deflate(&s, 6).is_err());
    }

    #[test]
    fn rank_one_plus_noise() {
        let v = DVector::from_vec(vec![0.5, -0.5, 0.5, 0.5]);
        let eps = 0.01;
        let s = &v * v.transpose() * 3.0 + DMatrix::identity(4, 4) * eps;
        let d = pfa_deflate(&s, 1).unwrap();
        // the noise along v goes with the factor
        let want = (DMatrix::identity(4, 4) - &v * v.transpose()) * eps;
        assert!((d - want).abs().max() < 1e-12);
    }

    #[test]
    fn spectrum_loses_top_eigenvalues() {
        let s = random_spd(20, 2);
        let d = pfa_deflate(&s, 3).unwrap();
        let mut want = SymmetricEigen::new(s.clone()).eigenvalues.as_slice().to_vec();
        want.sort_by(|a, b| b.total_cmp(a));
        for w in want.iter_mut().take(3) {
            *w = 0.0;
        }
        want.sort_by(|a, b| b.total_cmp(a));
        let mut got = SymmetricEigen::new(d.clone()).eigenvalues.as_slice().to_vec();
        got.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
        let removed: f64 = {
            let (vals, _) = sorted_eigen(&s);
            vals[..3].iter().sum()
        };
        assert!((d.trace() - (s.trace() - removed)).abs() < 1e-8);
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let (_, vecs) = sorted_eigen(&random_spd(8, 3));
        for c in vecs.column_iter() {
            assert!(*c.iter().find(|x| **x != 0.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn correlation_rejects_degenerate() {
        let mut s = DMatrix::identity(3, 3);
        s[(1, 1)] = 0.0;
        match to_correlation(&s) {
            Err(Error::DegenerateColumns(c)) => assert_eq!(c, vec![1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn built_sigma_is_a_correlation_matrix() {
        for kind in ModelKind::ALL {
            let model = SimulationModel::new(kind);
            let (sigma, report) = build_sigma(&model, 60, 100, FactorRule::Auto, 7).unwrap();
            for j in 0..60 {
                assert_eq!(sigma[(j, j)], 1.0);
            }
            assert!(sigma.iter().all(|v| (-1.0..=1.0).contains(v)));
            assert!(report.min_eigen_after >= -1e-8, "{kind}: {}", report.min_eigen_after);
            assert!(report.removed_eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            assert!(report.k_removed <= MAX_AUTO_FACTORS);
        }
    }

    #[test]
    fn no_deflation_gives_raw_correlation() {
        let model = SimulationModel::new(ModelKind::TwoFactor);
        let (a, report) = build_sigma(&model, 10, 50, FactorRule::Fixed(0), 8).unwrap();
        assert_eq!(report.k_removed, 0);
        assert_eq!(report.weak_dep_before, report.weak_dep_after);
        let (b, _) = build_sigma(&model, 10, 50, FactorRule::Fixed(0), 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_correlation_deflation_weakens_dependence() {
        let model = SimulationModel::new(ModelKind::EqualCorrelation);
        let (_, report) = build_sigma(&model, 500, 400, FactorRule::Auto, 11).unwrap();
        assert!(report.weak_dep_after < report.weak_dep_before);
        assert!(report.k_removed >= 1);
    }
}
