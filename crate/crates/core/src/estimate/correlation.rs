use crate::rng::{self, purpose};
use crate::sim::{sample_covariance, sorted_eigen, to_correlation};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// Unbiased sample covariance of the rows of `x`, rescaled to unit diagonal.
pub fn sample_correlation(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(x)?;
    to_correlation(&sample_covariance(x)?)
}

/// Ridge penalty: a fixed value or cross-validated over a grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeLambda {
    Fixed(f64),
    Cv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeTarget {
    ScaledIdentity,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RidgeConfig {
    pub lambda: RidgeLambda,
    /// Ascending candidate penalties for cross-validation.
    pub cv_grid: Vec<f64>,
    pub cv_folds: usize,
    pub target: RidgeTarget,
    /// Seeds the fold assignment.
    pub seed: u64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            lambda: RidgeLambda::Cv,
            cv_grid: log_grid(1e-4, 1e2, 25),
            cv_folds: 5,
            target: RidgeTarget::ScaledIdentity,
            seed: 0,
        }
    }
}

/// `len` log-spaced points from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..len)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == len {
                hi
            } else {
                (a + (b - a) * i as f64 / (len - 1) as f64).exp()
            }
        })
        .collect()
}

impl RidgeConfig {
    pub fn fixed(lambda: f64) -> Self {
        Self {
            lambda: RidgeLambda::Fixed(lambda),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let RidgeLambda::Fixed(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid("lambda", format!("must be positive and finite, got {l}")));
            }
        }
        if self.cv_grid.is_empty() {
            return Err(Error::invalid("cv_grid", "grid is empty"));
        }
        if self.cv_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::invalid("cv_grid", "grid values must be positive and finite"));
        }
        if self.cv_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("cv_grid", "grid must be strictly ascending"));
        }
        if self.cv_folds < 2 {
            return Err(Error::invalid("cv_folds", format!("need at least 2 folds, got {}", self.cv_folds)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RidgeFit {
    #[serde(skip)]
    pub correlation: DMatrix<f64>,
    pub lambda: f64,
    /// Mean held-out log-likelihood per grid value; empty for a fixed penalty.
    pub cv_scores: Vec<f64>,
}

/// Eigenvalue of the ridge covariance `Ω̂(λ)⁻¹` belonging to a sample
/// eigenvalue `d` with target `α·I`.
fn ridge_eigenvalue(d: f64, lambda: f64, alpha: f64) -> f64 {
    let c = d - lambda * alpha;
    (lambda + 0.25 * c * c).sqrt() + 0.5 * c
}

struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    alpha: f64,
}

impl Spectrum {
    fn new(s: &DMatrix<f64>) -> Self {
        let (values, vectors) = sorted_eigen(s);
        let alpha = s.diagonal().mean();
        Self { values, vectors, alpha }
    }

    fn covariance(&self, lambda: f64) -> DMatrix<f64> {
        let p = self.values.len();
        let mut scaled = self.vectors.clone();
        for (mut col, &d) in scaled.column_iter_mut().zip(&self.values) {
            col *= ridge_eigenvalue(d, lambda, self.alpha);
        }
        let c = scaled * self.vectors.transpose();
        DMatrix::from_fn(p, p, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]))
    }

    /// `−½[log det Σ̂ + tr(Σ̂⁻¹ S_test)]`, using `qᵢ = vᵢᵀ S_test vᵢ`.
    fn loglik(&self, lambda: f64, q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&d, &qi) in self.values.iter().zip(q) {
            let e = ridge_eigenvalue(d, lambda, self.alpha);
            acc += e.ln() + qi / e;
        }
        -0.5 * acc
    }
}

/// Ridge covariance `Ω̂(λ)⁻¹ = [λI + ¼(S − λαI)²]^{1/2} + ½(S − λαI)`
/// with `α` the mean of `diag(S)`.
pub fn ridge_covariance(s: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    check_finite(s)?;
    if s.nrows() != s.ncols() || s.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}×{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("must be positive and finite, got {lambda}")));
    }
    Ok(Spectrum::new(s).covariance(lambda))
}

fn check_finite(x: &DMatrix<f64>) -> Result<()> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        let (r, c) = (i % x.nrows(), i / x.nrows());
        return Err(Error::numeric("correlation", format!("non-finite entry at ({r}, {c})")));
    }
    Ok(())
}

/// Scatter matrix of `rows` of `x` about their mean, plus that mean.
fn scatter(x: &DMatrix<f64>, rows: &[usize]) -> (DMatrix<f64>, Vec<f64>) {
    let p = x.ncols();
    let mut mean = vec![0.0; p];
    for &r in rows {
        for (m, v) in mean.iter_mut().zip(x.row(r).iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= rows.len() as f64;
    }
    let centered = DMatrix::from_fn(rows.len(), p, |i, j| x[(rows[i], j)] - mean[j]);
    (centered.tr_mul(&centered), mean)
}

/// Pooled within-group covariance `Σ_g scatter_g / (N − G)`.
pub(crate) fn pooled_covariance(groups: &[&DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let p = groups[0].ncols();
    let total: usize = groups.iter().map(|g| g.nrows()).sum();
    if total <= groups.len() {
        return Err(Error::invalid("n", "not enough observations for a pooled covariance"));
    }
    let mut s = DMatrix::zeros(p, p);
    for g in groups {
        let all: Vec<usize> = (0..g.nrows()).collect();
        s += scatter(g, &all).0;
    }
    s /= (total - groups.len()) as f64;
    Ok((&s + s.transpose()) * 0.5)
}

/// Fold of each row: rows of a group of size `m` are ranked by a shuffle
/// drawn from `(seed, CV_FOLDS, m)`, and rank `r` lands in fold `r mod k`.
fn fold_labels(m: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng::stream(seed, &[purpose::CV_FOLDS, m as u64]));
    let mut labels = vec![0; m];
    for (rank, &row) in perm.iter().enumerate() {
        labels[row] = rank % k;
    }
    labels
}

/// Held-out log-likelihood of every grid value for one fold.
fn fold_scores(groups: &[&DMatrix<f64>], labels: &[Vec<usize>], fold: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let p = groups[0].ncols();
    let mut train_scatter = DMatrix::zeros(p, p);
    let mut test_scatter = DMatrix::zeros(p, p);
    let (mut n_train, mut n_test) = (0usize, 0usize);
    for (g, lab) in groups.iter().zip(labels) {
        let train: Vec<usize> = (0..g.nrows()).filter(|&r| lab[r] != fold).collect();
        let test: Vec<usize> = (0..g.nrows()).filter(|&r| lab[r] == fold).collect();
        if train.is_empty() {
            return Err(Error::invalid("cv_folds", "a fold leaves a group without training rows"));
        }
        let (sc, mean) = scatter(g, &train);
        train_scatter += sc;
        if !test.is_empty() {
            let centered = DMatrix::from_fn(test.len(), p, |i, j| g[(test[i], j)] - mean[j]);
            test_scatter += centered.tr_mul(&centered);
        }
        n_train += train.len();
        n_test += test.len();
    }
    if n_test == 0 || n_train <= groups.len() {
        return Err(Error::invalid("cv_folds", "too many folds for the number of observations"));
    }
    let s_train = train_scatter / (n_train - groups.len()) as f64;
    let s_test = test_scatter / n_test as f64;
    let spec = Spectrum::new(&((&s_train + s_train.transpose()) * 0.5));
    let q: Vec<f64> = spec
        .vectors
        .column_iter()
        .map(|v| (v.transpose() * &s_test * v)[(0, 0)])
        .collect();
    Ok(grid.iter().map(|&l| spec.loglik(l, &q)).collect())
}

/// Ridge estimate of the correlation of grouped data sharing one
/// covariance; each group is centred at its own mean.
pub(crate) fn ridge_correlation_grouped(groups: &[&DMatrix<f64>], cfg: &RidgeConfig) -> Result<RidgeFit> {
    cfg.validate()?;
    for g in groups {
        check_finite(g)?;
        if g.nrows() < 2 {
            return Err(Error::invalid("n", format!("need at least 2 observations per group, got {}", g.nrows())));
        }
    }
    let s = pooled_covariance(groups)?;
    let bad: Vec<usize> = (0..s.nrows()).filter(|&j| !(s[(j, j)] > 0.0)).collect();
    if !bad.is_empty() {
        return Err(Error::DegenerateColumns(bad));
    }
    let (lambda, cv_scores) = match cfg.lambda {
        RidgeLambda::Fixed(l) => (l, Vec::new()),
        RidgeLambda::Cv => {
            let labels: Vec<Vec<usize>> =
                groups.iter().map(|g| fold_labels(g.nrows(), cfg.cv_folds, cfg.seed)).collect();
            let per_fold: Vec<Vec<f64>> = (0..cfg.cv_folds)
                .into_par_iter()
                .map(|f| fold_scores(groups, &labels, f, &cfg.cv_grid))
                .collect::<Result<_>>()?;
            let scores: Vec<f64> = (0..cfg.cv_grid.len())
                .map(|i| per_fold.iter().map(|f| f[i]).sum::<f64>() / cfg.cv_folds as f64)
                .collect();
            let mut best = 0;
            for (i, sc) in scores.iter().enumerate() {
                // ties go to the larger penalty
                if *sc >= scores[best] || scores[best].is_nan() {
                    best = i;
                }
            }
            if !scores[best].is_finite() {
                return Err(Error::numeric("ridge", "cross-validation produced no finite score"));
            }
            (cfg.cv_grid[best], scores)
        }
    };
    let cov = Spectrum::new(&s).covariance(lambda);
    Ok(RidgeFit {
        correlation: to_correlation(&cov)?,
        lambda,
        cv_scores,
    })
}

/// Ridge estimate of the correlation of the rows of `x`.
pub fn ridge_correlation(x: &DMatrix<f64>, cfg: &RidgeConfig) -> Result<RidgeFit> {
    ridge_correlation_grouped(&[x], cfg)
}
