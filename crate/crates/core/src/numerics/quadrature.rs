use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

/// Discretisation settings for Gaussian quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSpec {
    /// Nodes per axis.
    pub nodes_1d: usize,
    /// Standard deviations covered by the integration domain.
    pub domain_halfwidth: f64,
}

impl QuadSpec {
    /// Rule used for expectations over the law of σ̂.
    pub const SIGMA_HAT: QuadSpec = QuadSpec {
        nodes_1d: 64,
        domain_halfwidth: 8.0,
    };

    pub fn new(nodes_1d: usize, domain_halfwidth: f64) -> Result<Self> {
        if nodes_1d < 2 {
            return Err(Error::invalid("nodes_1d", format!("must be ≥ 2, got {nodes_1d}")));
        }
        if !(domain_halfwidth > 0.0 && domain_halfwidth.is_finite()) {
            return Err(Error::invalid(
                "domain_halfwidth",
                format!("must be positive and finite, got {domain_halfwidth}"),
            ));
        }
        Ok(Self {
            nodes_1d,
            domain_halfwidth,
        })
    }

    pub fn refined(&self) -> Self {
        Self {
            nodes_1d: self.nodes_1d * 2,
            ..*self
        }
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            nodes_1d: 24,
            domain_halfwidth: 8.0,
        }
    }
}

/// Eigenvalues/eigenvector heads of a symmetric Jacobi matrix, sorted by node.
fn golub_welsch(off_diag: &[f64], mu0: f64) -> Vec<(f64, f64)> {
    let n = off_diag.len() + 1;
    let mut jac = DMatrix::zeros(n, n);
    for (i, &b) in off_diag.iter().enumerate() {
        jac[(i, i + 1)] = b;
        jac[(i + 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let off: Vec<f64> = (1..n)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    let mut rule = golub_welsch(&off, 2.0);
    symmetrize(&mut rule);
    rule
}

/// Probabilists' Gauss–Hermite rule: `Σ wᵢ g(xᵢ) ≈ E[g(Z)]`, `Z ~ N(0, 1)`.
///
/// Nodes beyond `domain_halfwidth` are dropped and the remaining weights
/// renormalised to sum to one.
pub fn gauss_nodes(spec: &QuadSpec) -> Vec<(f64, f64)> {
    let off: Vec<f64> = (1..spec.nodes_1d).map(|i| (i as f64).sqrt()).collect();
    let mut rule = golub_welsch(&off, 1.0);
    symmetrize(&mut rule);
    rule.retain(|&(x, _)| x.abs() <= spec.domain_halfwidth);
    let total: f64 = rule.iter().map(|&(_, w)| w).sum();
    for (_, w) in rule.iter_mut() {
        *w /= total;
    }
    rule
}

/// Enforce exact mirror symmetry of a rule symmetric about zero.
fn symmetrize(rule: &mut [(f64, f64)]) {
    let n = rule.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (rule[j].0 - rule[i].0);
        let w = 0.5 * (rule[i].1 + rule[j].1);
        rule[i] = (-x, w);
        rule[j] = (x, w);
    }
    if n % 2 == 1 {
        rule[n / 2].0 = 0.0;
    }
}

/// E[χ_df/√df], the mean of σ̂ when `df·σ̂² ~ χ²_df`.
pub fn chi_mean(df: f64) -> f64 {
    (2.0 / df).sqrt() * (ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df)).exp()
}

/// Quadrature rule for expectations over σ̂ = √(χ²_{n−1}/(n−1)).
///
/// Gauss–Legendre on `[max(ε, m − h·s), m + h·s·(1 + 2/√df)]` with `m`, `s`
/// the mean and standard deviation of σ̂ and `h` the spec's half-width; weights include
/// the density and are normalised to sum to one.
#[derive(Debug, Clone)]
pub struct SigmaHatLaw {
    df: f64,
    nodes: Vec<(f64, f64)>,
}

impl SigmaHatLaw {
    pub fn new(n: usize, spec: &QuadSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", format!("sample size must be ≥ 2, got {n}")));
        }
        let df = (n - 1) as f64;
        let m = chi_mean(df);
        let s = (1.0 - m * m).max(0.0).sqrt();
        let lo = (m - spec.domain_halfwidth * s).max(1e-12);
        // the chi law is right-skewed at small df; stretch the upper end
        let hi = m + spec.domain_halfwidth * s * (1.0 + 2.0 / df.sqrt());
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let ln_norm = std::f64::consts::LN_2 + 0.5 * df * (0.5 * df).ln() - ln_gamma(0.5 * df);
        let mut nodes: Vec<(f64, f64)> = gauss_legendre(spec.nodes_1d)
            .into_iter()
            .map(|(x, w)| {
                let sigma = mid + half * x;
                let ln_f = ln_norm + (df - 1.0) * sigma.ln() - 0.5 * df * sigma * sigma;
                (sigma, w * half * ln_f.exp())
            })
            .collect();
        let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
        for (_, w) in nodes.iter_mut() {
            *w /= total;
        }
        Ok(Self { df, nodes })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    /// `(σ̂, weight)` pairs.
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(s, w)| w * g(s)).sum()
    }
}

/// `E[g(σ̂)]` where `(n−1)σ̂² ~ χ²_{n−1}`.
pub fn expect_over_sigma_hat(g: impl Fn(f64) -> f64, n: usize, spec: &QuadSpec) -> Result<f64> {
    Ok(SigmaHatLaw::new(n, spec)?.expect(g))
}
