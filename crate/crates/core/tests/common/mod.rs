#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

/// Correlation matrix of `B·Bᵀ + D` for uniform loadings `B` (p × f).
pub fn random_correlation(p: usize, f: usize, seed: u64) -> DMatrix<f64> {
    let mut r = fdpu_core::rng::stream(seed, &[99]);
    let b = DMatrix::from_fn(p, f, |_, _| r.random_range(-0.7..0.7));
    let mut s = &b * b.transpose();
    for j in 0..p {
        s[(j, j)] += r.random_range(0.3..1.0);
    }
    fdpu_core::sim::to_correlation(&s).unwrap()
}

pub fn min_eigen(m: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.min()
}
