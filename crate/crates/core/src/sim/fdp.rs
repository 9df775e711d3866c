use super::deflate::sorted_eigen;
use crate::rng::{self, purpose};
use crate::{Error, Result, TestingProblem, Threshold};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Empirical FDP distribution over independent replicates.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReplicateSummary {
    pub fdp_values: Vec<f64>,
    /// False rejections `V` per replicate.
    pub false_rejections: Vec<u32>,
    /// Total rejections `R` per replicate.
    pub rejections: Vec<u32>,
    /// Rejection count of each test across replicates.
    pub per_test_rejections: Vec<u64>,
    pub mean: f64,
    /// Sample standard deviation (divisor `reps − 1`; zero for one replicate).
    pub sd: f64,
    pub reps: usize,
    pub seed: u64,
}

struct Replicate {
    v: u32,
    r: u32,
    rejected: Vec<bool>,
}

/// `Σ = L·Lᵀ` with `L = V·diag(√max(λ, 0))`.
fn factor(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, mut vectors) = sorted_eigen(sigma);
    for (mut col, &l) in vectors.column_iter_mut().zip(&values) {
        col *= l.max(0.0).sqrt();
    }
    vectors
}

fn replicate(problem: &TestingProblem, thr: &Threshold, lt: &DMatrix<f64>, seed: u64, rep: usize) -> Replicate {
    let (n, p) = (problem.n(), problem.p());
    let mut rng = rng::stream(seed, &[purpose::DATA, rep as u64]);
    let z = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    let x = z * lt;
    let sqrt_n = (n as f64).sqrt();
    let c = thr.critical();
    let mut rejected = vec![false; p];
    let (mut v, mut r) = (0u32, 0u32);
    for (j, col) in x.column_iter().enumerate() {
        let mean = col.mean();
        let ss: f64 = col.iter().map(|&e| (e - mean).powi(2)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        // the shift μ/√n does not change the sample variance
        let t = sqrt_n * (mean + problem.mu()[j] / sqrt_n) / sd;
        if t.abs() > c {
            rejected[j] = true;
            r += 1;
            v += problem.is_null(j) as u32;
        }
    }
    Replicate { v, r, rejected }
}

/// Draws `reps` data sets of `n` observations from `N(μ/√n, Σ)`, runs the
/// one-sample t-tests and records the FDP (zero when nothing is rejected).
///
/// Replicate `i` uses stream `(seed, DATA, i)`.
pub fn simulate_fdp(problem: &TestingProblem, thr: &Threshold, reps: usize, seed: u64) -> Result<ReplicateSummary> {
    if reps == 0 {
        return Err(Error::invalid("reps", "need at least one replicate"));
    }
    if thr.n != problem.n() {
        return Err(Error::invalid(
            "n",
            format!("problem has n = {} but threshold has n = {}", problem.n(), thr.n),
        ));
    }
    let lt = factor(problem.sigma()).transpose();
    let runs: Vec<Replicate> = (0..reps)
        .into_par_iter()
        .map(|i| replicate(problem, thr, &lt, seed, i))
        .collect();
    let mut per_test_rejections = vec![0u64; problem.p()];
    for run in &runs {
        for (count, &hit) in per_test_rejections.iter_mut().zip(&run.rejected) {
            *count += hit as u64;
        }
    }
    let fdp_values: Vec<f64> = runs
        .iter()
        .map(|run| if run.r == 0 { 0.0 } else { run.v as f64 / run.r as f64 })
        .collect();
    let mean = fdp_values.iter().sum::<f64>() / reps as f64;
    let sd = if reps > 1 {
        (fdp_values.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(ReplicateSummary {
        false_rejections: runs.iter().map(|r| r.v).collect(),
        rejections: runs.iter().map(|r| r.r).collect(),
        per_test_rejections,
        fdp_values,
        mean,
        sd,
        reps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_sigma() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.4, -0.2, 0.4, 1.0, 0.1, -0.2, 0.1, 1.0]);
        let l = factor(&s);
        assert!((&l * l.transpose() - s).abs().max() < 1e-12);
    }

    #[test]
    fn counts_are_consistent() {
        let p = 30;
        let mut mu = vec![0.0; p];
        mu[4] = 3.0;
        mu[9] = -3.0;
        let problem = TestingProblem::new(20, mu, DMatrix::identity(p, p)).unwrap();
        let thr = Threshold::new(0.1, 20).unwrap();
        let s = simulate_fdp(&problem, &thr, 50, 1).unwrap();
        for i in 0..50 {
            assert!(s.false_rejections[i] <= s.rejections[i]);
            assert!((0.0..=1.0).contains(&s.fdp_values[i]));
            if s.rejections[i] == 0 {
                assert_eq!(s.fdp_values[i], 0.0);
            }
        }
        let total: u64 = s.per_test_rejections.iter().sum();
        assert_eq!(total, s.rejections.iter().map(|&r| r as u64).sum::<u64>());
        assert_eq!(s, simulate_fdp(&problem, &thr, 50, 1).unwrap());
        assert!(simulate_fdp(&problem, &thr, 0, 1).is_err());
    }

    #[test]
    fn huge_signal_fdp_is_binomial_ratio() {
        // all alternatives rejected: FDP = V/(V + p₁), V ~ Bin(p₀, t)
        let (p0, p1) = (20usize, 5usize);
        let mut mu = vec![0.0; p0 + p1];
        for m in mu.iter_mut().skip(p0) {
            *m = 1e3;
        }
        let problem = TestingProblem::new(15, mu, DMatrix::identity(p0 + p1, p0 + p1)).unwrap();
        let t = 0.1;
        let thr = Threshold::new(t, 15).unwrap();
        let reps = 4000;
        let s = simulate_fdp(&problem, &thr, reps, 2).unwrap();
        for i in 0..reps {
            let v = s.false_rejections[i] as f64;
            assert_eq!(s.fdp_values[i], v / (v + p1 as f64));
        }
        // binomial oracle for E[V/(V + p₁)]
        let mut pmf = 1.0f64;
        let mut expect = 0.0;
        let mut var_term = 0.0;
        for v in 0..=p0 {
            if v > 0 {
                pmf *= (p0 - v + 1) as f64 / v as f64 * t / (1.0 - t);
            }
            let w = pmf * (1.0 - t).powi(p0 as i32);
            let f = v as f64 / (v + p1) as f64;
            expect += w * f;
            var_term += w * f * f;
        }
        let se = ((var_term - expect * expect) / reps as f64).sqrt();
        assert!((s.mean - expect).abs() < 4.0 * se, "{} vs {expect} ± {se}", s.mean);
    }
}
