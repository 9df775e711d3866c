use super::{CovEstimate, EngineKind, PairSpec};
use crate::rng::{self, purpose};
use crate::{Error, Result, Threshold};
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

/// Replicates drawn from one random stream.
pub const MC_BLOCK: usize = 4096;
const MIN_REPS: usize = 100;
const VARIANCE_KEY: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    a: u64,
    b: u64,
    ab: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            a: self.a + o.a,
            b: self.b + o.b,
            ab: self.ab + o.ab,
        }
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::invalid("reps", format!("need at least {MIN_REPS} replicates, got {reps}")));
    }
    Ok(())
}

fn block_len(reps: usize, block: usize) -> usize {
    MC_BLOCK.min(reps - block * MC_BLOCK)
}

fn chi_squared(df: f64) -> Result<ChiSquared<f64>> {
    ChiSquared::new(df).map_err(|e| Error::numeric("mc_cov", format!("chi-squared({df}): {e}")))
}

/// Draws the indicator pair from the exact law of the two t statistics.
///
/// The sample means and the sample covariance matrix are sufficient: the
/// scaled means are bivariate normal and `(n−1)·S` is Wishart, sampled by its
/// Bartlett decomposition.
fn pair_block(pair: &PairSpec, c2: f64, seed: u64, pair_id: u64, block: usize, len: usize) -> Result<Counts> {
    let df = (pair.n - 1) as f64;
    let chi_a = chi_squared(df)?;
    let chi_b = chi_squared(df - 1.0)?;
    let rho = pair.rho;
    let s = ((1.0 - rho) * (1.0 + rho)).max(0.0).sqrt();
    let mut rng = rng::stream(seed, &[purpose::PAIR_MC, pair_id, block as u64]);
    let mut counts = Counts::default();
    for _ in 0..len {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let b21: f64 = StandardNormal.sample(&mut rng);
        let a11: f64 = chi_a.sample(&mut rng);
        let b22sq: f64 = chi_b.sample(&mut rng);
        let u = rho * a11.sqrt() + s * b21;
        let a22 = u * u + s * s * b22sq;
        let xj = pair.mu_j + z1;
        let xk = pair.mu_k + rho * z1 + s * z2;
        // |x|/√(A/df) > c
        let rj = xj * xj * df > c2 * a11;
        let rk = xk * xk * df > c2 * a22;
        counts.a += rj as u64;
        counts.b += rk as u64;
        counts.ab += (rj && rk) as u64;
    }
    Ok(counts)
}

fn run_blocks(reps: usize, f: impl Fn(usize, usize) -> Result<Counts> + Sync) -> Result<Counts> {
    let blocks = reps.div_ceil(MC_BLOCK);
    let parts: Vec<Result<Counts>> = (0..blocks).into_par_iter().map(|b| f(b, block_len(reps, b))).collect();
    parts.into_iter().try_fold(Counts::default(), |acc, c| Ok(acc + c?))
}

/// Sample covariance of the indicators and its standard error from the
/// influence function `ψ = (a − ā)(b − b̄)`.
fn cov_from_counts(c: Counts, reps: usize) -> (f64, f64) {
    let r = reps as f64;
    let pa = c.a as f64 / r;
    let pb = c.b as f64 / r;
    let plug_in = c.ab as f64 / r - pa * pb;
    let cells = [
        (c.ab, (1.0 - pa) * (1.0 - pb)),
        (c.a - c.ab, (1.0 - pa) * -pb),
        (c.b - c.ab, -pa * (1.0 - pb)),
        (reps as u64 + c.ab - c.a - c.b, pa * pb),
    ];
    let ss: f64 = cells.iter().map(|&(m, psi)| m as f64 * (psi - plug_in).powi(2)).sum();
    let se = (ss / (r - 1.0) / r).sqrt();
    (plug_in * r / (r - 1.0), se)
}

pub(crate) fn mc_cov_keyed(pair: &PairSpec, thr: &Threshold, reps: usize, seed: u64, pair_id: u64) -> Result<CovEstimate> {
    check_reps(reps)?;
    let pair = PairSpec::new(pair.mu_j, pair.mu_k, pair.rho, pair.n)?;
    if thr.n != pair.n {
        return Err(Error::invalid("n", format!("pair has n = {} but threshold has n = {}", pair.n, thr.n)));
    }
    let c2 = thr.critical().powi(2);
    let counts = run_blocks(reps, |b, len| pair_block(&pair, c2, seed, pair_id, b, len))?;
    let (value, se) = cov_from_counts(counts, reps);
    Ok(CovEstimate {
        value,
        std_error: Some(se),
        method: EngineKind::MonteCarlo,
        reps_or_nodes: reps,
    })
}

/// Monte Carlo estimate of `Cov(t_j, t_k)` from the exact law of the pair.
pub fn mc_cov(pair: &PairSpec, thr: &Threshold, reps: usize, seed: u64) -> Result<CovEstimate> {
    mc_cov_keyed(pair, thr, reps, seed, 0)
}

/// Monte Carlo estimate of `Var(t_j)` for a single test with noncentrality `mu`.
pub fn mc_var(mu: f64, thr: &Threshold, reps: usize, seed: u64) -> Result<CovEstimate> {
    check_reps(reps)?;
    if !mu.is_finite() {
        return Err(Error::invalid("mu", "noncentrality must be finite"));
    }
    let df = thr.df() as f64;
    let chi = chi_squared(df)?;
    let c2 = thr.critical().powi(2);
    let counts = run_blocks(reps, |b, len| {
        let mut rng = rng::stream(seed, &[purpose::PAIR_MC, VARIANCE_KEY, b as u64]);
        let mut a = 0u64;
        for _ in 0..len {
            let z: f64 = StandardNormal.sample(&mut rng);
            let s2: f64 = chi.sample(&mut rng);
            let x = mu + z;
            a += (x * x * df > c2 * s2) as u64;
        }
        Ok(Counts { a, b: a, ab: a })
    })?;
    // with b = a the pair formulas give the indicator variance
    let (value, se) = cov_from_counts(counts, reps);
    Ok(CovEstimate {
        value,
        std_error: Some(se),
        method: EngineKind::MonteCarlo,
        reps_or_nodes: reps,
    })
}
