use super::normal::std_normal_quantile;
use crate::{Error, Result};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

/// CDF of Student's t with `df` degrees of freedom.
pub fn t_cdf(x: f64, df: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let tail = 0.5 * beta_reg(0.5 * df, 0.5, df / (df + x * x));
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Two-sided tail probability `P(|T| > |x|)`, without the `1 − F` cancellation.
pub fn t_two_sided_pvalue(x: f64, df: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    beta_reg(0.5 * df, 0.5, df / (df + x * x))
}

pub fn t_pdf(x: f64, df: f64) -> f64 {
    let ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_norm - 0.5 * (df + 1.0) * (x * x / df).ln_1p()).exp()
}

/// Quantile of Student's t: the `x` with `P(T_df ≤ x) = prob`.
pub fn t_quantile(prob: f64, df: usize) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::invalid("prob", format!("must lie in (0, 1), got {prob}")));
    }
    if df == 0 {
        return Err(Error::invalid("df", "degrees of freedom must be ≥ 1"));
    }
    if prob == 0.5 {
        return Ok(0.0);
    }
    if prob > 0.5 {
        return Ok(-lower_quantile(1.0 - prob, df as f64));
    }
    Ok(lower_quantile(prob, df as f64))
}

/// Safeguarded Newton on the lower tail, `p < 0.5`.
fn lower_quantile(p: f64, df: f64) -> f64 {
    // Bracket [lo, hi] with F(lo) < p < F(hi) = 0.5.
    let mut hi = 0.0;
    let mut lo = std_normal_quantile(p).min(-1.0);
    while t_cdf(lo, df) > p {
        hi = lo;
        lo *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    let z = std_normal_quantile(p);
    if z > lo && z < hi {
        x = z;
    }
    for _ in 0..200 {
        let f = t_cdf(x, df) - p;
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = f / t_pdf(x, df);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: P(0 < T < |x|) by composite Gauss–Legendre on the t density,
    /// so the CDF is 0.5 ± that integral. Independent of the incomplete beta.
    fn cdf_oracle(x: f64, df: f64) -> f64 {
        const X: [f64; 5] = [
            0.148_874_338_981_631_2,
            0.433_395_394_129_247_2,
            0.679_409_568_299_024_4,
            0.865_063_366_688_984_5,
            0.973_906_528_517_171_7,
        ];
        const W: [f64; 5] = [
            0.295_524_224_714_752_9,
            0.269_266_719_309_996_4,
            0.219_086_362_515_982_0,
            0.149_451_349_150_580_6,
            0.066_671_344_308_688_1,
        ];
        let a = x.abs();
        let panels = 400;
        let step = a / panels as f64;
        // density normaliser via Γ-ratio recursion, not ln_gamma
        let norm = density_norm(df);
        let mut sum = 0.0;
        for p in 0..panels {
            let c = (p as f64 + 0.5) * step;
            for i in 0..5 {
                for s in [-1.0, 1.0] {
                    let u = c + s * X[i] * step / 2.0;
                    sum += W[i] * step / 2.0 * norm * (1.0 + u * u / df).powf(-(df + 1.0) / 2.0);
                }
            }
        }
        if x < 0.0 {
            0.5 - sum
        } else {
            0.5 + sum
        }
    }

    /// Γ((ν+1)/2) / (√(νπ) Γ(ν/2)) for integer ν via the duplication recursion.
    fn density_norm(df: f64) -> f64 {
        let nu = df as u64;
        // ratio r(ν) = Γ((ν+1)/2)/Γ(ν/2); r(1) = 1/√π, r(2) = √π/2, r(ν+2) = r(ν)·(ν+1)/ν
        let mut r = if nu % 2 == 1 {
            1.0 / std::f64::consts::PI.sqrt()
        } else {
            std::f64::consts::PI.sqrt() / 2.0
        };
        let mut v = if nu % 2 == 1 { 1 } else { 2 };
        while v < nu {
            r *= (v as f64 + 1.0) / v as f64;
            v += 2;
        }
        r / (df * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn cdf_matches_density_integral() {
        for df in [1.0, 3.0, 9.0, 49.0, 199.0] {
            for x in [-4.0, -2.3, -0.7, 0.1, 1.9] {
                let got = t_cdf(x, df);
                let oracle = cdf_oracle(x, df);
                assert!((got - oracle).abs() < 1e-11, "df={df} x={x}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn quantile_special_values() {
        for df in [1, 5, 199] {
            assert_eq!(t_quantile(0.5, df).unwrap(), 0.0);
        }
        let q = t_quantile(0.025, 1_000_000).unwrap();
        assert!((q + 1.959964).abs() < 1e-3);
        assert!(t_quantile(0.0, 10).is_err());
        assert!(t_quantile(1.0, 10).is_err());
        assert!(t_quantile(f64::NAN, 10).is_err());
        assert!(t_quantile(0.3, 0).is_err());
    }

    #[test]
    fn quantile_round_trips_through_oracle() {
        // includes the (0.01, 199) case
        for df in [1usize, 2, 9, 49, 199, 1000] {
            for p in [0.0025, 0.01, 0.025, 0.1, 0.4, 0.75, 0.99] {
                let x = t_quantile(p, df).unwrap();
                let back = cdf_oracle(x, df as f64);
                assert!((back - p).abs() < 1e-8, "df={df} p={p}: F(x)={back}");
            }
        }
    }

    #[test]
    fn quantile_is_antisymmetric() {
        for df in [2usize, 17, 199] {
            for p in [0.001, 0.02, 0.3] {
                let a = t_quantile(p, df).unwrap();
                let b = t_quantile(1.0 - p, df).unwrap();
                assert!((a + b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quantile_bisection_oracle_at_199() {
        // independent root-find on the oracle CDF
        let (mut lo, mut hi) = (-5.0, 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf_oracle(mid, 199.0) < 0.01 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = t_quantile(0.01, 199).unwrap();
        assert!((q - 0.5 * (lo + hi)).abs() < 1e-8, "{q} vs {}", 0.5 * (lo + hi));
    }

    #[test]
    fn two_sided_pvalue_consistent() {
        for x in [0.0, 0.5, -1.7, 3.2] {
            let p = t_two_sided_pvalue(x, 25.0);
            assert!((p - 2.0 * t_cdf(-x.abs(), 25.0)).abs() < 1e-15);
        }
    }
}
