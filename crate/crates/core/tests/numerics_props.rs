use fdpu_core::numerics::{
    bvn_cdf, expect_over_sigma_hat, std_normal_cdf, std_normal_quantile, t_cdf, t_quantile, QuadSpec,
};
use proptest::prelude::*;

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn bvn_reflection(h in -6.0..6.0f64, k in -6.0..6.0f64, rho in -0.999..0.999f64) {
        let lhs = bvn_cdf(h, k, rho) + bvn_cdf(h, -k, -rho);
        prop_assert!((lhs - std_normal_cdf(h)).abs() < 1e-7);
    }

    #[test]
    fn bvn_symmetric_and_within_frechet_bounds(h in -6.0..6.0f64, k in -6.0..6.0f64, rho in -1.0..=1.0f64) {
        let f = bvn_cdf(h, k, rho);
        prop_assert!((f - bvn_cdf(k, h, rho)).abs() < 1e-15);
        let (a, b) = (std_normal_cdf(h), std_normal_cdf(k));
        prop_assert!(f >= (a + b - 1.0).max(0.0) - 1e-12);
        prop_assert!(f <= a.min(b) + 1e-12);
    }

    #[test]
    fn bvn_monotone(h in -5.0..5.0f64, k in -5.0..5.0f64, r1 in -0.99..0.99f64, r2 in -0.99..0.99f64, dh in 0.0..1.0f64) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(bvn_cdf(h, k, lo) <= bvn_cdf(h, k, hi) + 1e-12);
        prop_assert!(bvn_cdf(h, k, lo) <= bvn_cdf(h + dh, k, lo) + 1e-12);
        prop_assert!(bvn_cdf(h, k, lo) <= bvn_cdf(h, k + dh, lo) + 1e-12);
    }

    #[test]
    fn t_quantile_inverts_cdf(prob in 1e-6..0.999_999f64, df in 1usize..500) {
        let q = t_quantile(prob, df).unwrap();
        prop_assert!((t_cdf(q, df as f64) - prob).abs() < 1e-10 * prob.max(1e-2));
    }

    #[test]
    fn normal_quantile_inverts_cdf(prob in 1e-12..0.999_999f64) {
        let x = std_normal_quantile(prob);
        prop_assert!(((std_normal_cdf(x) - prob) / prob.min(1.0 - prob)).abs() < 1e-12);
    }
}

/// CDF of t_ν by integrating `cos^{ν−1}θ` after `x = √ν·tan θ`, with
/// composite Simpson; independent of the incomplete beta function.
fn t_cdf_oracle(x: f64, df: f64) -> f64 {
    let f = |th: f64| th.cos().powf(df - 1.0);
    let simpson = |a: f64, b: f64| {
        let m = 20_000;
        let h = (b - a) / m as f64;
        let mut s = f(a) + f(b);
        for i in 1..m {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let half = std::f64::consts::FRAC_PI_2;
    simpson(-half, (x / df.sqrt()).atan()) / simpson(-half, half)
}

#[test]
fn t_quantile_round_trips_through_independent_oracle() {
    for df in [2usize, 9, 49, 199, 400] {
        for prob in [0.0025, 0.01, 0.025, 0.1, 0.4] {
            let q = t_quantile(prob, df).unwrap();
            assert!((t_cdf_oracle(q, df as f64) - prob).abs() < 1e-8, "df={df} p={prob}");
        }
    }
}

#[test]
fn null_rejection_probability_is_the_level() {
    for n in [10, 50, 200] {
        for t in [0.005, 0.02, 0.05, 0.2] {
            let q = t_quantile(0.5 * t, n - 1).unwrap();
            let v = expect_over_sigma_hat(|s| 2.0 * std_normal_cdf(q * s), n, &QuadSpec::SIGMA_HAT).unwrap();
            assert!((v - t).abs() < 1e-6, "n={n} t={t}: {v}");
        }
    }
}

#[test]
fn bvn_monotone_on_grid() {
    let grid: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.5).collect();
    for &rho in &[-0.9, -0.3, 0.0, 0.4, 0.95] {
        for &k in &grid {
            let row: Vec<f64> = grid.iter().map(|&h| bvn_cdf(h, k, rho)).collect();
            assert!(row.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        }
    }
    for &(h, k) in &[(0.0, 0.0), (-1.0, 2.0), (1.5, 1.5)] {
        let col: Vec<f64> = (-99..=99).map(|i| bvn_cdf(h, k, i as f64 / 100.0)).collect();
        assert!(col.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }
}
