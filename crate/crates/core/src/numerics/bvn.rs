//! Standard bivariate normal orthant probabilities.
//!
//! Genz's BVNU algorithm (Drezner–Wesolowsky with Genz's refinements):
//! Gauss–Legendre integration of Plackett's identity over `asin(ρ)` for
//! `|ρ| < 0.925`, and an asymptotic series plus correction integral near
//! `|ρ| = 1`. Double-precision accurate.

use super::normal::std_normal_cdf;
use crate::{Error, Result};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

// Gauss–Legendre half-rules (negative abscissae) for 6, 12 and 20 points.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

fn rule(abs_rho: f64) -> &'static [(f64, f64)] {
    if abs_rho < 0.3 {
        &GL6
    } else if abs_rho < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// Arguments of a bivariate normal CDF evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvnArgs {
    pub h: f64,
    pub k: f64,
    pub rho: f64,
}

impl BvnArgs {
    pub fn new(h: f64, k: f64, rho: f64) -> Result<Self> {
        if h.is_nan() || k.is_nan() {
            return Err(Error::invalid("h/k", "limits must not be NaN"));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::invalid("rho", format!("|rho| must be ≤ 1, got {rho}")));
        }
        Ok(Self { h, k, rho })
    }

    pub fn cdf(&self) -> f64 {
        bvn_cdf(self.h, self.k, self.rho)
    }
}

/// `P(Z₁ ≤ h, Z₂ ≤ k)` for a standard bivariate normal with correlation `rho`.
///
/// Infinite limits are accepted. `rho` must lie in `[-1, 1]`; callers with
/// untrusted input should go through [`BvnArgs::new`].
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return std_normal_cdf(k);
    }
    if k == f64::INFINITY {
        return std_normal_cdf(h);
    }
    if rho == 0.0 {
        return std_normal_cdf(h) * std_normal_cdf(k);
    }
    upper_orthant(-h, -k, rho)
}

/// `bvn_cdf(h, k, ρ) − Φ(h)Φ(k)`, computed without cancellation for
/// moderate `|ρ|`. `phi_h` and `phi_k` must be `Φ(h)` and `Φ(k)`; they are
/// only used when `|ρ| ≥ 0.925`.
///
/// Exactly zero when `ρ = 0` or either limit is infinite.
pub fn bvn_excess(h: f64, k: f64, rho: f64, phi_h: f64, phi_k: f64) -> f64 {
    if rho == 0.0 || h.is_infinite() || k.is_infinite() {
        return 0.0;
    }
    if rho.abs() < 0.925 {
        plackett_term(-h, -k, rho)
    } else {
        upper_orthant(-h, -k, rho) - phi_h * phi_k
    }
}

/// [`bvn_excess`] for a fixed `ρ`, with the angular nodes precomputed so
/// that many `(h, k)` evaluations share them. Results are bit-identical to
/// [`bvn_excess`].
#[derive(Debug, Clone)]
pub struct BvnExcess {
    rho: f64,
    scale: f64,
    // (weight, sin, 1 − sin²) in the order `plackett_term` visits them
    nodes: Vec<(f64, f64, f64)>,
}

impl BvnExcess {
    pub fn new(rho: f64) -> Self {
        let asr = rho.asin();
        let mut nodes = Vec::new();
        if rho != 0.0 && rho.abs() < 0.925 {
            for &(w, x) in rule(rho.abs()) {
                for sn in [(asr * (x + 1.0) * 0.5).sin(), (asr * (1.0 - x) * 0.5).sin()] {
                    nodes.push((w, sn, 1.0 - sn * sn));
                }
            }
        }
        Self {
            rho,
            scale: asr / (2.0 * TWO_PI),
            nodes,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eval(&self, h: f64, k: f64, phi_h: f64, phi_k: f64) -> f64 {
        if self.rho == 0.0 || h.is_infinite() || k.is_infinite() {
            return 0.0;
        }
        if self.nodes.is_empty() {
            return upper_orthant(-h, -k, self.rho) - phi_h * phi_k;
        }
        let hk = -h * -k;
        let hs = 0.5 * (h * h + k * k);
        let mut sum = 0.0;
        for &(w, sn, den) in &self.nodes {
            sum += w * ((sn * hk - hs) / den).exp();
        }
        sum * self.scale
    }
}

/// Plackett integral `∫₀^ρ φ₂(h, k; r) dr` evaluated in `asin` coordinates.
fn plackett_term(h: f64, k: f64, rho: f64) -> f64 {
    let hk = h * k;
    let hs = 0.5 * (h * h + k * k);
    let asr = rho.asin();
    let mut sum = 0.0;
    for &(w, x) in rule(rho.abs()) {
        let sn = (asr * (x + 1.0) * 0.5).sin();
        sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        let sn = (asr * (1.0 - x) * 0.5).sin();
        sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
    }
    sum * (asr / (2.0 * TWO_PI))
}

/// `P(Z₁ > h, Z₂ > k)` for finite `h`, `k`.
fn upper_orthant(h: f64, k: f64, rho: f64) -> f64 {
    if rho.abs() < 0.925 {
        return plackett_term(h, k, rho) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }
    let mut k = k;
    let mut hk = h * k;
    if rho < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if rho.abs() < 1.0 {
        let a_s = (1.0 - rho) * (1.0 + rho);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let e = -0.5 * (b_s / a_s + hk);
        if e > -100.0 {
            bvn = a
                * e.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if hk > -160.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule(rho.abs()) {
            for xi in [x, -x] {
                let xs = (a * (xi + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let e = -0.5 * (b_s / xs + hk);
                if e > -100.0 {
                    bvn += a
                        * w
                        * e.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if rho > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-k)).max(0.0)
    }
}
