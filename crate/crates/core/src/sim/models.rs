use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal, Uniform};

/// The six dependence structures used to generate synthetic correlation
/// matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    EqualCorrelation,
    FanSong,
    IndependentCauchy,
    ThreeFactor,
    TwoFactor,
    NonlinearFactor,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::EqualCorrelation,
        ModelKind::FanSong,
        ModelKind::IndependentCauchy,
        ModelKind::TwoFactor,
        ModelKind::ThreeFactor,
        ModelKind::NonlinearFactor,
    ];

    /// Stable integer used to key random streams.
    pub fn code(self) -> u64 {
        match self {
            ModelKind::EqualCorrelation => 1,
            ModelKind::FanSong => 2,
            ModelKind::IndependentCauchy => 3,
            ModelKind::ThreeFactor => 4,
            ModelKind::TwoFactor => 5,
            ModelKind::NonlinearFactor => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::EqualCorrelation => "equal_correlation",
            ModelKind::FanSong => "fan_song",
            ModelKind::IndependentCauchy => "independent_cauchy",
            ModelKind::ThreeFactor => "three_factor",
            ModelKind::TwoFactor => "two_factor",
            ModelKind::NonlinearFactor => "nonlinear_factor",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

const FAN_SONG_SOURCES: usize = 10;
const THREE_FACTOR_MEANS: [f64; 3] = [-2.0, 1.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimulationModel {
    pub kind: ModelKind,
    /// Off-diagonal correlation of the equal-correlation model.
    pub equal_rho: f64,
}

impl SimulationModel {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, equal_rho: 0.5 }
    }

    pub fn equal_correlation(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid("equal_rho", format!("must lie in [0, 1], got {rho}")));
        }
        Ok(Self {
            kind: ModelKind::EqualCorrelation,
            equal_rho: rho,
        })
    }

    /// Fixes the population: draws the factor loadings for dimension `p`.
    pub fn instantiate<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> ModelInstance {
        let factors = match self.kind {
            ModelKind::TwoFactor | ModelKind::NonlinearFactor => 2,
            ModelKind::ThreeFactor => 3,
            _ => 0,
        };
        let u = Uniform::new(-1.0, 1.0).expect("valid bounds");
        let loadings = (0..p * factors).map(|_| u.sample(rng)).collect();
        ModelInstance {
            model: *self,
            p,
            factors,
            loadings,
        }
    }
}

/// A model with its loadings fixed; each [`ModelInstance::draw`] is one
/// independent `Z` vector from the population.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    model: SimulationModel,
    p: usize,
    factors: usize,
    loadings: Vec<f64>,
}

impl ModelInstance {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind
    }

    /// Loadings of coordinate `j` (empty for loading-free models).
    pub fn loadings(&self, j: usize) -> &[f64] {
        &self.loadings[j * self.factors..(j + 1) * self.factors]
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.p, "output length must equal p");
        let mut normal = || -> f64 { StandardNormal.sample(rng) };
        match self.model.kind {
            ModelKind::EqualCorrelation => {
                let r = self.model.equal_rho;
                let w = normal();
                let (a, b) = (r.sqrt(), (1.0 - r).sqrt());
                for z in out.iter_mut() {
                    *z = a * w + b * normal();
                }
            }
            ModelKind::FanSong => {
                let dependent = self.p.div_ceil(20);
                let sources = FAN_SONG_SOURCES.min(self.p - dependent);
                let free = self.p - dependent;
                for z in out[..free].iter_mut() {
                    *z = normal();
                }
                let resid = (1.0 - sources as f64 / 25.0).sqrt();
                let base: f64 = (0..sources)
                    .map(|l| if l % 2 == 0 { out[l] / 5.0 } else { -out[l] / 5.0 })
                    .sum();
                for z in out[free..].iter_mut() {
                    *z = base + resid * normal();
                }
            }
            ModelKind::IndependentCauchy => {
                let c = Cauchy::new(0.0, 1.0).expect("valid scale");
                for z in out.iter_mut() {
                    *z = c.sample(rng);
                }
            }
            ModelKind::ThreeFactor => {
                let w: Vec<f64> = THREE_FACTOR_MEANS.iter().map(|m| m + normal()).collect();
                for (j, z) in out.iter_mut().enumerate() {
                    let l = &self.loadings[3 * j..3 * j + 3];
                    *z = l[0] * w[0] + l[1] * w[1] + l[2] * w[2] + normal();
                }
            }
            ModelKind::TwoFactor => {
                let (w1, w2) = (normal(), normal());
                for (j, z) in out.iter_mut().enumerate() {
                    let l = &self.loadings[2 * j..2 * j + 2];
                    *z = l[0] * w1 + l[1] * w2 + normal();
                }
            }
            ModelKind::NonlinearFactor => {
                let (w1, w2) = (normal(), normal());
                for (j, z) in out.iter_mut().enumerate() {
                    let l = &self.loadings[2 * j..2 * j + 2];
                    *z = (l[0] * w1).sin() + l[1].signum() * (l[1].abs() * w2).exp() + normal();
                }
            }
        }
    }

    pub fn draw_vec<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        self.draw(rng, &mut out);
        out
    }
}

/// One draw of `Z` from a freshly instantiated model.
pub fn generate_model_z<R: Rng + ?Sized>(model: &SimulationModel, p: usize, rng: &mut R) -> Vec<f64> {
    model.instantiate(p, rng).draw_vec(rng)
}
