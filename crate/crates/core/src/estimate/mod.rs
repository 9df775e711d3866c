//! Plug-in estimation of `(π₀, μ, Σ)` from data matrices, the ridge
//! covariance estimator and the two-sample pipeline.

mod correlation;
mod mu;
mod pi0;
mod two_sample;

pub use correlation::{
    log_grid, ridge_correlation, ridge_covariance, sample_correlation, RidgeConfig, RidgeFit, RidgeLambda, RidgeTarget,
};
pub use mu::{estimate_mu, MuEstimate};
pub use pi0::{storey_pi0, Pi0Estimate, Pi0Method, DEFAULT_PI0_LAMBDA};
pub use two_sample::{two_sample_pipeline, TwoSampleConfig, TwoSampleFit, TwoSampleReport};
