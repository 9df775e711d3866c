//! Asymptotic uncertainty of the false discovery proportion (FDP) for
//! weakly dependent one- and two-sample t-tests.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] — normal, bivariate normal and Student t primitives plus
//!   the Gaussian quadrature rules everything else integrates with.
//! * [`fdp_moments`] — the asymptotic FDP limit, the independence and
//!   dependence variance components, and the weak-dependence diagnostics.
//! * [`pairwise_cov`] — covariance of two rejection indicators, either by
//!   exact-law Monte Carlo or by quadrature over the CLT law of the sample
//!   variances.
//! * [`sim`] — synthetic dependence models, PFA deflation and empirical FDP
//!   replication.
//! * [`estimate`] — plug-in estimation of π₀, μ and Σ from data, including
//!   the two-sample pipeline.
//! * [`io`] — matrix ingestion (CSV and a compact binary container).

pub mod error;
pub mod estimate;
pub mod fdp_moments;
pub mod io;
pub mod numerics;
pub mod pairwise_cov;
pub mod problem;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use fdp_moments::{fdp_moments, CovProvider, DiagnosticsReport, FdpMoments};
pub use pairwise_cov::{CovEstimate, CovMethod, PairSpec, PairwiseCovariances};
pub use problem::{TestingProblem, Threshold};
