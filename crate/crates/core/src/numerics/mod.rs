//! Special functions and quadrature rules shared by every other module.
//!
//! All functions are pure; precomputed rules ([`SigmaHatLaw`]) are immutable
//! after construction and can be shared across threads.

mod bvn;
mod normal;
mod quadrature;
mod student_t;

pub use bvn::{bvn_cdf, bvn_excess, BvnArgs, BvnExcess};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, FRAC_1_SQRT_2PI};
pub use quadrature::{
    chi_mean, expect_over_sigma_hat, gauss_legendre, gauss_nodes, QuadSpec, SigmaHatLaw,
};
pub use student_t::{t_cdf, t_pdf, t_quantile, t_two_sided_pvalue};
