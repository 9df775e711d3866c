//! Synthetic experiments: dependence models, principal-factor deflation,
//! empirical FDP replication and the table driver that compares empirical
//! and asymptotic moments.

mod deflate;
mod fdp;
mod models;
mod table;

pub use deflate::{
    build_sigma, deflate_to_correlation, pfa_deflate, sample_covariance, sorted_eigen, to_correlation,
    DeflationReport, FactorRule, AUTO_TARGET, MAX_AUTO_FACTORS,
};
pub use fdp::{simulate_fdp, ReplicateSummary};
pub use models::{generate_model_z, ModelInstance, ModelKind, SimulationModel};
pub use table::{alternative_mu, table_run, write_csv, ModelSigma, TableArtifact, TableConfig, TableRow, TABLE_COLUMNS};
