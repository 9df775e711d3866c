use super::Pi0Estimate;

/// Plug-in noncentralities: the `p̂₁` largest `|T_j|` keep their value,
/// every other coordinate is zero.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MuEstimate {
    pub values: Vec<f64>,
    /// Ascending indices of the nonzero coordinates.
    pub support: Vec<usize>,
    pub p1_hat: usize,
}

/// `p̂₁ = round(p(1 − π̂₀))`; ties in `|T|` go to the lower index.
pub fn estimate_mu(tstats: &[f64], pi0: &Pi0Estimate) -> MuEstimate {
    let p = tstats.len();
    let p1_hat = ((p as f64) * (1.0 - pi0.value)).round().clamp(0.0, p as f64) as usize;
    let mut order: Vec<usize> = (0..p).collect();
    // stable sort keeps ascending indices within ties
    order.sort_by(|&a, &b| tstats[b].abs().total_cmp(&tstats[a].abs()));
    let mut support = order[..p1_hat].to_vec();
    support.sort_unstable();
    let mut values = vec![0.0; p];
    for &j in &support {
        values[j] = tstats[j];
    }
    MuEstimate { values, support, p1_hat }
}
