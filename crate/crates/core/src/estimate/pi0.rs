use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pi0Method {
    Storey,
    /// Supplied by the caller.
    Fixed,
}

/// Estimated proportion of true nulls.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Pi0Estimate {
    pub value: f64,
    pub method: Pi0Method,
    /// Tuning parameter of the method (`λ` for Storey).
    pub tuning: f64,
}

impl Pi0Estimate {
    /// A fixed value, e.g. a known null proportion.
    pub fn known(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid("pi0", format!("must lie in [0, 1], got {value}")));
        }
        Ok(Self {
            value,
            method: Pi0Method::Fixed,
            tuning: value,
        })
    }
}

pub const DEFAULT_PI0_LAMBDA: f64 = 0.5;

/// Storey's estimator `min(1, #{p_j > λ} / (p(1 − λ)))`.
pub fn storey_pi0(pvalues: &[f64], lambda: f64) -> Result<Pi0Estimate> {
    if pvalues.is_empty() {
        return Err(Error::invalid("pvalues", "need at least one p-value"));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda", format!("must lie in (0, 1), got {lambda}")));
    }
    if let Some(j) = pvalues.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid(
            "pvalues",
            format!("p-value {} at index {j} is outside [0, 1]", pvalues[j]),
        ));
    }
    let above = pvalues.iter().filter(|&&p| p > lambda).count();
    let value = (above as f64 / (pvalues.len() as f64 * (1.0 - lambda))).min(1.0);
    Ok(Pi0Estimate {
        value,
        method: Pi0Method::Storey,
        tuning: lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn uniform_pvalues_give_one() {
        let mut r = rng::stream(11, &[]);
        let p: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
        let est = storey_pi0(&p, 0.5).unwrap();
        assert!((est.value - 1.0).abs() <= 0.05, "{}", est.value);
    }

    #[test]
    fn zero_pvalues_give_zero() {
        assert_eq!(storey_pi0(&[0.0; 50], 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn mixture_recovers_null_share() {
        let mut r = rng::stream(12, &[]);
        let p: Vec<f64> = (0..10_000)
            .map(|i| if i % 10 == 0 { r.random::<f64>() * 1e-3 } else { r.random::<f64>() })
            .collect();
        let est = storey_pi0(&p, 0.5).unwrap();
        assert!((est.value - 0.9).abs() <= 0.03, "{}", est.value);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(storey_pi0(&[], 0.5).is_err());
        assert!(storey_pi0(&[0.2, 1.2], 0.5).is_err());
        assert!(storey_pi0(&[0.2, f64::NAN], 0.5).is_err());
        assert!(storey_pi0(&[0.2], 0.0).is_err());
        assert!(storey_pi0(&[0.2], 1.0).is_err());
    }
}
