use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LDA_SWEEPS: usize = 600;
pub const DEFAULT_CORRLDA2_SWEEPS: usize = 2000;

/// Symmetric Dirichlet hyperparameters.
///
/// `alpha`: document-topic, `beta`: topic-topical word, `beta_tilde`:
/// aspect-opinion word, `gamma`: topic-aspect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub beta_tilde: f64,
    pub gamma: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.01,
            beta_tilde: 0.01,
            gamma: 0.01,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("beta_tilde", self.beta_tilde),
            ("gamma", self.gamma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let h = Hyperparams::default();
        assert_eq!((h.alpha, h.beta, h.beta_tilde, h.gamma), (0.1, 0.01, 0.01, 0.01));
        assert!(h.validate().is_ok());
    }

    #[test]
    fn rejects_nonpositive() {
        let h = Hyperparams { gamma: 0.0, ..Default::default() };
        assert!(h.validate().is_err());
        let h = Hyperparams { alpha: f64::NAN, ..Default::default() };
        assert!(h.validate().is_err());
    }
}
