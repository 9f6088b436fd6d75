//! L2-regularized, L2-loss linear SVM trained by dual coordinate descent.
//!
//! The primal problem is
//!
//! ```text
//! min  ½‖w‖² + ½b² + C Σ_d max(0, 1 − y_d (wᵀx_d − b))²
//! ```
//!
//! The bias enters as the weight of an augmented constant feature, so it is
//! regularized like the other weights. Features are used as given; nothing
//! is rescaled.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Viewpoint;
use crate::error::{Error, Result};
use crate::rng::ChainSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the coordinate visiting order.
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-4,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective after each outer pass; non-increasing.
    #[serde(skip)]
    pub dual_objective_trace: Vec<f64>,
}

impl SvmModel {
    /// wᵀx − b.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Dimension { expected: self.weights.len(), got: x.len() });
        }
        Ok(dot(&self.weights, x) - self.bias)
    }

    /// Sign of the decision value; zero maps to Israeli (+1).
    pub fn predict(&self, x: &[f64]) -> Result<Viewpoint> {
        self.decision_value(x).map(Viewpoint::from_sign)
    }

    /// The learned `(w, b)`.
    pub fn feature_weights(&self) -> (&[f64], f64) {
        (&self.weights, self.bias)
    }

    /// Primal objective of this model on a dataset.
    pub fn primal_objective(&self, features: &[Vec<f64>], labels: &[Viewpoint]) -> f64 {
        primal_objective(&self.weights, self.bias, self.c, features, labels)
    }
}

pub fn primal_objective(w: &[f64], b: f64, c: f64, features: &[Vec<f64>], labels: &[Viewpoint]) -> f64 {
    let reg = 0.5 * (dot(w, w) + b * b);
    let loss: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, y)| {
            let margin = 1.0 - y.sign() * (dot(w, x) - b);
            if margin > 0.0 {
                margin * margin
            } else {
                0.0
            }
        })
        .sum();
    reg + c * loss
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn validate(features: &[Vec<f64>], labels: &[Viewpoint], config: &SvmConfig) -> Result<usize> {
    if !(config.c.is_finite() && config.c > 0.0) {
        return Err(Error::Parameter(format!("C must be positive, got {}", config.c)));
    }
    if !(config.tol.is_finite() && config.tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be positive, got {}", config.tol)));
    }
    if features.len() != labels.len() {
        return Err(Error::Dimension { expected: features.len(), got: labels.len() });
    }
    let dim = features.first().map_or(0, Vec::len);
    for (i, row) in features.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Dimension { expected: dim, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("example {i} has a non-finite feature")));
        }
    }
    let positives = labels.iter().filter(|&&y| y == Viewpoint::Israeli).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Training("training data must contain both labels".into()));
    }
    Ok(dim)
}

/// Train on rows of `features` with aligned `labels`.
pub fn train(features: &[Vec<f64>], labels: &[Viewpoint], config: &SvmConfig) -> Result<SvmModel> {
    let dim = validate(features, labels, config)?;
    let n = features.len();
    let diag = 0.5 / config.c;
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    // ‖x̃_i‖² + D_ii, with x̃ the feature vector plus a constant 1
    let qd: Vec<f64> = features.iter().map(|x| dot(x, x) + 1.0 + diag).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut w_bias = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChainSeed::from(config.seed).rng();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        order.shuffle(&mut rng);
        let mut max_violation: f64 = 0.0;
        for &i in &order {
            let x = &features[i];
            let g = y[i] * (dot(&w, x) + w_bias) - 1.0 + diag * alpha[i];
            let pg = if alpha[i] == 0.0 { g.min(0.0) } else { g };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).max(0.0);
                let step = (alpha[i] - old) * y[i];
                w.iter_mut().zip(x).for_each(|(wj, xj)| *wj += step * xj);
                w_bias += step;
            }
        }
        let a_sum: f64 = alpha.iter().sum();
        let a_sq: f64 = alpha.iter().map(|a| a * a).sum();
        trace.push(0.5 * (dot(&w, &w) + w_bias * w_bias) + 0.5 * diag * a_sq - a_sum);
        if max_violation < config.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("SVM solver stopped at max_iter={} before reaching tol={}", config.max_iter, config.tol);
    }
    Ok(SvmModel {
        weights: w,
        bias: -w_bias,
        c: config.c,
        converged,
        iterations,
        dual_objective_trace: trace,
    })
}
