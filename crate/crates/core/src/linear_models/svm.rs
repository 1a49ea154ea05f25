use serde::{Deserialize, Serialize};

use super::{check_training, sigmoid, Classifier};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    /// Unused by the deterministic full-batch optimizer.
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-3,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    /// Objective of the returned iterate so far: at start, then after each epoch.
    pub loss_trace: Vec<f64>,
    /// Objective of the raw iterate after each epoch.
    pub objective_trace: Vec<f64>,
    pub train_accuracy: f64,
}

pub fn to_signed(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn from_signed(s: f64) -> u8 {
    u8::from(s > 0.0)
}

/// `(lambda / 2) * (|w|^2 + b^2) + mean hinge loss`. The bias is treated as
/// one more weight on a constant feature.
pub fn svm_objective(w: &[f64], b: f64, x: &[SparseVector], y: &[u8], lambda: f64) -> f64 {
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(r, &l)| (1.0 - to_signed(l) * (r.dot(w) + b)).max(0.0))
        .sum();
    let sq = w.iter().map(|v| v * v).sum::<f64>() + b * b;
    0.5 * lambda * sq + hinge / x.len() as f64
}

/// Full-batch Pegasos: step `1 / (lambda t)` along the subgradient, then
/// projection onto the ball of radius `1 / sqrt(lambda)`. The returned
/// parameters are the iterate with the lowest objective seen.
pub fn fit_svm(x: &[SparseVector], y: &[u8], cfg: &SvmConfig) -> Result<LinearSvmModel> {
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {}",
            cfg.lambda
        )));
    }
    let dim = check_training(x, y)?;
    let n = x.len() as f64;
    let lambda = cfg.lambda;
    let radius = 1.0 / lambda.sqrt();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut best = (w.clone(), b, svm_objective(&w, b, x, y, lambda));
    let mut loss_trace = vec![best.2];
    let mut objective_trace = Vec::with_capacity(cfg.epochs);
    let mut gw = vec![0.0; dim];
    for t in 1..=cfg.epochs {
        let eta = 1.0 / (lambda * t as f64);
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for (r, &l) in x.iter().zip(y) {
            let s = to_signed(l);
            if s * (r.dot(&w) + b) < 1.0 {
                for (j, v) in r.iter() {
                    gw[j] += s * v;
                }
                gb += s;
            }
        }
        let shrink = 1.0 - eta * lambda;
        for (wj, g) in w.iter_mut().zip(&gw) {
            *wj = shrink * *wj + eta * g / n;
        }
        b = shrink * b + eta * gb / n;
        let norm = (w.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
        if norm > radius {
            let k = radius / norm;
            w.iter_mut().for_each(|v| *v *= k);
            b *= k;
        }
        let obj = svm_objective(&w, b, x, y, lambda);
        objective_trace.push(obj);
        if obj < best.2 {
            best = (w.clone(), b, obj);
        }
        loss_trace.push(best.2);
    }
    let mut model = LinearSvmModel {
        weights: best.0,
        bias: best.1,
        lambda,
        loss_trace,
        objective_trace,
        train_accuracy: 0.0,
    };
    let hits = x
        .iter()
        .zip(y)
        .filter(|(r, &l)| from_signed(model.decision(r)) == l)
        .count();
    model.train_accuracy = hits as f64 / n;
    Ok(model)
}

impl LinearSvmModel {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn decision_function(&self, x: &[SparseVector]) -> Result<Vec<f64>> {
        for r in x {
            if r.dim() != self.weights.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.weights.len(),
                    found: r.dim(),
                });
            }
        }
        Ok(x.iter().map(|r| self.decision(r)).collect())
    }
}

impl Classifier for LinearSvmModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// Logistic squashing of the decision value; not a calibrated probability.
    fn proba_unchecked(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision(x))
    }

    fn predict(&self, x: &[SparseVector]) -> Result<Vec<u8>> {
        Ok(self.decision_function(x)?.into_iter().map(from_signed).collect())
    }
}
