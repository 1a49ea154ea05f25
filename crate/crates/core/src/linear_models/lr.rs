use serde::{Deserialize, Serialize};

use super::{accuracy_of, bce_logit, check_training, sigmoid, Classifier};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Unused by the deterministic full-batch optimizer; kept so every
    /// fitter takes a seed.
    pub seed: u64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            learning_rate: 0.1,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegressionModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
    /// Regularized training loss before the first step and after each epoch.
    pub loss_trace: Vec<f64>,
    pub train_accuracy: f64,
}

/// Mean binary cross-entropy plus `(l2 / 2) * |w|^2`. The bias is not
/// penalized.
pub fn lr_objective(w: &[f64], b: f64, x: &[SparseVector], y: &[u8], l2: f64) -> f64 {
    let data: f64 = x.iter().zip(y).map(|(r, &l)| bce_logit(r.dot(w) + b, l)).sum();
    data / x.len() as f64 + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of [`lr_objective`] with respect to `(w, b)`.
pub fn lr_gradient(w: &[f64], b: f64, x: &[SparseVector], y: &[u8], l2: f64) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|v| l2 * v).collect();
    let mut gb = 0.0;
    for (r, &l) in x.iter().zip(y) {
        let e = (sigmoid(r.dot(w) + b) - f64::from(l)) / n;
        gb += e;
        for (j, v) in r.iter() {
            gw[j] += e * v;
        }
    }
    (gw, gb)
}

/// Largest relative error between [`lr_gradient`] and central differences
/// with step `h`, over every weight and the bias.
pub fn lr_gradient_check(w: &[f64], b: f64, x: &[SparseVector], y: &[u8], l2: f64, h: f64) -> f64 {
    let (gw, gb) = lr_gradient(w, b, x, y, l2);
    let mut worst: f64 = 0.0;
    let mut wp = w.to_vec();
    for j in 0..w.len() {
        wp[j] = w[j] + h;
        let up = lr_objective(&wp, b, x, y, l2);
        wp[j] = w[j] - h;
        let down = lr_objective(&wp, b, x, y, l2);
        wp[j] = w[j];
        worst = worst.max(relative_error(gw[j], (up - down) / (2.0 * h)));
    }
    let up = lr_objective(w, b + h, x, y, l2);
    let down = lr_objective(w, b - h, x, y, l2);
    worst.max(relative_error(gb, (up - down) / (2.0 * h)))
}

pub(crate) fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Full-batch gradient descent from zero weights. A step that would raise
/// the loss is halved until it does not, so the trace never increases.
pub fn fit_lr(x: &[SparseVector], y: &[u8], cfg: &LrConfig) -> Result<LogisticRegressionModel> {
    if !(cfg.learning_rate >= 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be finite and non-negative"));
    }
    if !(cfg.l2 >= 0.0 && cfg.l2.is_finite()) {
        return Err(Error::invalid("l2 must be finite and non-negative"));
    }
    let dim = check_training(x, y)?;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut loss = lr_objective(&w, b, x, y, cfg.l2);
    let mut trace = vec![loss];
    let mut trial = vec![0.0; dim];
    for _ in 0..cfg.epochs {
        let (gw, gb) = lr_gradient(&w, b, x, y, cfg.l2);
        let mut step = cfg.learning_rate;
        for _ in 0..60 {
            for ((t, wj), g) in trial.iter_mut().zip(&w).zip(&gw) {
                *t = wj - step * g;
            }
            let tb = b - step * gb;
            let next = lr_objective(&trial, tb, x, y, cfg.l2);
            if next <= loss {
                std::mem::swap(&mut w, &mut trial);
                b = tb;
                loss = next;
                break;
            }
            step *= 0.5;
        }
        trace.push(loss);
    }
    let mut model = LogisticRegressionModel {
        weights: w,
        bias: b,
        l2: cfg.l2,
        loss_trace: trace,
        train_accuracy: 0.0,
    };
    model.train_accuracy = accuracy_of(&model, x, y);
    Ok(model)
}

impl LogisticRegressionModel {
    pub fn logit(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

impl Classifier for LogisticRegressionModel {
    fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn proba_unchecked(&self, x: &SparseVector) -> f64 {
        sigmoid(self.logit(x))
    }
}
