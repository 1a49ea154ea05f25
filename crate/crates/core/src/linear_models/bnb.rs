use serde::{Deserialize, Serialize};

use super::{accuracy_of, check_training, sigmoid, Classifier};
use crate::error::{Error, Result};
use crate::features::SparseVector;

/// Bernoulli naive Bayes over feature presence. Any nonzero value counts as
/// present. All probabilities are stored as logs, indexed by class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNbModel {
    pub alpha: f64,
    pub n_features: usize,
    pub log_prior: [f64; 2],
    pub log_p1: [Vec<f64>; 2],
    pub log_p0: [Vec<f64>; 2],
    sum_log_p0: [f64; 2],
    pub train_accuracy: f64,
}

/// Closed-form fit: `P(f=1 | c) = (count + alpha) / (n_c + 2 alpha)`.
pub fn fit_bnb(x: &[SparseVector], y: &[u8], alpha: f64) -> Result<BernoulliNbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let dim = check_training(x, y)?;
    let mut n = [0usize; 2];
    let mut counts = [vec![0usize; dim], vec![0usize; dim]];
    for (row, &label) in x.iter().zip(y) {
        let c = usize::from(label);
        n[c] += 1;
        for (j, v) in row.iter() {
            if v != 0.0 {
                counts[c][j] += 1;
            }
        }
    }
    let total = y.len() as f64;
    let mut log_p1 = [Vec::new(), Vec::new()];
    let mut log_p0 = [Vec::new(), Vec::new()];
    let mut sum_log_p0 = [0.0; 2];
    for c in 0..2 {
        let denom = n[c] as f64 + 2.0 * alpha;
        for &k in &counts[c] {
            let p = (k as f64 + alpha) / denom;
            log_p1[c].push(p.ln());
            log_p0[c].push((-p).ln_1p());
        }
        sum_log_p0[c] = log_p0[c].iter().sum();
    }
    let mut model = BernoulliNbModel {
        alpha,
        n_features: dim,
        log_prior: [(n[0] as f64 / total).ln(), (n[1] as f64 / total).ln()],
        log_p1,
        log_p0,
        sum_log_p0,
        train_accuracy: 0.0,
    };
    model.train_accuracy = accuracy_of(&model, x, y);
    Ok(model)
}

impl BernoulliNbModel {
    /// Joint log-likelihood `log P(c) + log P(x | c)` for both classes.
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> [f64; 2] {
        let mut jll = [0.0; 2];
        for (c, out) in jll.iter_mut().enumerate() {
            let mut s = self.log_prior[c] + self.sum_log_p0[c];
            for (j, v) in x.iter() {
                if v != 0.0 {
                    s += self.log_p1[c][j] - self.log_p0[c][j];
                }
            }
            *out = s;
        }
        jll
    }
}

impl Classifier for BernoulliNbModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba_unchecked(&self, x: &SparseVector) -> f64 {
        let [j0, j1] = self.joint_log_likelihood(x);
        sigmoid(j1 - j0)
    }
}
