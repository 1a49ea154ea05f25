use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{backward, forward};
use super::CnnLstmModel;
use crate::error::{Error, Result};
use crate::linear_models::{bce_logit, sigmoid};

/// Update rule applied to the clipped mini-batch gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    /// Adam with beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub clip_norm: f64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 8,
            learning_rate: 0.01,
            batch_size: 16,
            seed: 0,
            clip_norm: 5.0,
            optimizer: Optimizer::Adam,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch size must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and non-negative"));
        }
        if !(self.clip_norm > 0.0 && self.clip_norm.is_finite()) {
            return Err(Error::invalid("clip norm must be finite and positive"));
        }
        Ok(())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// `params` and `grad` are aligned suffixes of the full vectors.
    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        let off = self.m.len() - params.len();
        for (k, (p, g)) in params.iter_mut().zip(grad).enumerate() {
            let m = &mut self.m[off + k];
            let v = &mut self.v[off + k];
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// Mean binary cross-entropy of the model over a dataset, summed in order.
pub fn mean_loss(model: &CnnLstmModel, seqs: &[Vec<usize>], labels: &[u8]) -> f64 {
    let total: f64 = seqs
        .iter()
        .zip(labels)
        .map(|(s, &y)| bce_logit(forward(model, s).logit, y))
        .sum();
    total / seqs.len() as f64
}

/// Mini-batch gradient descent with a seeded shuffle each epoch and
/// global-norm gradient clipping. Returns the trained model and the
/// full-dataset loss after each epoch.
pub fn fit(
    model: &CnnLstmModel,
    seqs: &[Vec<usize>],
    labels: &[u8],
    cfg: &TrainConfig,
) -> Result<(CnnLstmModel, Vec<f64>)> {
    cfg.validate()?;
    if seqs.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if seqs.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} sequences but {} labels",
            seqs.len(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::invalid(format!("label {bad} not in {{0, 1}}")));
    }
    for s in seqs {
        model.check_ids(s)?;
    }

    let mut model = model.clone();
    let pad_row = model.shape.embed;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    let mut grad = vec![0.0; model.params.len()];
    let mut adam = Adam::new(grad.len());
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut loss = 0.0;
            for &i in batch {
                let pass = forward(&model, &seqs[i]);
                loss += bce_logit(pass.logit, labels[i]);
                let dlogit = (sigmoid(pass.logit) - f64::from(labels[i])) * scale;
                backward(&model, &seqs[i], &pass, dlogit, &mut grad);
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !loss.is_finite() || !norm.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b + 1 });
            }
            let clip = if norm > cfg.clip_norm {
                cfg.clip_norm / norm
            } else {
                1.0
            };
            grad.iter_mut().for_each(|g| *g *= clip);
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in model.params.iter_mut().zip(&grad).skip(pad_row) {
                        *p -= cfg.learning_rate * g;
                    }
                }
                Optimizer::Adam => {
                    adam.step(&mut model.params[pad_row..], &grad[pad_row..], cfg.learning_rate)
                }
            }
        }
        let loss = mean_loss(&model, seqs, labels);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: order.len().div_ceil(cfg.batch_size),
            });
        }
        trace.push(loss);
    }
    Ok((model, trace))
}

/// Largest relative error `|a - n| / max(|a| + |n|, 1e-8)` between the
/// analytic loss gradient and central differences with step `h`.
///
/// The numeric gradient differences the logit and multiplies by the exact
/// loss derivative `p - y`. Differencing the loss itself (about 0.7) loses
/// roughly an order of magnitude more to rounding, which swamps the tiny
/// recurrent-weight gradients of a freshly initialized network.
///
/// Up to 200 coordinates per tensor are checked (all of them for smaller
/// tensors). The padding embedding row is not a parameter and is skipped, as
/// are coordinates whose perturbation flips a ReLU or a pooling winner,
/// where the loss is not differentiable.
pub fn gradient_check(model: &CnnLstmModel, ids: &[usize], label: u8, h: f64) -> Result<f64> {
    model.check_ids(ids)?;
    if label > 1 {
        return Err(Error::invalid(format!("label {label} not in {{0, 1}}")));
    }
    let pass = forward(model, ids);
    let mut grad = vec![0.0; model.params.len()];
    let dloss = sigmoid(pass.logit) - f64::from(label);
    backward(model, ids, &pass, dloss, &mut grad);
    let pattern = pass.pattern();

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (name, range) in model.shape.layout().tensors() {
        let start = if name == "embedding" {
            range.start + model.shape.embed
        } else {
            range.start
        };
        let len = range.end - start;
        let coords: Vec<usize> = if len <= 200 {
            (start..range.end).collect()
        } else {
            rand::seq::index::sample(&mut rng, len, 200)
                .into_iter()
                .map(|k| start + k)
                .collect()
        };
        for i in coords {
            let orig = probe.params[i];
            probe.params[i] = orig + h;
            let up = forward(&probe, ids);
            probe.params[i] = orig - h;
            let down = forward(&probe, ids);
            probe.params[i] = orig;
            if up.pattern() != pattern || down.pattern() != pattern {
                continue;
            }
            let numeric = dloss * (up.logit - down.logit) / (2.0 * h);
            let err = (grad[i] - numeric).abs() / (grad[i].abs() + numeric.abs()).max(1e-8);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Shape;

    #[test]
    fn fresh_small_model_passes_gradient_check() {
        for seed in 0..20 {
            let m = CnnLstmModel::init(Shape::small(20), seed);
            let err = gradient_check(&m, &[5, 1, 19, 7, 0, 0], (seed % 2) as u8, 1e-5).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn dense_bias_gradient_is_exact() {
        let m = CnnLstmModel::init(Shape::small(20), 11);
        let ids = [3, 4, 5, 6, 7, 8];
        let pass = forward(&m, &ids);
        let mut grad = vec![0.0; m.params.len()];
        backward(&m, &ids, &pass, sigmoid(pass.logit) - 1.0, &mut grad);
        let b = m.shape.layout().dense_bias.start;
        let mut probe = m.clone();
        let h = 1e-5;
        probe.params[b] += h;
        let up = bce_logit(forward(&probe, &ids).logit, 1);
        probe.params[b] -= 2.0 * h;
        let down = bce_logit(forward(&probe, &ids).logit, 1);
        assert!((grad[b] - (up - down) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let m = CnnLstmModel::init(Shape::small(20), 2);
        let seqs = vec![vec![2, 3, 0, 0, 0, 0], vec![4, 5, 6, 0, 0, 0]];
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 3,
            ..TrainConfig::default()
        };
        let (trained, trace) = fit(&m, &seqs, &[0, 1], &cfg).unwrap();
        assert_eq!(trained, m);
        assert!(trace.iter().all(|l| *l == trace[0]));
    }

    #[test]
    fn rejects_bad_config() {
        let m = CnnLstmModel::init(Shape::small(20), 2);
        let seqs = vec![vec![2, 3, 0, 0, 0, 0]];
        for cfg in [
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                clip_norm: f64::INFINITY,
                ..TrainConfig::default()
            },
        ] {
            assert!(fit(&m, &seqs, &[1], &cfg).is_err());
        }
        assert!(fit(&m, &[], &[], &TrainConfig::default()).is_err());
    }
}
