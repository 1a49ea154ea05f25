//! CNN-LSTM text classifier with hand-written forward and backward passes.
//!
//! Layers: embedding, 1-D convolution with "same" padding and ReLU, max-pool
//! (window 2, stride 2), an LSTM over the pooled sequence, and a dense
//! sigmoid output on the final hidden state. Token id 0 is padding and id 1
//! stands for any out-of-vocabulary token.
//!
//! ```
//! use cvdrisk::neural::{CnnLstmModel, Shape};
//!
//! let model = CnnLstmModel::init(Shape::small(20), 7);
//! let p = model.forward(&[2, 3, 4, 0, 0, 0]).unwrap();
//! assert!(p > 0.0 && p < 1.0);
//! ```

mod net;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::textprep::TokenStream;

pub use train::{fit, gradient_check, mean_loss, Optimizer, TrainConfig};

pub const PAD_ID: usize = 0;
pub const OOV_ID: usize = 1;
pub const DEFAULT_SEQ_LEN: usize = 50;

/// Layer sizes. `vocab` counts the padding and out-of-vocabulary ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub vocab: usize,
    pub embed: usize,
    pub filters: usize,
    pub width: usize,
    pub hidden: usize,
    pub seq_len: usize,
}

impl Shape {
    /// Default sizes for a vocabulary of `n_tokens` real tokens.
    pub fn for_vocabulary(n_tokens: usize) -> Self {
        Shape {
            vocab: n_tokens + 2,
            embed: 32,
            filters: 32,
            width: 3,
            hidden: 32,
            seq_len: DEFAULT_SEQ_LEN,
        }
    }

    /// The reduced shape used for gradient checking.
    pub fn small(vocab: usize) -> Self {
        Shape {
            vocab,
            embed: 4,
            filters: 3,
            width: 2,
            hidden: 4,
            seq_len: 6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.vocab < 2 || [self.embed, self.filters, self.width, self.hidden, self.seq_len].contains(&0) {
            return Err(Error::invalid(format!("degenerate network shape {self:?}")));
        }
        Ok(())
    }

    pub(crate) fn layout(&self) -> Layout {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let g = 4 * self.hidden;
        Layout {
            embedding: take(self.vocab * self.embed),
            conv_weight: take(self.filters * self.width * self.embed),
            conv_bias: take(self.filters),
            lstm_input: take(g * self.filters),
            lstm_recurrent: take(g * self.hidden),
            lstm_bias: take(g),
            dense_weight: take(self.hidden),
            dense_bias: take(1),
        }
    }

    pub fn n_params(&self) -> usize {
        self.layout().dense_bias.end
    }
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub embedding: std::ops::Range<usize>,
    pub conv_weight: std::ops::Range<usize>,
    pub conv_bias: std::ops::Range<usize>,
    pub lstm_input: std::ops::Range<usize>,
    pub lstm_recurrent: std::ops::Range<usize>,
    pub lstm_bias: std::ops::Range<usize>,
    pub dense_weight: std::ops::Range<usize>,
    pub dense_bias: std::ops::Range<usize>,
}

impl Layout {
    pub fn tensors(&self) -> [(&'static str, std::ops::Range<usize>); 8] {
        [
            ("embedding", self.embedding.clone()),
            ("conv_weight", self.conv_weight.clone()),
            ("conv_bias", self.conv_bias.clone()),
            ("lstm_input", self.lstm_input.clone()),
            ("lstm_recurrent", self.lstm_recurrent.clone()),
            ("lstm_bias", self.lstm_bias.clone()),
            ("dense_weight", self.dense_weight.clone()),
            ("dense_bias", self.dense_bias.clone()),
        ]
    }
}

#[derive(Deserialize)]
struct ModelRepr {
    shape: Shape,
    params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr")]
pub struct CnnLstmModel {
    shape: Shape,
    params: Vec<f64>,
}

impl TryFrom<ModelRepr> for CnnLstmModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        CnnLstmModel::from_params(r.shape, r.params)
    }
}

impl CnnLstmModel {
    /// Every parameter uniform in `[-0.05, 0.05]`, except the padding
    /// embedding row, which is zero.
    pub fn init(shape: Shape, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut params: Vec<f64> = (0..shape.n_params())
            .map(|_| rng.gen_range(-0.05..=0.05))
            .collect();
        params[..shape.embed].iter_mut().for_each(|p| *p = 0.0);
        CnnLstmModel { shape, params }
    }

    pub fn from_params(shape: Shape, params: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if params.len() != shape.n_params() {
            return Err(Error::DimensionMismatch {
                expected: shape.n_params(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite network parameter"));
        }
        if params[..shape.embed].iter().any(|p| *p != 0.0) {
            return Err(Error::invalid("padding embedding must be zero"));
        }
        Ok(CnnLstmModel { shape, params })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub(crate) fn check_ids(&self, ids: &[usize]) -> Result<()> {
        if ids.len() != self.shape.seq_len {
            return Err(Error::DimensionMismatch {
                expected: self.shape.seq_len,
                found: ids.len(),
            });
        }
        if let Some(&id) = ids.iter().find(|&&id| id >= self.shape.vocab) {
            return Err(Error::TokenOutOfRange {
                id,
                size: self.shape.vocab,
            });
        }
        Ok(())
    }

    /// Probability of class 1 for one encoded sequence.
    pub fn forward(&self, ids: &[usize]) -> Result<f64> {
        self.check_ids(ids)?;
        Ok(crate::linear_models::sigmoid(net::forward(self, ids).logit))
    }

    pub fn predict_proba(&self, seqs: &[Vec<usize>]) -> Result<Vec<f64>> {
        seqs.iter().map(|s| self.forward(s)).collect()
    }

    pub fn predict(&self, seqs: &[Vec<usize>]) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(seqs)?
            .into_iter()
            .map(|p| u8::from(p > 0.5))
            .collect())
    }
}

/// Maps tokens to ids (`vocab index + 2`, or [`OOV_ID`]), truncates to `len`
/// and right-pads with [`PAD_ID`].
pub fn encode_sequence(ts: &TokenStream, vocab: &Vocabulary, len: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = ts
        .iter()
        .take(len)
        .map(|t| vocab.get(t).map_or(OOV_ID, |i| i + 2))
        .collect();
    ids.resize(len, PAD_ID);
    ids
}
