//! Classical classifiers over sparse feature vectors: Bernoulli naive Bayes,
//! logistic regression, a linear SVM and gradient-boosted regression trees.
//!
//! Every fitter takes `&[SparseVector]` and `{0,1}` labels and returns an
//! immutable model implementing [`Classifier`]. Predictions are label 1 iff
//! the probability is strictly greater than 0.5.
//!
//! ```
//! use cvdrisk::features::SparseVector;
//! use cvdrisk::linear_models::{fit_lr, Classifier, LrConfig};
//!
//! let x = vec![
//!     SparseVector::from_dense(&[-1.0]).unwrap(),
//!     SparseVector::from_dense(&[1.0]).unwrap(),
//! ];
//! let model = fit_lr(&x, &[0, 1], &LrConfig::default()).unwrap();
//! assert_eq!(model.predict(&x).unwrap(), vec![0, 1]);
//! ```

mod bnb;
mod gbt;
mod lr;
mod svm;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::neural::CnnLstmModel;

pub use bnb::{fit_bnb, BernoulliNbModel};
pub use gbt::{fit_gbt, GbtConfig, GradientBoostedTreesModel, Node, Tree};
pub use lr::{fit_lr, lr_gradient, lr_gradient_check, lr_objective, LogisticRegressionModel, LrConfig};
pub use svm::{fit_svm, from_signed, svm_objective, to_signed, LinearSvmModel, SvmConfig};

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy of a logit against a `{0,1}` label.
pub(crate) fn bce_logit(z: f64, y: u8) -> f64 {
    softplus(z) - f64::from(y) * z
}

pub trait Classifier {
    fn n_features(&self) -> usize;

    /// Probability of class 1 for one row whose dimension is already checked.
    fn proba_unchecked(&self, x: &SparseVector) -> f64;

    fn predict_proba(&self, x: &[SparseVector]) -> Result<Vec<f64>> {
        for row in x {
            check_dim(self.n_features(), row)?;
        }
        Ok(x.iter().map(|r| self.proba_unchecked(r)).collect())
    }

    fn predict(&self, x: &[SparseVector]) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| u8::from(p > 0.5))
            .collect())
    }
}

fn check_dim(expected: usize, row: &SparseVector) -> Result<()> {
    if row.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: row.dim(),
        });
    }
    Ok(())
}

/// Shared validation for the fitters; returns the feature dimension.
pub(crate) fn check_training(x: &[SparseVector], y: &[u8]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.len() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::invalid(format!("label {bad} not in {{0, 1}}")));
    }
    let dim = x[0].dim();
    for row in x {
        check_dim(dim, row)?;
        if row.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
    }
    let ones = y.iter().filter(|&&l| l == 1).count();
    if ones == 0 || ones == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(dim)
}

pub(crate) fn accuracy_of(model: &impl Classifier, x: &[SparseVector], y: &[u8]) -> f64 {
    let hits = x
        .iter()
        .zip(y)
        .filter(|(r, &l)| u8::from(model.proba_unchecked(r) > 0.5) == l)
        .count();
    hits as f64 / y.len() as f64
}

/// Display name and command-line id of each model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Bnb,
    Svm,
    Lr,
    Gbt,
    CnnLstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Bnb,
        ModelKind::Svm,
        ModelKind::Lr,
        ModelKind::Gbt,
        ModelKind::CnnLstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bnb => "BNB",
            ModelKind::Svm => "SVM",
            ModelKind::Lr => "LR",
            ModelKind::Gbt => "GBT",
            ModelKind::CnnLstm => "CNN-LSTM",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Bnb => "bnb",
            ModelKind::Svm => "svm",
            ModelKind::Lr => "lr",
            ModelKind::Gbt => "gbt",
            ModelKind::CnnLstm => "cnn-lstm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.id() == s || k.name().eq_ignore_ascii_case(&s))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Any trained model, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params")]
pub enum Model {
    Bnb(BernoulliNbModel),
    Lr(LogisticRegressionModel),
    Svm(LinearSvmModel),
    Gbt(GradientBoostedTreesModel),
    CnnLstm(CnnLstmModel),
}

#[derive(Serialize, Deserialize)]
struct Container {
    format_version: u32,
    model: Model,
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Bnb(_) => ModelKind::Bnb,
            Model::Lr(_) => ModelKind::Lr,
            Model::Svm(_) => ModelKind::Svm,
            Model::Gbt(_) => ModelKind::Gbt,
            Model::CnnLstm(_) => ModelKind::CnnLstm,
        }
    }

    /// JSON with a format version; floats are written in shortest
    /// round-trip form, so loading reproduces every parameter bit for bit.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Container {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let c: Container = serde_json::from_str(src)?;
        if c.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "model format version {} (expected {MODEL_FORMAT_VERSION})",
                c.format_version
            )));
        }
        Ok(c.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&src)
    }
}
