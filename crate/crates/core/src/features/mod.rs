//! Sparse text features, tabular encoding, and SMOTE balancing.
//!
//! Vocabularies are fitted on training documents only. Binary presence
//! vectors feed Bernoulli naive Bayes; TF-IDF vectors feed the other linear
//! and tree models.

mod cdc;
mod smote;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenStream;

pub use cdc::{cdc_tokens, encode_cdc, is_cvd, CdcRecord, CdcSchema, CDC_FEATURES};
pub use smote::{smote, Resampled, Synthetic};

pub const DEFAULT_MIN_DF: usize = 2;

/// Token index with training-set document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            tokens: v.tokens,
            df: v.df,
            n_docs: v.n_docs,
        }
    }
}

impl TryFrom<VocabRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabRepr) -> Result<Self> {
        if r.tokens.len() != r.df.len() {
            return Err(Error::invalid("vocabulary token and df lengths differ"));
        }
        let index: HashMap<String, usize> =
            r.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != r.tokens.len() {
            return Err(Error::invalid("vocabulary has duplicate tokens"));
        }
        Ok(Vocabulary {
            tokens: r.tokens,
            df: r.df,
            n_docs: r.n_docs,
            index,
        })
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn document_frequency(&self, i: usize) -> usize {
        self.df[i]
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Smoothed inverse document frequency, `ln((1+n)/(1+df)) + 1`.
    pub fn idf(&self, i: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.df[i] as f64)).ln() + 1.0
    }
}

/// Builds a vocabulary from training documents, keeping tokens that occur in
/// at least `min_df` documents. Indices follow first occurrence.
pub fn build_vocab(train_docs: &[TokenStream], min_df: usize) -> Result<Vocabulary> {
    if train_docs.is_empty() {
        return Err(Error::Empty("training document list"));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut placed: HashSet<&str> = HashSet::new();
    let mut df_of: HashMap<&str, usize> = HashMap::new();
    for doc in train_docs {
        let mut seen: Vec<&str> = doc.iter().collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df_of.entry(t).or_insert(0) += 1;
        }
        for t in doc.iter() {
            if placed.insert(t) {
                order.push(t);
            }
        }
    }
    let mut tokens = Vec::new();
    let mut df = Vec::new();
    let mut index = HashMap::new();
    for t in order {
        let c = df_of[t];
        if c >= min_df.max(1) {
            index.insert(t.to_string(), tokens.len());
            tokens.push(t.to_string());
            df.push(c);
        }
    }
    if tokens.is_empty() {
        return Err(Error::Empty("vocabulary after min_df filtering"));
    }
    Ok(Vocabulary {
        tokens,
        df,
        n_docs: train_docs.len(),
        index,
    })
}

/// A sparse real vector with strictly increasing indices and no explicit
/// zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev = None;
        for &(i, v) in &entries {
            if i >= dim || prev.is_some_and(|p| p >= i) {
                return Err(Error::invalid(format!("bad sparse index {i} (dim {dim})")));
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature);
            }
            if v == 0.0 {
                return Err(Error::invalid("explicit zero in sparse vector"));
            }
            prev = Some(i);
        }
        Ok(SparseVector { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            entries: Vec::new(),
        }
    }

    /// Drops zeros; fails on non-finite values.
    pub fn from_dense(x: &[f64]) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
        let entries = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Ok(SparseVector {
            dim: x.len(),
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries
            .binary_search_by_key(&i, |e| e.0)
            .map_or(0.0, |k| self.entries[k].1)
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| w[i] * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

fn counts(ts: &TokenStream, vocab: &Vocabulary) -> Vec<(usize, f64)> {
    let mut idx: Vec<usize> = ts.iter().filter_map(|t| vocab.get(t)).collect();
    idx.sort_unstable();
    let mut out: Vec<(usize, f64)> = Vec::new();
    for i in idx {
        match out.last_mut() {
            Some((j, c)) if *j == i => *c += 1.0,
            _ => out.push((i, 1.0)),
        }
    }
    out
}

/// 1.0 at every in-vocabulary token present; out-of-vocabulary tokens are
/// ignored.
pub fn vectorize_binary(ts: &TokenStream, vocab: &Vocabulary) -> SparseVector {
    let entries = counts(ts, vocab).into_iter().map(|(i, _)| (i, 1.0)).collect();
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}

/// Raw-count tf times training idf, L2-normalized when nonzero.
pub fn vectorize_tfidf_one(ts: &TokenStream, vocab: &Vocabulary) -> SparseVector {
    let mut entries: Vec<(usize, f64)> = counts(ts, vocab)
        .into_iter()
        .map(|(i, c)| (i, c * vocab.idf(i)))
        .collect();
    let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in &mut entries {
            e.1 /= norm;
        }
    }
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}

pub fn vectorize_tfidf(docs: &[TokenStream], vocab: &Vocabulary) -> Vec<SparseVector> {
    docs.iter().map(|d| vectorize_tfidf_one(d, vocab)).collect()
}
