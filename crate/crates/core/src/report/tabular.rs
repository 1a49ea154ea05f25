use std::collections::BTreeMap;

use super::config::ExperimentConfig;
use super::Prepared;
use crate::corpus::{Record, State};
use crate::error::Result;
use crate::features::{
    build_vocab, cdc_tokens, encode_cdc, smote, vectorize_binary, CdcRecord, CdcSchema, SparseVector,
};
use crate::neural::encode_sequence;
use crate::textprep::TokenStream;

/// Sequence length of a tokenized demographic row: one token per field.
pub const CDC_SEQ_LEN: usize = 5;

/// A demographic record with a stable id, so it can be split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdcRow {
    pub id: String,
    pub record: CdcRecord,
}

impl Record for CdcRow {
    fn id(&self) -> &str {
        &self.id
    }

    fn label(&self) -> Option<u8> {
        Some(self.record.target)
    }
}

/// Ids are `r` plus the 1-based row position.
pub fn index_rows(records: &[CdcRecord]) -> Vec<CdcRow> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| CdcRow {
            id: format!("r{:06}", i + 1),
            record: r.clone(),
        })
        .collect()
}

/// Fraction of records with target 1, per state present.
pub fn actual_rates(records: &[CdcRecord]) -> BTreeMap<State, f64> {
    let mut tally: BTreeMap<State, (usize, usize)> = BTreeMap::new();
    for r in records {
        let t = tally.entry(r.state).or_default();
        t.0 += usize::from(r.target == 1);
        t.1 += 1;
    }
    tally
        .into_iter()
        .map(|(s, (pos, n))| (s, pos as f64 / n as f64))
        .collect()
}

/// Column means and standard deviations; constant columns get scale 1.
fn standardizer(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let dim = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut sd = vec![0.0; dim];
    for r in rows {
        for ((s, v), m) in sd.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    for s in &mut sd {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    (mean, sd)
}

fn scale(rows: &[Vec<f64>], mean: &[f64], sd: &[f64]) -> Result<Vec<SparseVector>> {
    rows.iter()
        .map(|r| {
            let z: Vec<f64> = r
                .iter()
                .zip(mean.iter().zip(sd))
                .map(|(v, (m, s))| (v - m) / s)
                .collect();
            SparseVector::from_dense(&z)
        })
        .collect()
}

/// Fits the schema on the training rows, encodes both partitions, balances
/// the training partition with SMOTE and builds each model's inputs. The
/// test partition is encoded but never resampled.
pub fn prepare_cdc(cfg: &ExperimentConfig, train: &[&CdcRow], test: &[&CdcRow]) -> Result<Prepared> {
    let train_records: Vec<CdcRecord> = train.iter().map(|r| r.record.clone()).collect();
    let schema = CdcSchema::fit(&train_records);
    let encode = |rows: &[&CdcRow]| -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|r| encode_cdc(&r.record, &schema))
            .collect::<Result<_>>()
            .map_err(|e| e.at_stage("encode"))
    };
    let x_train = encode(train)?;
    let x_test = encode(test)?;
    let y_train: Vec<u8> = train.iter().map(|r| r.record.target).collect();
    let balanced = smote(&x_train, &y_train, cfg.smote_k, cfg.seed).map_err(|e| e.at_stage("smote"))?;

    let (mean, sd) = standardizer(&balanced.x);
    let train_tokens: Vec<TokenStream> = balanced.x.iter().map(|x| cdc_tokens(x)).collect();
    let test_tokens: Vec<TokenStream> = x_test.iter().map(|x| cdc_tokens(x)).collect();
    let vocab = build_vocab(&train_tokens, 1)?;
    let binary = |docs: &[TokenStream]| docs.iter().map(|d| vectorize_binary(d, &vocab)).collect();
    let seqs = |docs: &[TokenStream]| {
        docs.iter()
            .map(|d| encode_sequence(d, &vocab, CDC_SEQ_LEN))
            .collect()
    };
    Ok(Prepared {
        train_binary: binary(&train_tokens),
        test_binary: binary(&test_tokens),
        train_dense: scale(&balanced.x, &mean, &sd)?,
        test_dense: scale(&x_test, &mean, &sd)?,
        train_seqs: seqs(&train_tokens),
        test_seqs: seqs(&test_tokens),
        train_y: balanced.y,
        test_y: test.iter().map(|r| r.record.target).collect(),
        test_states: test.iter().map(|r| r.record.state).collect(),
        seq_len: CDC_SEQ_LEN,
        vocab,
        synthetic_rows: balanced.synthetic.len(),
    })
}
