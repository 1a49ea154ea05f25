use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything with a stable id that can be split into train and test sets.
pub trait Record {
    fn id(&self) -> &str;

    /// Class label used by stratified splitting.
    fn label(&self) -> Option<u8> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratify: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            train_fraction: 0.70,
            seed: 0,
            stratify: false,
        }
    }
}

/// A train/test partition of record ids. Both lists keep dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub seed: u64,
    pub train_fraction: f64,
}

impl CorpusSplit {
    /// Returns (train, test) references in dataset order. Records whose id is
    /// in neither list are ignored.
    pub fn partition<'a, R: Record>(&self, records: &'a [R]) -> (Vec<&'a R>, Vec<&'a R>) {
        let train: HashSet<&str> = self.train_ids.iter().map(String::as_str).collect();
        let test: HashSet<&str> = self.test_ids.iter().map(String::as_str).collect();
        let mut a = Vec::with_capacity(train.len());
        let mut b = Vec::with_capacity(test.len());
        for r in records {
            if train.contains(r.id()) {
                a.push(r);
            } else if test.contains(r.id()) {
                b.push(r);
            }
        }
        (a, b)
    }

    pub fn len(&self) -> usize {
        self.train_ids.len() + self.test_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// floor(fraction * n), tolerant of the representation error in fractions
/// such as 0.7.
fn floor_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

/// Splits `records` into train and test ids.
///
/// The train set has exactly `floor(train_fraction * n)` members. With
/// `stratify` on, each class receives `floor(f * n_c)` train members and the
/// remaining slots go to the classes with the largest fractional remainders,
/// so every class is within one member of its proportional share.
pub fn split<R: Record>(records: &[R], opts: &SplitOptions) -> Result<CorpusSplit> {
    let n = records.len();
    if n < 2 {
        return Err(Error::invalid(format!("cannot split {n} record(s)")));
    }
    let f = opts.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::invalid(format!("train fraction {f} not in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n_train = floor_count(f, n);
    let mut is_train = vec![false; n];

    if opts.stratify {
        let mut classes: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            let label = r
                .label()
                .ok_or_else(|| Error::invalid("stratified split needs labeled records"))?;
            classes.entry(label).or_default().push(i);
        }
        let mut quotas: Vec<(u8, usize, f64)> = classes
            .iter()
            .map(|(&c, members)| {
                let exact = f * members.len() as f64;
                let base = floor_count(f, members.len());
                (c, base, exact - base as f64)
            })
            .collect();
        let assigned: usize = quotas.iter().map(|q| q.1).sum();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            quotas[b]
                .2
                .partial_cmp(&quotas[a].2)
                .unwrap()
                .then(quotas[a].0.cmp(&quotas[b].0))
        });
        for &k in order.iter().take(n_train.saturating_sub(assigned)) {
            quotas[k].1 += 1;
        }
        for (c, quota, _) in quotas {
            let mut members = classes[&c].clone();
            members.shuffle(&mut rng);
            for &i in members.iter().take(quota) {
                is_train[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            is_train[i] = true;
        }
    }

    let mut train_ids = Vec::with_capacity(n_train);
    let mut test_ids = Vec::with_capacity(n - n_train);
    for (r, t) in records.iter().zip(is_train) {
        if t {
            train_ids.push(r.id().to_string());
        } else {
            test_ids.push(r.id().to_string());
        }
    }
    Ok(CorpusSplit {
        train_ids,
        test_ids,
        seed: opts.seed,
        train_fraction: f,
    })
}
