//! Confusion matrices and the six evaluation metrics: accuracy, precision,
//! recall, F1, Matthews correlation and Cohen's kappa.
//!
//! Precision, recall and F1 are computed for the positive class (label 1).
//! Any zero denominator yields 0.0.
//!
//! ```
//! use cvdrisk::metrics::{confusion, evaluate};
//!
//! let cm = confusion(&[1, 0, 1, 1], &[1, 0, 0, 1]).unwrap();
//! let m = evaluate(&cm).unwrap();
//! assert_eq!(m.accuracy, 0.75);
//! assert_eq!(m.precision, 1.0);
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Tallies (true, predicted) label pairs.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Empty("label vector"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => return Err(Error::invalid(format!("label pair ({t}, {p}) not binary"))),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub kappa: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn evaluate(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let n = cm.total() as f64;
    if n == 0.0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let accuracy = (tp + tn) / n;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    let mcc = ratio(
        tp * tn - fp * fn_,
        ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt(),
    );
    let p_e = ((tp + fp) * (tp + fn_) + (fn_ + tn) * (fp + tn)) / (n * n);
    let kappa = ratio(accuracy - p_e, 1.0 - p_e);
    Ok(MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        mcc,
        kappa,
    })
}

pub const TABLE_HEADER: [&str; 7] = ["Model", "Test Accuracy", "Precision", "Recall", "F1", "MCC", "CK"];

/// Two-decimal fixed rendering, rounding half away from zero on the
/// decimal value rather than its binary approximation.
pub fn fixed2(x: f64) -> String {
    let scaled = (x * 100.0 * 1e6).round() / 1e6;
    let r = scaled.round() / 100.0;
    let s = format!("{r:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Accuracy as a percentage with two decimals, e.g. `88.75%`.
pub fn percent2(x: f64) -> String {
    format!("{}%", fixed2(x * 100.0))
}

/// Metric rows in display order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    rows: Vec<(String, MetricsReport)>,
}

pub fn metrics_table<S: AsRef<str>>(rows: &[(S, MetricsReport)]) -> Result<MetricsTable> {
    if rows.is_empty() {
        return Err(Error::Empty("metrics table"));
    }
    Ok(MetricsTable {
        rows: rows
            .iter()
            .map(|(name, m)| (name.as_ref().to_string(), *m))
            .collect(),
    })
}

impl MetricsTable {
    pub fn rows(&self) -> &[(String, MetricsReport)] {
        &self.rows
    }

    /// Display cells per row, without the header.
    pub fn cells(&self) -> Vec<[String; 7]> {
        self.rows
            .iter()
            .map(|(name, m)| {
                [
                    name.clone(),
                    percent2(m.accuracy),
                    fixed2(m.precision),
                    fixed2(m.recall),
                    fixed2(m.f1),
                    fixed2(m.mcc),
                    fixed2(m.kappa),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TABLE_HEADER).expect("in-memory write");
        for row in self.cells() {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Left-aligned model column, right-aligned numbers, a dashed rule under
    /// the header, and a footnote on the zero-denominator convention.
    pub fn to_text(&self) -> String {
        let cells = self.cells();
        let mut widths = TABLE_HEADER.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: &[String]| {
            let mut s = String::new();
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(s, "{c:<w$}");
                } else {
                    let _ = write!(s, "  {c:>w$}");
                }
            }
            s.push('\n');
            s
        };
        let header: Vec<String> = TABLE_HEADER.iter().map(|h| h.to_string()).collect();
        let mut out = line(&header);
        let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
        out.push_str(&"-".repeat(rule));
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row));
        }
        out.push_str("\nPrecision, recall and F1 are for class 1. Zero denominators are reported as 0.00.\n");
        out
    }
}
