//! End-to-end experiment orchestration: the text branch (keyword filter,
//! sentiment labels, classifiers), the demographic branch (encoding, SMOTE,
//! classifiers), per-state comparisons and prevalence ratios, and the files
//! written for them.
//!
//! ```no_run
//! use cvdrisk::report::{emit, run, ExperimentConfig};
//!
//! let mut cfg = ExperimentConfig::default();
//! cfg.posts = Some("posts.csv".into());
//! cfg.cdc = Some("cdc.csv".into());
//! let report = run(&cfg).unwrap();
//! emit(&report, &cfg.out).unwrap();
//! ```

mod config;
mod emit;
mod tabular;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{parse_models, EvalMode, ExperimentConfig, LabelUnit, NeuralConfig, CONFIG_KEYS};
pub use emit::{accuracy_svg, emit, metrics_csv, metrics_text, ratio_svg, ratios_csv, state_label};
pub use tabular::{actual_rates, index_rows, prepare_cdc, CdcRow, CDC_SEQ_LEN};
pub use text::{label_posts, labels_csv, prepare_text, read_corpus, LabeledPost, TextData, TextResources};

use crate::corpus::{load_cdc, split, CorpusSplit, Record, SplitOptions, State};
use crate::error::{Error, Result};
use crate::features::{CdcRecord, SparseVector, Vocabulary};
use crate::linear_models::{fit_bnb, fit_gbt, fit_lr, fit_svm, Classifier, Model, ModelKind};
use crate::metrics::{confusion, evaluate, ConfusionMatrix, MetricsReport};
use crate::neural::{self, CnnLstmModel, Shape};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Every model input for one train/test partition.
///
/// BNB reads `*_binary`, LR, SVM and GBT read `*_dense`, the CNN-LSTM reads
/// `*_seqs`. All training inputs share `train_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub train_binary: Vec<SparseVector>,
    pub test_binary: Vec<SparseVector>,
    pub train_dense: Vec<SparseVector>,
    pub test_dense: Vec<SparseVector>,
    pub train_seqs: Vec<Vec<usize>>,
    pub test_seqs: Vec<Vec<usize>>,
    pub train_y: Vec<u8>,
    pub test_y: Vec<u8>,
    pub test_states: Vec<State>,
    pub seq_len: usize,
    pub vocab: Vocabulary,
    /// SMOTE rows appended to the training partition.
    pub synthetic_rows: usize,
}

fn fit_one(kind: ModelKind, cfg: &ExperimentConfig, p: &Prepared) -> Result<Model> {
    Ok(match kind {
        ModelKind::Bnb => Model::Bnb(fit_bnb(&p.train_binary, &p.train_y, cfg.bnb_alpha)?),
        ModelKind::Lr => Model::Lr(fit_lr(&p.train_dense, &p.train_y, &cfg.lr)?),
        ModelKind::Svm => Model::Svm(fit_svm(&p.train_dense, &p.train_y, &cfg.svm)?),
        ModelKind::Gbt => Model::Gbt(fit_gbt(&p.train_dense, &p.train_y, &cfg.gbt)?),
        ModelKind::CnnLstm => {
            let n = &cfg.neural;
            let shape = Shape {
                vocab: p.vocab.len() + 2,
                embed: n.embed,
                filters: n.filters,
                width: n.width,
                hidden: n.hidden,
                seq_len: p.seq_len,
            };
            let init = CnnLstmModel::init(shape, cfg.seed);
            Model::CnnLstm(neural::fit(&init, &p.train_seqs, &p.train_y, &n.train)?.0)
        }
    })
}

/// Fits every selected model, one thread per model. Results come back in
/// model order, and the first failure (in that order) is returned.
pub fn fit_models(cfg: &ExperimentConfig, p: &Prepared) -> Result<Vec<Model>> {
    if !p.train_y.contains(&0) || !p.train_y.contains(&1) {
        return Err(Error::SingleClass.at_stage("fit"));
    }
    let results: Vec<Result<Model>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .models
            .iter()
            .map(|&k| s.spawn(move || fit_one(k, cfg, p)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("model fitting thread panicked"))
            .collect()
    });
    results
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("fit"))
}

/// Test-set predictions of `model`.
pub fn predict_test(model: &Model, p: &Prepared) -> Result<Vec<u8>> {
    match model {
        Model::Bnb(m) => m.predict(&p.test_binary),
        Model::Lr(m) => m.predict(&p.test_dense),
        Model::Svm(m) => m.predict(&p.test_dense),
        Model::Gbt(m) => m.predict(&p.test_dense),
        Model::CnnLstm(m) => m.predict(&p.test_seqs),
    }
}

/// Overall and per-state test metrics of each model, in the given order.
pub fn evaluate_models(models: &[Model], p: &Prepared) -> Result<Vec<ModelResult>> {
    models
        .iter()
        .map(|m| {
            let pred = predict_test(m, p)?;
            let mut tally = Tally::default();
            tally.add(&p.test_states, &p.test_y, &pred);
            tally.result(m.kind())
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("evaluate"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMetrics {
    pub state: State,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    /// Fraction of this state's test rows predicted 1.
    pub predicted_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: ModelKind,
    pub confusion: ConfusionMatrix,
    pub overall: MetricsReport,
    /// States with at least one test row, in reporting order.
    pub per_state: Vec<StateMetrics>,
}

impl ModelResult {
    pub fn predicted_rates(&self) -> BTreeMap<State, f64> {
        self.per_state
            .iter()
            .map(|s| (s.state, s.predicted_rate))
            .collect()
    }
}

#[derive(Debug, Default)]
struct Tally {
    truth: BTreeMap<State, Vec<u8>>,
    pred: BTreeMap<State, Vec<u8>>,
}

impl Tally {
    fn add(&mut self, states: &[State], truth: &[u8], pred: &[u8]) {
        for ((s, t), q) in states.iter().zip(truth).zip(pred) {
            self.truth.entry(*s).or_default().push(*t);
            self.pred.entry(*s).or_default().push(*q);
        }
    }

    fn result(&self, model: ModelKind) -> Result<ModelResult> {
        let all_t: Vec<u8> = self.truth.values().flatten().copied().collect();
        let all_p: Vec<u8> = self.pred.values().flatten().copied().collect();
        let cm = confusion(&all_t, &all_p)?;
        let per_state = self
            .truth
            .iter()
            .map(|(&state, t)| {
                let p = &self.pred[&state];
                let cm = confusion(t, p)?;
                Ok(StateMetrics {
                    state,
                    n_test: t.len(),
                    confusion: cm,
                    metrics: evaluate(&cm)?,
                    predicted_rate: p.iter().filter(|&&v| v == 1).count() as f64 / p.len() as f64,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ModelResult {
            model,
            confusion: cm,
            overall: evaluate(&cm)?,
            per_state,
        })
    }
}

/// Summary of one branch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub n_examples: usize,
    pub n_positive: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub vocabulary_size: usize,
    pub synthetic_rows: usize,
    /// States left out in per-state mode because their training rows held
    /// a single class.
    pub skipped_states: Vec<State>,
    pub models: Vec<ModelResult>,
}

impl BranchReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.model == kind)
    }
}

/// The split used by both branches: stratified by label, seeded by the
/// experiment seed.
pub fn split_records<R: Record>(cfg: &ExperimentConfig, records: &[R]) -> Result<CorpusSplit> {
    split(
        records,
        &SplitOptions {
            train_fraction: cfg.split,
            seed: cfg.seed,
            stratify: true,
        },
    )
    .map_err(|e| e.at_stage("split"))
}

/// A fitted branch: its inputs, its models and their evaluation.
#[derive(Debug, Clone)]
pub struct Trained {
    pub prepared: Prepared,
    pub models: Vec<Model>,
}

type Prepare<'a, R> = &'a dyn Fn(&[&R], &[&R]) -> Result<Prepared>;

fn pooled<R: Record>(
    cfg: &ExperimentConfig,
    records: &[R],
    sp: &CorpusSplit,
    prepare: Prepare<R>,
) -> Result<(BranchReport, Trained)> {
    let (train, test) = sp.partition(records);
    let p = prepare(&train, &test).map_err(|e| e.at_stage("featurize"))?;
    let models = fit_models(cfg, &p)?;
    let results = evaluate_models(&models, &p)?;
    let report = BranchReport {
        n_examples: records.len(),
        n_positive: records.iter().filter(|r| r.label() == Some(1)).count(),
        n_train: train.len(),
        n_test: test.len(),
        vocabulary_size: p.vocab.len(),
        synthetic_rows: p.synthetic_rows,
        skipped_states: Vec::new(),
        models: results,
    };
    Ok((report, Trained { prepared: p, models }))
}

fn per_state<R: Record + Clone>(
    cfg: &ExperimentConfig,
    records: &[R],
    state_of: &dyn Fn(&R) -> State,
    prepare: Prepare<R>,
) -> Result<BranchReport> {
    let mut tallies: BTreeMap<ModelKind, Tally> = BTreeMap::new();
    let mut skipped = Vec::new();
    let (mut n_train, mut n_test, mut vocab, mut synthetic) = (0, 0, 0, 0);
    for state in State::ALL {
        let subset: Vec<R> = records.iter().filter(|r| state_of(r) == state).cloned().collect();
        if subset.len() < 2 {
            continue;
        }
        let sp = split_records(cfg, &subset)?;
        let (train, test) = sp.partition(&subset);
        let classes: BTreeSet<Option<u8>> = train.iter().map(|r| r.label()).collect();
        if classes.len() < 2 || test.is_empty() {
            skipped.push(state);
            continue;
        }
        let p = prepare(&train, &test).map_err(|e| e.at_stage("featurize"))?;
        let models = fit_models(cfg, &p)?;
        for m in &models {
            let pred = predict_test(m, &p).map_err(|e| e.at_stage("evaluate"))?;
            tallies
                .entry(m.kind())
                .or_default()
                .add(&p.test_states, &p.test_y, &pred);
        }
        n_train += train.len();
        n_test += test.len();
        vocab = vocab.max(p.vocab.len());
        synthetic += p.synthetic_rows;
    }
    if tallies.is_empty() {
        return Err(Error::SingleClass.at_stage("fit"));
    }
    let models = tallies
        .iter()
        .map(|(&k, t)| t.result(k))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("evaluate"))?;
    Ok(BranchReport {
        n_examples: records.len(),
        n_positive: records.iter().filter(|r| r.label() == Some(1)).count(),
        n_train,
        n_test,
        vocabulary_size: vocab,
        synthetic_rows: synthetic,
        skipped_states: skipped,
        models,
    })
}

/// Splits, featurizes, fits and evaluates labeled posts. In per-state mode
/// each state gets its own split and models.
pub fn run_text_branch(cfg: &ExperimentConfig, examples: &[LabeledPost]) -> Result<BranchReport> {
    match cfg.mode {
        EvalMode::Pooled => {
            let sp = split_records(cfg, examples)?;
            Ok(train_text(cfg, examples, &sp)?.0)
        }
        EvalMode::PerState => per_state(cfg, examples, &|p| p.state, &|a, b| prepare_text(cfg, a, b)),
    }
}

/// The pooled text branch on a given split. Examples whose id is in
/// neither list are ignored.
pub fn train_text(
    cfg: &ExperimentConfig,
    examples: &[LabeledPost],
    sp: &CorpusSplit,
) -> Result<(BranchReport, Trained)> {
    pooled(cfg, examples, sp, &|a, b| prepare_text(cfg, a, b))
}

pub fn run_cdc_branch(cfg: &ExperimentConfig, records: &[CdcRecord]) -> Result<BranchReport> {
    let rows = index_rows(records);
    match cfg.mode {
        EvalMode::Pooled => {
            let sp = split_records(cfg, &rows)?;
            Ok(train_cdc(cfg, &rows, &sp)?.0)
        }
        EvalMode::PerState => per_state(cfg, &rows, &|r| r.record.state, &|a, b| prepare_cdc(cfg, a, b)),
    }
}

/// The pooled demographic branch on a given split.
pub fn train_cdc(
    cfg: &ExperimentConfig,
    rows: &[CdcRow],
    sp: &CorpusSplit,
) -> Result<(BranchReport, Trained)> {
    pooled(cfg, rows, sp, &|a, b| prepare_cdc(cfg, a, b))
}

/// Predicted over actual prevalence for one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub state: State,
    pub predicted: f64,
    pub actual: f64,
    /// `None` when the actual rate is zero.
    pub ratio: Option<f64>,
}

/// Ratios for the states present in both maps, in reporting order.
/// A zero actual rate gives an undefined ratio rather than an infinity.
pub fn compare(predicted: &BTreeMap<State, f64>, actual: &BTreeMap<State, f64>) -> Result<Vec<RatioRow>> {
    if predicted.is_empty() {
        return Err(Error::Empty("predicted rate table"));
    }
    if actual.is_empty() {
        return Err(Error::Empty("actual rate table"));
    }
    for (s, r) in predicted.iter().chain(actual) {
        if !(0.0..=1.0).contains(r) {
            return Err(Error::invalid(format!("rate {r} for {s} outside [0, 1]")));
        }
    }
    let rows: Vec<RatioRow> = State::ALL
        .into_iter()
        .filter_map(|s| {
            let (&p, &a) = (predicted.get(&s)?, actual.get(&s)?);
            Some(RatioRow {
                state: s,
                predicted: p,
                actual: a,
                ratio: (a > 0.0).then(|| p / a),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Empty("set of states shared by both branches"));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    pub crate_version: String,
    /// SHA-256 of each input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    pub threshold: f64,
    pub split: f64,
    pub mode: EvalMode,
    pub label_unit: LabelUnit,
    pub models: Vec<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextInput {
    pub loaded: usize,
    pub skipped: usize,
    pub filtered_out: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRate {
    pub state: State,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub text_input: Option<TextInput>,
    pub text: Option<BranchReport>,
    pub cdc: Option<BranchReport>,
    /// Per-state CVD share over the whole demographic table.
    pub actual_rates: Vec<StateRate>,
    /// Text-branch model whose predicted rates feed `ratios`.
    pub ratio_model: Option<ModelKind>,
    pub ratios: Vec<RatioRow>,
}

impl ExperimentReport {
    /// Pretty JSON with a trailing newline. Contains no timestamps, so equal
    /// runs give equal bytes.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let r: ExperimentReport = serde_json::from_str(src)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "report schema version {} (expected {REPORT_SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&src)
    }

    pub fn actual_rate_map(&self) -> BTreeMap<State, f64> {
        self.actual_rates.iter().map(|r| (r.state, r.rate)).collect()
    }

    /// Recomputes the ratio table for `model` from the stored rates.
    pub fn ratios_for(&self, model: ModelKind) -> Result<Vec<RatioRow>> {
        let text = self.text.as_ref().ok_or(Error::Empty("text branch results"))?;
        let m = text
            .model(model)
            .ok_or_else(|| Error::Config(format!("model {} not in report", model.name())))?;
        compare(&m.predicted_rates(), &self.actual_rate_map())
    }
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// The text model used for ratios: the configured one if selected,
/// otherwise the first selected model.
pub fn ratio_model(cfg: &ExperimentConfig) -> Option<ModelKind> {
    if cfg.models.contains(&cfg.ratio_model) {
        Some(cfg.ratio_model)
    } else {
        cfg.models.iter().next().copied()
    }
}

/// Loads, labels and keyword-filters the configured corpus.
pub fn load_text(cfg: &ExperimentConfig) -> Result<TextData> {
    let (posts, skipped) = read_corpus(cfg).map_err(|e| e.at_stage("load"))?;
    let res = TextResources::load(cfg).map_err(|e| e.at_stage("load"))?;
    let mut data = label_posts(&posts, &res, cfg.threshold, cfg.label_unit)?;
    data.skipped = skipped;
    Ok(data)
}

pub fn load_cdc_records(cfg: &ExperimentConfig) -> Result<Vec<CdcRecord>> {
    let path = cfg
        .cdc
        .as_ref()
        .ok_or_else(|| Error::Config("no cdc file configured".into()))?;
    load_cdc(path).map_err(|e| e.at_stage("load"))
}

/// Runs both configured branches concurrently and assembles the report.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.posts.is_none() && cfg.cdc.is_none() {
        return Err(Error::Config("neither posts nor cdc input configured".into()));
    }
    let (text, cdc) = std::thread::scope(|s| {
        let text = s.spawn(|| -> Result<Option<(TextInput, BranchReport)>> {
            if cfg.posts.is_none() {
                return Ok(None);
            }
            let data = load_text(cfg)?;
            let branch = run_text_branch(cfg, &data.examples)?;
            let input = TextInput {
                loaded: data.loaded,
                skipped: data.skipped,
                filtered_out: data.filtered_out,
            };
            Ok(Some((input, branch)))
        });
        let cdc = s.spawn(|| -> Result<Option<(Vec<StateRate>, BranchReport)>> {
            if cfg.cdc.is_none() {
                return Ok(None);
            }
            let records = load_cdc_records(cfg)?;
            let branch = run_cdc_branch(cfg, &records)?;
            let rates = actual_rates(&records)
                .into_iter()
                .map(|(state, rate)| StateRate { state, rate })
                .collect();
            Ok(Some((rates, branch)))
        });
        (
            text.join().expect("text branch panicked"),
            cdc.join().expect("cdc branch panicked"),
        )
    });
    let (text_input, text) = text?.unzip();
    let (actual, cdc) = cdc?.unzip();
    let actual_rates = actual.unwrap_or_default();

    let mut inputs = BTreeMap::new();
    for (role, path) in [("posts", &cfg.posts), ("cdc", &cfg.cdc)] {
        if let Some(p) = path {
            inputs.insert(role.to_string(), file_digest(p)?);
        }
    }
    let mut report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance: Provenance {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            threshold: cfg.threshold,
            split: cfg.split,
            mode: cfg.mode,
            label_unit: cfg.label_unit,
            models: cfg.models.iter().copied().collect(),
        },
        text_input,
        text,
        cdc,
        actual_rates,
        ratio_model: None,
        ratios: Vec::new(),
    };
    if report.text.is_some() && report.cdc.is_some() {
        let model = ratio_model(cfg).expect("validated config selects a model");
        report.ratios = report.ratios_for(model).map_err(|e| e.at_stage("compare"))?;
        report.ratio_model = Some(model);
    }
    Ok(report)
}
