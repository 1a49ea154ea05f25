use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linear_models::{GbtConfig, LrConfig, ModelKind, SvmConfig};
use crate::neural::{Optimizer, TrainConfig};
use crate::sentiment::DEFAULT_THRESHOLD;

/// How per-state rows are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// One model trained on all states, evaluated on each state's test rows.
    Pooled,
    /// A separate model per state, trained and tested on that state only.
    PerState,
}

/// What receives a sentiment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelUnit {
    Post,
    /// Every post of a user gets the label of the user's mean compound.
    User,
}

/// Network sizes and training settings for the CNN-LSTM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuralConfig {
    pub embed: usize,
    pub filters: usize,
    pub width: usize,
    pub hidden: usize,
    pub seq_len: usize,
    pub train: TrainConfig,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        NeuralConfig {
            embed: 32,
            filters: 32,
            width: 3,
            hidden: 32,
            seq_len: crate::neural::DEFAULT_SEQ_LEN,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub posts: Option<PathBuf>,
    pub cdc: Option<PathBuf>,
    /// `None` selects the bundled resource.
    pub dictionary: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub lenient: bool,
    pub threshold: f64,
    pub split: f64,
    pub seed: u64,
    pub models: BTreeSet<ModelKind>,
    pub mode: EvalMode,
    pub label_unit: LabelUnit,
    /// Model whose text-branch predictions feed the prevalence ratios.
    pub ratio_model: ModelKind,
    pub out: PathBuf,
    pub min_df: usize,
    pub smote_k: usize,
    pub bnb_alpha: f64,
    /// Pipeline defaults differ from the fitter defaults: tf-idf rows have
    /// unit norm, so gradient descent needs a larger step and Pegasos more
    /// epochs at a smaller lambda.
    pub lr: LrConfig,
    pub svm: SvmConfig,
    pub gbt: GbtConfig,
    pub neural: NeuralConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            posts: None,
            cdc: None,
            dictionary: None,
            lexicon: None,
            stoplist: None,
            lenient: false,
            threshold: DEFAULT_THRESHOLD,
            split: 0.70,
            seed: 42,
            models: ModelKind::ALL.into_iter().collect(),
            mode: EvalMode::Pooled,
            label_unit: LabelUnit::Post,
            ratio_model: ModelKind::Svm,
            out: PathBuf::from("out"),
            min_df: crate::features::DEFAULT_MIN_DF,
            smote_k: 5,
            bnb_alpha: 1.0,
            lr: LrConfig {
                learning_rate: 10.0,
                epochs: 500,
                ..LrConfig::default()
            },
            svm: SvmConfig {
                lambda: 1e-4,
                epochs: 2000,
                ..SvmConfig::default()
            },
            gbt: GbtConfig::default(),
            neural: NeuralConfig::default(),
        }
    }
}

/// Every key accepted by [`ExperimentConfig::set`], in documentation order.
pub const CONFIG_KEYS: &[&str] = &[
    "posts",
    "cdc",
    "dictionary",
    "lexicon",
    "stoplist",
    "lenient",
    "threshold",
    "split",
    "seed",
    "models",
    "mode",
    "label_unit",
    "ratio_model",
    "out",
    "min_df",
    "smote_k",
    "bnb.alpha",
    "lr.learning_rate",
    "lr.epochs",
    "lr.l2",
    "svm.lambda",
    "svm.epochs",
    "gbt.rounds",
    "gbt.eta",
    "gbt.max_depth",
    "nn.embed",
    "nn.filters",
    "nn.width",
    "nn.hidden",
    "nn.seq_len",
    "nn.epochs",
    "nn.learning_rate",
    "nn.batch_size",
    "nn.clip_norm",
    "nn.optimizer",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

/// Parses a comma-separated model list such as `svm,lr` or `all`.
pub fn parse_models(value: &str) -> Result<BTreeSet<ModelKind>> {
    if value.trim() == "all" {
        return Ok(ModelKind::ALL.into_iter().collect());
    }
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(ModelKind::parse)
        .collect()
}

impl ExperimentConfig {
    /// Applies one `key = value` setting. Paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "posts" => self.posts = Some(PathBuf::from(v)),
            "cdc" => self.cdc = Some(PathBuf::from(v)),
            "dictionary" => self.dictionary = Some(PathBuf::from(v)),
            "lexicon" => self.lexicon = Some(PathBuf::from(v)),
            "stoplist" => self.stoplist = Some(PathBuf::from(v)),
            "lenient" => self.lenient = flag(key, v)?,
            "threshold" => self.threshold = num(key, v)?,
            "split" => self.split = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "models" => self.models = parse_models(v)?,
            "mode" => {
                self.mode = match v {
                    "pooled" => EvalMode::Pooled,
                    "per-state" => EvalMode::PerState,
                    _ => {
                        return Err(Error::Config(format!(
                            "mode: expected pooled or per-state, got {v:?}"
                        )))
                    }
                }
            }
            "label_unit" => {
                self.label_unit = match v {
                    "post" => LabelUnit::Post,
                    "user" => LabelUnit::User,
                    _ => {
                        return Err(Error::Config(format!(
                            "label_unit: expected post or user, got {v:?}"
                        )))
                    }
                }
            }
            "ratio_model" => self.ratio_model = ModelKind::parse(v)?,
            "out" => self.out = PathBuf::from(v),
            "min_df" => self.min_df = num(key, v)?,
            "smote_k" => self.smote_k = num(key, v)?,
            "bnb.alpha" => self.bnb_alpha = num(key, v)?,
            "lr.learning_rate" => self.lr.learning_rate = num(key, v)?,
            "lr.epochs" => self.lr.epochs = num(key, v)?,
            "lr.l2" => self.lr.l2 = num(key, v)?,
            "svm.lambda" => self.svm.lambda = num(key, v)?,
            "svm.epochs" => self.svm.epochs = num(key, v)?,
            "gbt.rounds" => self.gbt.rounds = num(key, v)?,
            "gbt.eta" => self.gbt.eta = num(key, v)?,
            "gbt.max_depth" => self.gbt.max_depth = num(key, v)?,
            "nn.embed" => self.neural.embed = num(key, v)?,
            "nn.filters" => self.neural.filters = num(key, v)?,
            "nn.width" => self.neural.width = num(key, v)?,
            "nn.hidden" => self.neural.hidden = num(key, v)?,
            "nn.seq_len" => self.neural.seq_len = num(key, v)?,
            "nn.epochs" => self.neural.train.epochs = num(key, v)?,
            "nn.learning_rate" => self.neural.train.learning_rate = num(key, v)?,
            "nn.batch_size" => self.neural.train.batch_size = num(key, v)?,
            "nn.clip_norm" => self.neural.train.clip_norm = num(key, v)?,
            "nn.optimizer" => {
                self.neural.train.optimizer = match v {
                    "adam" => Optimizer::Adam,
                    "sgd" => Optimizer::Sgd,
                    _ => {
                        return Err(Error::Config(format!(
                            "nn.optimizer: expected adam or sgd, got {v:?}"
                        )))
                    }
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses the flat configuration format:
    ///
    /// ```text
    /// # comment
    /// key = value
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored; everything after
    /// the first `=` is the value. Relative paths are resolved against
    /// `base`. Later lines override earlier ones.
    pub fn parse(src: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&src, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.posts,
            &mut self.cdc,
            &mut self.dictionary,
            &mut self.lexicon,
            &mut self.stoplist,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.out);
    }

    /// Propagates the experiment seed into every model's own seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.lr.seed = seed;
        self.svm.seed = seed;
        self.gbt.seed = seed;
        self.neural.train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold {} not in [-1, 1]",
                self.threshold
            )));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::Config(format!("split {} not in (0, 1)", self.split)));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        if self.min_df == 0 || self.smote_k == 0 {
            return Err(Error::Config("min_df and smote_k must be at least 1".into()));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering of every setting, sorted by key.
    /// Paths appear exactly as configured.
    pub fn canonical(&self) -> String {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or("(bundled)".to_string(), |p| p.display().to_string())
        };
        let models: Vec<&str> = self.models.iter().map(|m| m.id()).collect();
        let t = &self.neural.train;
        let mut lines = vec![
            format!("posts = {}", path(&self.posts)),
            format!("cdc = {}", path(&self.cdc)),
            format!("dictionary = {}", path(&self.dictionary)),
            format!("lexicon = {}", path(&self.lexicon)),
            format!("stoplist = {}", path(&self.stoplist)),
            format!("lenient = {}", self.lenient),
            format!("threshold = {}", self.threshold),
            format!("split = {}", self.split),
            format!("seed = {}", self.seed),
            format!("models = {}", models.join(",")),
            format!(
                "mode = {}",
                if self.mode == EvalMode::Pooled {
                    "pooled"
                } else {
                    "per-state"
                }
            ),
            format!(
                "label_unit = {}",
                if self.label_unit == LabelUnit::Post {
                    "post"
                } else {
                    "user"
                }
            ),
            format!("ratio_model = {}", self.ratio_model.id()),
            format!("min_df = {}", self.min_df),
            format!("smote_k = {}", self.smote_k),
            format!("bnb.alpha = {}", self.bnb_alpha),
            format!("lr.learning_rate = {}", self.lr.learning_rate),
            format!("lr.epochs = {}", self.lr.epochs),
            format!("lr.l2 = {}", self.lr.l2),
            format!("svm.lambda = {}", self.svm.lambda),
            format!("svm.epochs = {}", self.svm.epochs),
            format!("gbt.rounds = {}", self.gbt.rounds),
            format!("gbt.eta = {}", self.gbt.eta),
            format!("gbt.max_depth = {}", self.gbt.max_depth),
            format!("nn.embed = {}", self.neural.embed),
            format!("nn.filters = {}", self.neural.filters),
            format!("nn.width = {}", self.neural.width),
            format!("nn.hidden = {}", self.neural.hidden),
            format!("nn.seq_len = {}", self.neural.seq_len),
            format!("nn.epochs = {}", t.epochs),
            format!("nn.learning_rate = {}", t.learning_rate),
            format!("nn.batch_size = {}", t.batch_size),
            format!("nn.clip_norm = {}", t.clip_norm),
            format!(
                "nn.optimizer = {}",
                if t.optimizer == Optimizer::Adam {
                    "adam"
                } else {
                    "sgd"
                }
            ),
        ];
        lines.sort();
        lines.join("\n") + "\n"
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded. The output
    /// directory is excluded so reruns elsewhere hash the same.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
