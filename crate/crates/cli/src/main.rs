use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cvdrisk::corpus::{
    save_posts, synthesize_cdc, synthesize_corpus, write_cdc, CdcSynthSpec, Format, SynthSpec, SynthTemplates,
};
use cvdrisk::error::{Error, ErrorClass, Result};
use cvdrisk::linear_models::{Model, ModelKind};
use cvdrisk::report::{
    self, emit, evaluate_models, index_rows, labels_csv, load_cdc_records, load_text, metrics_csv,
    parse_models, prepare_cdc, prepare_text, ratio_svg, ratios_csv, split_records, BranchReport, EvalMode,
    ExperimentConfig, ExperimentReport, TextResources,
};

#[derive(Parser)]
#[command(
    name = "cvdrisk",
    version,
    about = "Sentiment-labeled CVD risk classification and prevalence reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic post corpus and demographic table.
    Synth(SynthArgs),
    /// Validate a post file and report how many posts match the dictionary.
    Ingest(Shared),
    /// Score and label keyword-matched posts into labels.csv.
    Label(Shared),
    /// Fit the selected models and save them under OUT/models.
    Train(Shared),
    /// Evaluate models saved by `train` on the same test split.
    Evaluate(Shared),
    /// Recompute prevalence ratios from a saved report.json.
    Compare(CompareArgs),
    /// Run both branches end to end and write every report file.
    Run(Shared),
}

#[derive(Args)]
struct SynthArgs {
    /// Output post file (.csv or .jsonl).
    #[arg(long, default_value = "posts.csv")]
    posts_out: PathBuf,
    /// Output demographic table (.csv).
    #[arg(long, default_value = "cdc.csv")]
    cdc_out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    n_posts: usize,
    #[arg(long, default_value_t = 4000)]
    n_cdc: usize,
    /// Share of posts planted with positive sentiment.
    #[arg(long, default_value_t = 0.5)]
    positive_fraction: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pooled,
    PerState,
}

#[derive(Args)]
struct Shared {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    posts: Option<PathBuf>,
    #[arg(long)]
    cdc: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    /// Training fraction.
    #[arg(long)]
    split: Option<f64>,
    /// Comma-separated model ids (bnb, svm, lr, gbt, cnn-lstm) or `all`.
    #[arg(long)]
    models: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Skip invalid input rows instead of failing.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Report written by `run`.
    #[arg(long, default_value = "out/report.json")]
    report: PathBuf,
    /// Text model whose predicted rates are used; defaults to the report's.
    #[arg(long)]
    model: Option<String>,
    /// Directory for ratios.csv and ratio_by_state.svg; defaults to the
    /// report's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Shared {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let seed = self.seed.unwrap_or(cfg.seed);
        cfg = cfg.with_seed(seed);
        if let Some(p) = &self.posts {
            cfg.posts = Some(p.clone());
        }
        if let Some(p) = &self.cdc {
            cfg.cdc = Some(p.clone());
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(s) = self.split {
            cfg.split = s;
        }
        if let Some(m) = &self.models {
            cfg.models = parse_models(m)?;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Pooled => EvalMode::Pooled,
                ModeArg::PerState => EvalMode::PerState,
            };
        }
        if self.lenient {
            cfg.lenient = true;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let res = TextResources::bundled();
    let spec = SynthSpec::uniform(a.n_posts, a.positive_fraction, a.seed);
    let posts = synthesize_corpus(&spec, &res.dictionary, &res.lexicon, &SynthTemplates::bundled())?;
    save_posts(&a.posts_out, &posts, Format::from_path(&a.posts_out))?;
    let cdc_spec = CdcSynthSpec::new(a.n_cdc, a.seed);
    let records = synthesize_cdc(&cdc_spec)?;
    let file = File::create(&a.cdc_out).map_err(|e| io_error(&a.cdc_out, e))?;
    write_cdc(BufWriter::new(file), &records)?;
    println!("wrote {} posts to {}", posts.len(), a.posts_out.display());
    println!(
        "wrote {} records to {} (Bayes rate {:.3})",
        records.len(),
        a.cdc_out.display(),
        cdc_spec.bayes_rate()
    );
    Ok(())
}

fn ingest(cfg: &ExperimentConfig) -> Result<()> {
    let data = load_text(cfg)?;
    let positive = data.examples.iter().filter(|e| e.label == 1).count();
    println!("loaded {}", data.loaded);
    println!("skipped {}", data.skipped);
    println!("keyword matched {}", data.examples.len());
    println!("filtered out {}", data.filtered_out);
    println!("labeled 1 at threshold {}: {positive}", cfg.threshold);
    Ok(())
}

fn label(cfg: &ExperimentConfig) -> Result<()> {
    let data = load_text(cfg)?;
    create_dir(&cfg.out)?;
    let path = cfg.out.join("labels.csv");
    write_file(&path, &labels_csv(&data.examples))?;
    println!("wrote {} labels to {}", data.examples.len(), path.display());
    Ok(())
}

fn model_path(dir: &Path, branch: &str, kind: ModelKind) -> PathBuf {
    dir.join("models").join(format!("{branch}-{}.json", kind.id()))
}

fn require_pooled(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.mode == EvalMode::PerState {
        return Err(Error::Config(
            "train and evaluate use the pooled split; per-state mode is available through run".into(),
        ));
    }
    if cfg.posts.is_none() && cfg.cdc.is_none() {
        return Err(Error::Config("neither posts nor cdc input configured".into()));
    }
    Ok(())
}

fn train(cfg: &ExperimentConfig) -> Result<()> {
    require_pooled(cfg)?;
    create_dir(&cfg.out.join("models"))?;
    if cfg.posts.is_some() {
        let data = load_text(cfg)?;
        let sp = split_records(cfg, &data.examples)?;
        let (_, trained) = report::train_text(cfg, &data.examples, &sp)?;
        for m in &trained.models {
            let path = model_path(&cfg.out, "text", m.kind());
            m.save(&path)?;
            println!("saved {}", path.display());
        }
    }
    if cfg.cdc.is_some() {
        let rows = index_rows(&load_cdc_records(cfg)?);
        let sp = split_records(cfg, &rows)?;
        let (_, trained) = report::train_cdc(cfg, &rows, &sp)?;
        for m in &trained.models {
            let path = model_path(&cfg.out, "cdc", m.kind());
            m.save(&path)?;
            println!("saved {}", path.display());
        }
    }
    Ok(())
}

fn load_models(cfg: &ExperimentConfig, branch: &str) -> Result<Vec<Model>> {
    cfg.models
        .iter()
        .map(|&k| Model::load(model_path(&cfg.out, branch, k)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("load"))
}

fn summary(branch: &BranchReport) -> Result<()> {
    print!(
        "{}",
        cvdrisk::metrics::metrics_table(&overall_rows(branch))?.to_text()
    );
    Ok(())
}

fn overall_rows(branch: &BranchReport) -> Vec<(&'static str, cvdrisk::metrics::MetricsReport)> {
    branch
        .models
        .iter()
        .map(|m| (m.model.name(), m.overall))
        .collect()
}

fn branch_report(
    labels: &[u8],
    p: &report::Prepared,
    models: &[Model],
    train: usize,
) -> Result<BranchReport> {
    Ok(BranchReport {
        n_examples: labels.len(),
        n_positive: labels.iter().filter(|&&l| l == 1).count(),
        n_train: train,
        n_test: p.test_y.len(),
        vocabulary_size: p.vocab.len(),
        synthetic_rows: p.synthetic_rows,
        skipped_states: Vec::new(),
        models: evaluate_models(models, p)?,
    })
}

fn evaluate(cfg: &ExperimentConfig) -> Result<()> {
    require_pooled(cfg)?;
    create_dir(&cfg.out)?;
    if cfg.posts.is_some() {
        let data = load_text(cfg)?;
        let sp = split_records(cfg, &data.examples)?;
        let (tr, te) = sp.partition(&data.examples);
        let p = prepare_text(cfg, &tr, &te).map_err(|e| e.at_stage("featurize"))?;
        let b = branch_report(
            &data.examples.iter().map(|e| e.label).collect::<Vec<_>>(),
            &p,
            &load_models(cfg, "text")?,
            tr.len(),
        )?;
        write_file(&cfg.out.join("metrics.csv"), &metrics_csv(&b)?)?;
        println!("Text branch");
        summary(&b)?;
    }
    if cfg.cdc.is_some() {
        let rows = index_rows(&load_cdc_records(cfg)?);
        let sp = split_records(cfg, &rows)?;
        let (tr, te) = sp.partition(&rows);
        let p = prepare_cdc(cfg, &tr, &te).map_err(|e| e.at_stage("featurize"))?;
        let b = branch_report(
            &rows.iter().map(|r| r.record.target).collect::<Vec<_>>(),
            &p,
            &load_models(cfg, "cdc")?,
            tr.len(),
        )?;
        write_file(&cfg.out.join("metrics_cdc.csv"), &metrics_csv(&b)?)?;
        println!("Demographic branch");
        summary(&b)?;
    }
    Ok(())
}

fn compare(a: &CompareArgs) -> Result<()> {
    let rep = ExperimentReport::load(&a.report)?;
    let model = match &a.model {
        Some(m) => ModelKind::parse(m)?,
        None => rep
            .ratio_model
            .ok_or_else(|| Error::Config("report has no ratio model; pass --model".into()))?,
    };
    let rows = rep.ratios_for(model).map_err(|e| e.at_stage("compare"))?;
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => a
            .report
            .parent()
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    create_dir(&dir)?;
    let csv = ratios_csv(&rows);
    write_file(&dir.join("ratios.csv"), &csv)?;
    write_file(&dir.join("ratio_by_state.svg"), &ratio_svg(&rows, model))?;
    print!("{csv}");
    Ok(())
}

fn run(cfg: &ExperimentConfig) -> Result<()> {
    let rep = report::run(cfg)?;
    emit(&rep, &cfg.out)?;
    print!("{}", report::metrics_text(&rep)?);
    let undefined: BTreeSet<&str> = rep
        .ratios
        .iter()
        .filter(|r| r.ratio.is_none())
        .map(|r| r.state.code())
        .collect();
    if !undefined.is_empty() {
        println!("undefined ratios (no actual cases): {undefined:?}");
    }
    println!("wrote report files to {}", cfg.out.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Ingest(s) => ingest(&s.config()?),
        Command::Label(s) => label(&s.config()?),
        Command::Train(s) => train(&s.config()?),
        Command::Evaluate(s) => evaluate(&s.config()?),
        Command::Compare(a) => compare(a),
        Command::Run(s) => run(&s.config()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Training => 4,
            })
        }
    }
}
