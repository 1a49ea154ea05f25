//! The ten acceptance criteria, one pass/fail line each. Runs as a plain
//! binary so every criterion reports even when an earlier one fails.

use std::collections::BTreeSet;
use std::fs::File;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cvdrisk::corpus::{
    save_posts, synthesize_cdc, synthesize_corpus, write_cdc, CdcSynthSpec, Format, Record, SynthSpec,
    SynthTemplates,
};
use cvdrisk::features::{smote, SparseVector};
use cvdrisk::linear_models::{
    fit_lr, fit_svm, lr_gradient_check, Classifier, LrConfig, ModelKind, SvmConfig,
};
use cvdrisk::metrics::{confusion, evaluate, metrics_table, MetricsReport};
use cvdrisk::neural::{gradient_check, CnnLstmModel, Shape};
use cvdrisk::report::{
    emit, index_rows, label_posts, run, run_cdc_branch, run_text_branch, split_records, train_cdc,
    train_text, BranchReport, ExperimentConfig, LabelUnit, TextResources,
};
use cvdrisk::sentiment::{default_lexicon, label_compound, score};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [101, 102, 103];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("took {took:.1?}, limit {limit:?}"))
    }
}

struct Oracle {
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    mcc: f64,
    kappa: f64,
}

/// Metrics straight from the label vectors: MCC as the Pearson correlation
/// of the two 0/1 vectors, kappa from the marginal rates.
fn oracle(t: &[u8], p: &[u8]) -> Oracle {
    let n = t.len() as f64;
    let tf: Vec<f64> = t.iter().map(|&v| f64::from(v)).collect();
    let pf: Vec<f64> = p.iter().map(|&v| f64::from(v)).collect();
    let agree = t.iter().zip(p).filter(|(a, b)| a == b).count() as f64;
    let both: f64 = tf.iter().zip(&pf).map(|(a, b)| a * b).sum();
    let st: f64 = tf.iter().sum();
    let sp: f64 = pf.iter().sum();
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };

    let (mt, mp) = (st / n, sp / n);
    let cov: f64 = tf.iter().zip(&pf).map(|(a, b)| (a - mt) * (b - mp)).sum();
    let vt: f64 = tf.iter().map(|a| (a - mt).powi(2)).sum();
    let vp: f64 = pf.iter().map(|b| (b - mp).powi(2)).sum();
    let mcc = div(cov, (vt * vp).sqrt());

    let po = agree / n;
    let pe = mt * mp + (1.0 - mt) * (1.0 - mp);
    Oracle {
        accuracy: po,
        precision: div(both, sp),
        recall: div(both, st),
        f1: div(2.0 * both, st + sp),
        mcc,
        kappa: div(po - pe, 1.0 - pe),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=500);
        let bias_t: f64 = rng.gen();
        let bias_p: f64 = rng.gen();
        let t: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<f64>() < bias_t)).collect();
        let p: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<f64>() < bias_p)).collect();
        let got = evaluate(&confusion(&t, &p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let want = oracle(&t, &p);
        for (g, w) in [
            (got.accuracy, want.accuracy),
            (got.precision, want.precision),
            (got.recall, want.recall),
            (got.f1, want.f1),
            (got.mcc, want.mcc),
            (got.kappa, want.kappa),
        ] {
            worst = worst.max((g - w).abs());
        }
    }
    ensure!(worst <= 1e-12, "max abs difference {worst:e}");
    within(start, Duration::from_secs(10))?;
    Ok(format!("1000 pairs, max abs difference {worst:.1e}"))
}

fn published(acc: f64, rest: [f64; 5]) -> MetricsReport {
    MetricsReport {
        accuracy: acc,
        precision: rest[0],
        recall: rest[1],
        f1: rest[2],
        mcc: rest[3],
        kappa: rest[4],
    }
}

fn criterion_2() -> Outcome {
    let table1 = [
        ("CNN-LSTM", published(0.7751, [0.75, 0.68, 0.72, 0.53, 0.53])),
        ("BNB", published(0.7455, [0.84, 0.48, 0.61, 0.48, 0.44])),
        ("SVM", published(0.8875, [0.87, 0.86, 0.86, 0.77, 0.77])),
        ("LR", published(0.8782, [0.85, 0.86, 0.85, 0.75, 0.75])),
        ("CatBoost", published(0.7667, [0.73, 0.71, 0.72, 0.52, 0.53])),
    ];
    let table2 = [
        ("CNN-LSTM", published(0.5764, [0.63, 0.36, 0.45, 0.17, 0.15])),
        ("BNB", published(0.5793, [0.67, 0.31, 0.42, 0.19, 0.16])),
        ("SVM", published(0.5755, [0.61, 0.41, 0.49, 0.16, 0.15])),
        ("LR", published(0.5803, [0.62, 0.39, 0.48, 0.17, 0.16])),
        ("CatBoost", published(0.5742, [0.61, 0.42, 0.50, 0.16, 0.15])),
    ];
    let t1 = metrics_table(&table1).map_err(|e| e.to_string())?;
    let t2 = metrics_table(&table2).map_err(|e| e.to_string())?;
    ensure!(
        t1.to_csv() == include_str!("data/table1.csv"),
        "table1.csv mismatch"
    );
    ensure!(
        t2.to_csv() == include_str!("data/table2.csv"),
        "table2.csv mismatch"
    );
    let svm = t1.cells()[2][1..].join(", ");
    ensure!(
        svm == "88.75%, 0.87, 0.86, 0.86, 0.77, 0.77",
        "SVM row rendered as {svm}"
    );
    let lr = t2.cells()[3][1..].join(", ");
    ensure!(
        lr == "58.03%, 0.62, 0.39, 0.48, 0.17, 0.16",
        "LR row rendered as {lr}"
    );
    Ok(format!("both tables byte-identical; SVM row {svm}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let lex = default_lexicon();
    let mut worst: f64 = 0.0;
    let mut n_golden = 0;
    let mut compounds = Vec::new();
    for line in include_str!("data/sentiment_golden.tsv").lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        ensure!(cols.len() == 5, "malformed golden line {line:?}");
        let got = score(cols[0], lex);
        for (g, w) in [got.compound, got.pos, got.neu, got.neg].iter().zip(&cols[1..]) {
            let w: f64 = w.parse().map_err(|_| format!("bad number in {line:?}"))?;
            worst = worst.max((g - w).abs());
        }
        compounds.push(got.compound);
        n_golden += 1;
    }
    ensure!(n_golden == 200, "{n_golden} golden sentences");
    ensure!(worst <= 1e-9, "golden max abs difference {worst:e}");

    let words: Vec<_> = lex
        .words_by(|v| v.abs() >= 1.0)
        .into_iter()
        .filter(|(w, _)| w.len() >= 3)
        .collect();
    let subjects = ["the service", "my day", "this movie", "the result", "his answer"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (word, _) = *words.choose(&mut rng).unwrap();
        let subject = subjects.choose(&mut rng).unwrap();
        let plain = format!("{subject} was {word}");
        let negated = format!("{subject} was not {word}");
        let a = score(&plain, lex).compound;
        let b = score(&negated, lex).compound;
        ensure!(
            a != 0.0 && a.signum() == -b.signum(),
            "no sign flip: {plain:?} {a}, {negated:?} {b}"
        );
        let mut last = a.abs();
        for k in 1..=6 {
            let c = score(&format!("{plain}{}", "!".repeat(k)), lex).compound;
            ensure!(
                c.signum() == a.signum() && c.abs() >= last,
                "{plain:?} with {k} '!' gave {c}"
            );
            last = c.abs();
        }
        compounds.extend([a, b, last]);
    }
    ensure!(
        compounds.iter().all(|c| (-1.0..=1.0).contains(c)),
        "compound outside [-1, 1]"
    );
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "golden max abs difference {worst:.1e}; 100 generated sentences flip and stay monotone"
    ))
}

fn criterion_4() -> Outcome {
    let mut got = Vec::new();
    for (c, want) in [(-0.31, 0), (-0.30, 0), (-0.29, 1)] {
        let l = label_compound(c, -0.30).map_err(|e| e.to_string())?;
        ensure!(l.value == want, "compound {c} labeled {}", l.value);
        got.push(format!("{c} -> {}", l.value));
    }
    Ok(got.join(", "))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lr_worst: f64 = 0.0;
    for _ in 0..20 {
        let x: Vec<SparseVector> = (0..12)
            .map(|_| {
                let d: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.5..1.5)).collect();
                SparseVector::from_dense(&d).unwrap()
            })
            .collect();
        let y: Vec<u8> = (0..12).map(|i| (i % 2) as u8).collect();
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-0.5..0.5);
        lr_worst = lr_worst.max(lr_gradient_check(&w, b, &x, &y, 1e-2, 1e-5));
    }
    let mut nn_worst: f64 = 0.0;
    for seed in 0..20u64 {
        let model = CnnLstmModel::init(Shape::small(20), seed);
        let mut ids: Vec<usize> = (0..6).map(|_| rng.gen_range(0..20)).collect();
        ids[5] = 0;
        let err = gradient_check(&model, &ids, (seed % 2) as u8, 1e-5).map_err(|e| e.to_string())?;
        nn_worst = nn_worst.max(err);
    }
    ensure!(lr_worst < 1e-4, "LR max relative error {lr_worst:e}");
    ensure!(nn_worst < 1e-4, "CNN-LSTM max relative error {nn_worst:e}");
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "max relative error LR {lr_worst:.1e}, CNN-LSTM {nn_worst:.1e}"
    ))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..1000 {
        let label = (i % 2) as u8;
        let c = if label == 1 { 2.0 } else { -2.0 };
        x.push(SparseVector::from_dense(&[c + gaussian(&mut rng), c + gaussian(&mut rng)]).unwrap());
        y.push(label);
    }
    let (xtr, xte) = x.split_at(700);
    let (ytr, yte) = y.split_at(700);
    let acc = |p: Vec<u8>| p.iter().zip(yte).filter(|(a, b)| a == b).count() as f64 / yte.len() as f64;
    let lr = fit_lr(xtr, ytr, &LrConfig::default()).map_err(|e| e.to_string())?;
    let svm = fit_svm(xtr, ytr, &SvmConfig::default()).map_err(|e| e.to_string())?;
    let rows = [
        (
            "LR",
            lr.train_accuracy,
            acc(lr.predict(xte).map_err(|e| e.to_string())?),
        ),
        (
            "SVM",
            svm.train_accuracy,
            acc(svm.predict(xte).map_err(|e| e.to_string())?),
        ),
    ];
    for (name, train, test) in rows {
        ensure!(
            train >= 0.99 && test >= 0.95,
            "{name} train {train:.4}, test {test:.4}"
        );
    }
    within(start, Duration::from_secs(30))?;
    Ok(rows
        .iter()
        .map(|(n, tr, te)| format!("{n} train {tr:.4} test {te:.4}"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn text_branch(seed: u64) -> Result<BranchReport, String> {
    let res = TextResources::bundled();
    let posts = synthesize_corpus(
        &SynthSpec::uniform(5000, 0.5, seed),
        &res.dictionary,
        &res.lexicon,
        &SynthTemplates::bundled(),
    )
    .map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::default().with_seed(seed);
    let data = label_posts(&posts, &res, cfg.threshold, LabelUnit::Post).map_err(|e| e.to_string())?;
    run_text_branch(&cfg, &data.examples).map_err(|e| e.to_string())
}

fn accuracy(b: &BranchReport, kind: ModelKind) -> f64 {
    b.model(kind).map_or(f64::NAN, |m| m.overall.accuracy)
}

static TEXT: OnceLock<Result<Vec<(u64, BranchReport)>, String>> = OnceLock::new();

fn text_reports() -> Result<&'static [(u64, BranchReport)], String> {
    TEXT.get_or_init(|| SEEDS.iter().map(|&s| text_branch(s).map(|b| (s, b))).collect())
        .as_deref()
        .map_err(Clone::clone)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let reports = text_reports()?;
    let mut parts = Vec::new();
    for (seed, b) in reports {
        let (lr, svm, bnb) = (
            accuracy(b, ModelKind::Lr),
            accuracy(b, ModelKind::Svm),
            accuracy(b, ModelKind::Bnb),
        );
        ensure!(
            lr >= 0.80 && svm >= 0.80 && lr > bnb && svm > bnb,
            "seed {seed}: LR {lr:.4}, SVM {svm:.4}, BNB {bnb:.4}"
        );
        parts.push(format!("seed {seed}: LR {lr:.3} SVM {svm:.3} BNB {bnb:.3}"));
    }
    within(start, Duration::from_secs(300))?;
    Ok(parts.join("; "))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut tab_max: f64 = 0.0;
    for &seed in &SEEDS {
        let spec = CdcSynthSpec::new(4000, seed);
        let bayes = spec.bayes_rate();
        ensure!(
            (0.55..=0.65).contains(&bayes),
            "seed {seed}: Bayes rate {bayes:.3}"
        );
        let records = synthesize_cdc(&spec).map_err(|e| e.to_string())?;
        let cfg = ExperimentConfig::default().with_seed(seed);
        let b = run_cdc_branch(&cfg, &records).map_err(|e| e.to_string())?;
        ensure!(
            b.models.len() == ModelKind::ALL.len(),
            "seed {seed}: {} models",
            b.models.len()
        );
        let accs: Vec<f64> = b.models.iter().map(|m| m.overall.accuracy).collect();
        let lo = accs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = accs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ensure!(lo >= 0.45 && hi <= 0.70, "seed {seed}: accuracies {accs:?}");
        tab_max = tab_max.max(hi);
        parts.push(format!("seed {seed}: [{lo:.3}, {hi:.3}] bayes {bayes:.3}"));
    }
    let text_min = text_reports()?
        .iter()
        .flat_map(|(_, b)| [accuracy(b, ModelKind::Lr), accuracy(b, ModelKind::Svm)])
        .fold(f64::INFINITY, f64::min);
    ensure!(
        text_min > tab_max,
        "text LR/SVM minimum {text_min:.4} vs tabular maximum {tab_max:.4}"
    );
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{}; text minimum {text_min:.3} > tabular maximum {tab_max:.3}",
        parts.join("; ")
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..20u64 {
        let n = rng.gen_range(30..120);
        let minority = rng.gen_range(3..n / 3);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let mut y: Vec<u8> = (0..n).map(|i| u8::from(i < minority)).collect();
        y.shuffle(&mut rng);
        let r = smote(&x, &y, 5, trial).map_err(|e| e.to_string())?;
        let ones = r.y.iter().filter(|&&l| l == 1).count();
        ensure!(
            2 * ones == r.y.len(),
            "trial {trial}: {ones} of {} positive",
            r.y.len()
        );
        ensure!(
            r.x[..n] == x[..] && r.y[..n] == y[..],
            "trial {trial}: input rows altered"
        );
        ensure!(
            r.synthetic.len() == r.x.len() - n,
            "trial {trial}: provenance count mismatch"
        );
        for (s, row) in r.synthetic.iter().zip(&r.x[n..]) {
            ensure!(
                y[s.base] == 1 && y[s.neighbor] == 1 && s.base != s.neighbor,
                "trial {trial}: non-minority parent"
            );
            ensure!((0.0..=1.0).contains(&s.u), "trial {trial}: u = {}", s.u);
            for ((v, a), b) in row.iter().zip(&x[s.base]).zip(&x[s.neighbor]) {
                ensure!(
                    (v - (a + s.u * (b - a))).abs() <= 1e-12,
                    "trial {trial}: row is not the stated combination"
                );
            }
        }
        ensure!(
            smote(&x, &y, 5, trial).map_err(|e| e.to_string())? == r,
            "trial {trial}: not deterministic"
        );
    }

    let records = synthesize_cdc(&CdcSynthSpec::new(1000, 9)).map_err(|e| e.to_string())?;
    let rows = index_rows(&records);
    let cfg = ExperimentConfig::default().with_seed(9);
    let sp = split_records(&cfg, &rows).map_err(|e| e.to_string())?;
    let (report, trained) = train_cdc(&cfg, &rows, &sp).map_err(|e| e.to_string())?;
    let p = &trained.prepared;
    ensure!(report.synthetic_rows > 0, "pipeline fixture needed no resampling");
    ensure!(
        p.test_y.len() == sp.test_ids.len(),
        "test rows {} vs split {}",
        p.test_y.len(),
        sp.test_ids.len()
    );
    ensure!(
        p.train_y.len() == sp.train_ids.len() + report.synthetic_rows,
        "train rows {} vs {} + {}",
        p.train_y.len(),
        sp.train_ids.len(),
        report.synthetic_rows
    );
    Ok(format!(
        "20 random tables verified; pipeline added {} rows to train, test kept {}",
        report.synthetic_rows,
        p.test_y.len()
    ))
}

fn write_inputs(dir: &Path, seed: u64) -> Result<ExperimentConfig, String> {
    let res = TextResources::bundled();
    let posts = synthesize_corpus(
        &SynthSpec::uniform(2000, 0.5, seed),
        &res.dictionary,
        &res.lexicon,
        &SynthTemplates::bundled(),
    )
    .map_err(|e| e.to_string())?;
    let posts_path = dir.join("posts.csv");
    save_posts(&posts_path, &posts, Format::Csv).map_err(|e| e.to_string())?;
    let cdc_path = dir.join("cdc.csv");
    let records = synthesize_cdc(&CdcSynthSpec::new(1500, seed)).map_err(|e| e.to_string())?;
    write_cdc(File::create(&cdc_path).map_err(|e| e.to_string())?, &records).map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::default().with_seed(seed);
    cfg.posts = Some(posts_path);
    cfg.cdc = Some(cdc_path);
    cfg.out = dir.join("out");
    Ok(cfg)
}

fn params(models: &[cvdrisk::linear_models::Model]) -> Result<Vec<String>, String> {
    models
        .iter()
        .map(|m| m.to_json().map_err(|e| e.to_string()))
        .collect()
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = write_inputs(dir.path(), 10)?;
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let report = run(&cfg).map_err(|e| e.to_string())?;
        emit(&report, &cfg.out).map_err(|e| e.to_string())?;
        bytes.push(std::fs::read(cfg.out.join("report.json")).map_err(|e| e.to_string())?);
    }
    ensure!(bytes[0] == bytes[1], "report.json differs between runs");

    let res = TextResources::bundled();
    let posts = synthesize_corpus(
        &SynthSpec::uniform(1500, 0.5, 10),
        &res.dictionary,
        &res.lexicon,
        &SynthTemplates::bundled(),
    )
    .map_err(|e| e.to_string())?;
    let data = label_posts(&posts, &res, cfg.threshold, LabelUnit::Post).map_err(|e| e.to_string())?;
    let sp = split_records(&cfg, &data.examples).map_err(|e| e.to_string())?;
    let (_, base) = train_text(&cfg, &data.examples, &sp).map_err(|e| e.to_string())?;
    let base_params = params(&base.models)?;
    let victims: BTreeSet<usize> = [
        0,
        sp.test_ids.len() / 3,
        2 * sp.test_ids.len() / 3,
        sp.test_ids.len() - 1,
    ]
    .into();
    for &v in &victims {
        let id = &sp.test_ids[v];
        let kept: Vec<_> = data.examples.iter().filter(|e| e.id() != id).cloned().collect();
        let (_, again) = train_text(&cfg, &kept, &sp).map_err(|e| e.to_string())?;
        ensure!(
            again.prepared.vocab == base.prepared.vocab,
            "text vocabulary changed after deleting {id}"
        );
        ensure!(
            params(&again.models)? == base_params,
            "text parameters changed after deleting {id}"
        );
    }

    let records = synthesize_cdc(&CdcSynthSpec::new(1000, 10)).map_err(|e| e.to_string())?;
    let rows = index_rows(&records);
    let csp = split_records(&cfg, &rows).map_err(|e| e.to_string())?;
    let (_, cbase) = train_cdc(&cfg, &rows, &csp).map_err(|e| e.to_string())?;
    let cbase_params = params(&cbase.models)?;
    for v in [0, csp.test_ids.len() / 2, csp.test_ids.len() - 1] {
        let id = &csp.test_ids[v];
        let kept: Vec<_> = rows.iter().filter(|r| r.id() != id).cloned().collect();
        let (_, again) = train_cdc(&cfg, &kept, &csp).map_err(|e| e.to_string())?;
        ensure!(
            again.prepared.vocab == cbase.prepared.vocab,
            "tabular vocabulary changed after deleting {id}"
        );
        ensure!(
            params(&again.models)? == cbase_params,
            "tabular parameters changed after deleting {id}"
        );
    }
    Ok(format!(
        "report.json identical over two runs ({} bytes); {} text and 3 tabular test-row deletions left training untouched",
        bytes[0].len(),
        victims.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("metric oracle equivalence", criterion_1),
        ("table rendering fidelity", criterion_2),
        ("sentiment engine conformance", criterion_3),
        ("threshold semantics", criterion_4),
        ("gradient checks", criterion_5),
        ("separable learning", criterion_6),
        ("text regime replication", criterion_7),
        ("tabular regime replication", criterion_8),
        ("SMOTE invariants", criterion_9),
        ("determinism and no leakage", criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS ({name}, {secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL ({name}, {secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
