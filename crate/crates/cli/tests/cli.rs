use std::path::Path;
use std::process::{Command, Output};

fn cvdrisk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvdrisk"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, posts: &str, cdc: &str) {
    let out = cvdrisk(dir, &["synth", "--n-posts", posts, "--n-cdc", cdc, "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn fast_config(dir: &Path) {
    std::fs::write(
        dir.join("fast.conf"),
        "posts = posts.csv\ncdc = cdc.csv\nnn.epochs = 1\ngbt.rounds = 10\n",
    )
    .unwrap();
}

#[test]
fn run_writes_every_report_file() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "1500", "1200");
    fast_config(dir.path());
    let out = cvdrisk(
        dir.path(),
        &["run", "--config", "fast.conf", "--out", "res", "--seed", "5"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Test Accuracy"));
    for f in [
        "report.json",
        "metrics.csv",
        "metrics_cdc.csv",
        "metrics.txt",
        "ratios.csv",
        "ratio_by_state.svg",
    ] {
        assert!(dir.path().join("res").join(f).is_file(), "{f}");
    }

    let cmp = cvdrisk(
        dir.path(),
        &[
            "compare",
            "--report",
            "res/report.json",
            "--model",
            "lr",
            "--out",
            "cmp",
        ],
    );
    assert_eq!(
        cmp.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&cmp.stderr)
    );
    let ratios = std::fs::read_to_string(dir.path().join("cmp/ratios.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 19);
    assert!(ratios.starts_with("state,predicted_rate,actual_rate,ratio\nAL,"));
}

#[test]
fn train_then_evaluate_reuses_saved_models() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "1200", "900");
    fast_config(dir.path());
    let common = ["--config", "fast.conf", "--models", "lr,svm", "--out", "m"];
    let train = cvdrisk(dir.path(), &[&["train"][..], &common].concat());
    assert_eq!(
        train.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&train.stderr)
    );
    assert!(dir.path().join("m/models/text-lr.json").is_file());
    assert!(dir.path().join("m/models/cdc-svm.json").is_file());
    let eval = cvdrisk(dir.path(), &[&["evaluate"][..], &common].concat());
    assert_eq!(
        eval.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&eval.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("m/metrics.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("LR,")));

    let run = cvdrisk(
        dir.path(),
        &[&["run"][..], &common[..4], &["--out", "r"]].concat(),
    );
    assert_eq!(run.status.code(), Some(0));
    let from_run = std::fs::read_to_string(dir.path().join("r/metrics.csv")).unwrap();
    assert_eq!(csv, from_run);
}

#[test]
fn ingest_and_label_report_counts() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "300", "100");
    let ingest = cvdrisk(dir.path(), &["ingest", "--posts", "posts.csv"]);
    assert_eq!(ingest.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ingest.stdout).contains("loaded 300"));
    let label = cvdrisk(dir.path(), &["label", "--posts", "posts.csv", "--out", "lab"]);
    assert_eq!(label.status.code(), Some(0));
    let labels = std::fs::read_to_string(dir.path().join("lab/labels.csv")).unwrap();
    assert!(labels.starts_with("id,state,user_id,compound,label,keywords\n"));
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "400", "100");

    let bad_split = cvdrisk(dir.path(), &["run", "--posts", "posts.csv", "--split", "1.5"]);
    assert_eq!(bad_split.status.code(), Some(2));
    let bad_model = cvdrisk(
        dir.path(),
        &["run", "--posts", "posts.csv", "--models", "catboost"],
    );
    assert_eq!(bad_model.status.code(), Some(2));
    let bad_key = dir.path().join("bad.conf");
    std::fs::write(&bad_key, "learning_rate = 3\n").unwrap();
    let out = cvdrisk(dir.path(), &["run", "--config", "bad.conf"]);
    assert_eq!(out.status.code(), Some(2));

    let missing = cvdrisk(dir.path(), &["run", "--posts", "absent.csv"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("stage load"));

    let single = cvdrisk(
        dir.path(),
        &[
            "run",
            "--posts",
            "posts.csv",
            "--threshold",
            "-1.0",
            "--models",
            "lr",
        ],
    );
    assert_eq!(single.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&single.stderr).contains("stage fit"));
}
