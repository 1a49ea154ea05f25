use std::fmt::Write as _;
use std::path::Path;

use super::{BranchReport, ExperimentReport, RatioRow};
use crate::corpus::State;
use crate::error::{Error, Result};
use crate::linear_models::ModelKind;
use crate::metrics::{metrics_table, MetricsReport, MetricsTable};

/// Row label of a per-state metrics row, e.g. `SVM (WV)`.
pub fn state_label(model: ModelKind, state: State) -> String {
    format!("{} ({})", model.name(), state.code())
}

fn table(branch: &BranchReport) -> Result<MetricsTable> {
    let mut rows: Vec<(String, MetricsReport)> = Vec::new();
    for m in &branch.models {
        rows.push((m.model.name().to_string(), m.overall));
        for s in &m.per_state {
            rows.push((state_label(m.model, s.state), s.metrics));
        }
    }
    metrics_table(&rows)
}

/// One overall row per model followed by its per-state rows.
pub fn metrics_csv(branch: &BranchReport) -> Result<String> {
    Ok(table(branch)?.to_csv())
}

pub fn metrics_text(report: &ExperimentReport) -> Result<String> {
    let mut out = String::new();
    for (title, branch) in [
        ("Text branch (sentiment labels)", &report.text),
        ("Demographic branch (CVD records)", &report.cdc),
    ] {
        if let Some(b) = branch {
            let _ = writeln!(out, "{title}: {} train, {} test\n", b.n_train, b.n_test);
            out.push_str(&table(b)?.to_text());
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn ratios_csv(rows: &[RatioRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["state", "predicted_rate", "actual_rate", "ratio"])
        .expect("in-memory write");
    for r in rows {
        let ratio = r.ratio.map_or("undefined".to_string(), |v| v.to_string());
        w.write_record([
            r.state.code().to_string(),
            r.predicted.to_string(),
            r.actual.to_string(),
            ratio,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

const PALETTE: [&str; 5] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Series {
    name: String,
    values: Vec<Option<f64>>,
}

/// Grouped bar chart: one group per category, one bar per series. Missing
/// values leave a gap.
fn bar_chart(title: &str, y_label: &str, categories: &[&str], series: &[Series], y_max: f64) -> String {
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 60.0);
    let bar = 10.0;
    let group = bar * series.len().max(1) as f64 + 8.0;
    let plot_w = group * categories.len().max(1) as f64;
    let plot_h = 240.0;
    let width = left + plot_w + right;
    let height = top + plot_h + bottom + 18.0 * series.len() as f64;
    let y = |v: f64| top + plot_h - plot_h * (v / y_max).clamp(0.0, 1.0);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#dddddd"/>"##,
            left + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            left - 4.0,
            yy + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(y_label)
    );
    for (ci, cat) in categories.iter().enumerate() {
        let gx = left + group * ci as f64 + 4.0;
        for (si, ser) in series.iter().enumerate() {
            if let Some(v) = ser.values[ci] {
                let yy = y(v);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{yy:.1}" width="{bar:.1}" height="{:.1}" fill="{}"><title>{} {}: {v:.4}</title></rect>"#,
                    gx + bar * si as f64,
                    top + plot_h - yy,
                    PALETTE[si % PALETTE.len()],
                    escape(&ser.name),
                    escape(cat)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + (group - 8.0) / 2.0,
            top + plot_h + 16.0,
            escape(cat)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left:.1}" y1="{top:.1}" x2="{left:.1}" y2="{:.1}" stroke="black"/>"#,
        top + plot_h
    );
    for (si, ser) in series.iter().enumerate() {
        let ly = top + plot_h + 36.0 + 18.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{left:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"#,
            ly - 9.0,
            PALETTE[si % PALETTE.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
            left + 16.0,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn states_of(branch: &BranchReport) -> Vec<State> {
    State::ALL
        .into_iter()
        .filter(|s| {
            branch
                .models
                .iter()
                .any(|m| m.per_state.iter().any(|p| p.state == *s))
        })
        .collect()
}

/// Per-state test accuracy, one bar per model.
pub fn accuracy_svg(branch: &BranchReport, title: &str) -> String {
    let states = states_of(branch);
    let codes: Vec<&str> = states.iter().map(|s| s.code()).collect();
    let series: Vec<Series> = branch
        .models
        .iter()
        .map(|m| Series {
            name: m.model.name().to_string(),
            values: states
                .iter()
                .map(|s| {
                    m.per_state
                        .iter()
                        .find(|p| p.state == *s)
                        .map(|p| p.metrics.accuracy)
                })
                .collect(),
        })
        .collect();
    bar_chart(title, "test accuracy", &codes, &series, 1.0)
}

/// Predicted over actual prevalence per state. Undefined ratios are left
/// blank.
pub fn ratio_svg(rows: &[RatioRow], model: ModelKind) -> String {
    let codes: Vec<&str> = rows.iter().map(|r| r.state.code()).collect();
    let top = rows.iter().filter_map(|r| r.ratio).fold(1.0f64, f64::max);
    let y_max = (top * 2.0).ceil() / 2.0;
    let series = [Series {
        name: format!("{} predicted / actual", model.name()),
        values: rows.iter().map(|r| r.ratio).collect(),
    }];
    bar_chart(
        "Predicted vs actual CVD prevalence",
        "ratio",
        &codes,
        &series,
        y_max,
    )
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the report files into `dir`, creating it if needed:
/// `report.json`, `metrics.txt`, `metrics.csv` (text branch),
/// `metrics_cdc.csv` (demographic branch), `ratios.csv`,
/// `accuracy_by_state.svg`, `accuracy_by_state_cdc.svg` and
/// `ratio_by_state.svg`. Files for absent branches are not written.
pub fn emit(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(dir, e))
        .map_err(|e| e.at_stage("emit"))?;
    let go = || -> Result<()> {
        write(dir, "report.json", &report.to_json()?)?;
        write(dir, "metrics.txt", &metrics_text(report)?)?;
        if let Some(t) = &report.text {
            write(dir, "metrics.csv", &metrics_csv(t)?)?;
            write(
                dir,
                "accuracy_by_state.svg",
                &accuracy_svg(t, "Per-state test accuracy, text branch"),
            )?;
        }
        if let Some(c) = &report.cdc {
            write(dir, "metrics_cdc.csv", &metrics_csv(c)?)?;
            write(
                dir,
                "accuracy_by_state_cdc.svg",
                &accuracy_svg(c, "Per-state test accuracy, demographic branch"),
            )?;
        }
        if let Some(model) = report.ratio_model {
            write(dir, "ratios.csv", &ratios_csv(&report.ratios))?;
            write(dir, "ratio_by_state.svg", &ratio_svg(&report.ratios, model))?;
        }
        Ok(())
    };
    go().map_err(|e| e.at_stage("emit"))
}
