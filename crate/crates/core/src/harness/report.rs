//! CSV tables and SVG line charts for finished runs.
//!
//! The CSVs are the machine-readable contract. The SVGs are a quick visual
//! check and carry no information the CSVs lack.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::attack::AdversarialPoint;
use crate::error::{io_err, Error, Result};

use super::config::Method;
use super::train::EpochMetrics;

/// Everything reported about one (method, pair) training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    /// e.g. `0v1`, or `iris-0v1` when several datasets share a report.
    pub pair: String,
    pub metrics: Vec<EpochMetrics>,
    pub adversarial: Vec<AdversarialPoint>,
}

pub fn write_metrics_csv(runs: &[RunRecord]) -> String {
    let mut out = String::from("epoch,split,method,pair,accuracy\n");
    for run in runs {
        for m in &run.metrics {
            for (split, acc) in [("train", m.train_accuracy), ("test", m.test_accuracy)] {
                writeln!(out, "{},{split},{},{},{acc}", m.epoch, run.method, run.pair).unwrap();
            }
        }
    }
    out
}

pub fn write_adversarial_csv(runs: &[RunRecord]) -> String {
    let mut out = String::from("epsilon,method,pair,adversarial_accuracy\n");
    for run in runs {
        for p in &run.adversarial {
            writeln!(
                out,
                "{},{},{},{}",
                p.epsilon, run.method, run.pair, p.accuracy
            )
            .unwrap();
        }
    }
    out
}

/// Side-by-side adversarial accuracy per pair and strength.
pub fn comparison_table(runs: &[RunRecord]) -> String {
    let mut rows: BTreeMap<(String, u64), [Option<f64>; 2]> = BTreeMap::new();
    for run in runs {
        let col = match run.method {
            Method::Stdp => 0,
            Method::Bp => 1,
        };
        for p in &run.adversarial {
            rows.entry((run.pair.clone(), p.epsilon.to_bits()))
                .or_default()[col] = Some(p.accuracy);
        }
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    let mut out = format!(
        "{:<10} {:>9} {:>8} {:>8}  winner\n",
        "pair", "eps*255", "stdp", "bp"
    );
    for ((pair, eps), [stdp, bp]) in rows {
        let winner = match (stdp, bp) {
            (Some(s), Some(b)) if s > b => "stdp",
            (Some(s), Some(b)) if b > s => "bp",
            (Some(_), Some(_)) => "tie",
            _ => "",
        };
        let eps = f64::from_bits(eps) * 255.0;
        writeln!(
            out,
            "{pair:<10} {eps:>9.1} {:>8} {:>8}  {winner}",
            fmt(stdp),
            fmt(bp)
        )
        .unwrap();
    }
    out
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (64.0, 150.0, 36.0, 48.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    // Each chart gets its own y range.
    let pad = ((y1 - y0) * 0.05).max(1e-3);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#,
        w / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<path d="M{left},{top} V{} H{}" fill="none" stroke="black"/>"#,
        h - bottom,
        w - right
    )
    .unwrap();
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.3}</text>"#,
            left - 6.0,
            sy(y) + 4.0
        )
        .unwrap();
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.3}</text>"#,
            sx(x),
            h - bottom + 16.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (left + w - right) / 2.0,
        h - 10.0
    )
    .unwrap();
    writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#, h / 2.0, h / 2.0).unwrap();
    for (k, series) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        )
        .unwrap();
        let ly = top + 16.0 * k as f64;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            w - right + 10.0,
            w - right + 30.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            w - right + 34.0,
            ly + 4.0,
            series.name
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, body: &str) -> Result<()> {
    std::fs::write(&path, body).map_err(io_err(path))
}

/// Writes `metrics.csv`, `adversarial.csv` and one pair of SVG charts per
/// pair into `out_dir`. Returns the paths written.
pub fn emit_reports(runs: &[RunRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if runs.is_empty() || runs.iter().any(|r| r.metrics.is_empty()) {
        return Err(Error::EmptyDataset("no epoch metrics to report".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    let mut emit = |name: String, body: String| -> Result<()> {
        let path = out_dir.join(name);
        write(path.clone(), &body)?;
        written.push(path);
        Ok(())
    };
    emit("metrics.csv".into(), write_metrics_csv(runs))?;
    emit("adversarial.csv".into(), write_adversarial_csv(runs))?;

    let mut pairs: Vec<&str> = Vec::new();
    for run in runs {
        if !pairs.contains(&run.pair.as_str()) {
            pairs.push(&run.pair);
        }
    }
    for pair in pairs {
        let of_pair: Vec<&RunRecord> = runs.iter().filter(|r| r.pair == pair).collect();
        let mut acc = Vec::new();
        for run in &of_pair {
            for (split, pick) in [
                (
                    "train",
                    (|m: &EpochMetrics| m.train_accuracy) as fn(&EpochMetrics) -> f64,
                ),
                ("test", |m: &EpochMetrics| m.test_accuracy),
            ] {
                acc.push(Series {
                    name: format!("{} {split}", run.method),
                    points: run
                        .metrics
                        .iter()
                        .map(|m| (m.epoch as f64, pick(m)))
                        .collect(),
                });
            }
        }
        emit(
            format!("metrics_{pair}.svg"),
            line_chart(
                &format!("accuracy vs epoch, {pair}"),
                "epoch",
                "accuracy",
                &acc,
            ),
        )?;
        let adv: Vec<Series> = of_pair
            .iter()
            .filter(|r| !r.adversarial.is_empty())
            .map(|r| Series {
                name: r.method.to_string(),
                points: r
                    .adversarial
                    .iter()
                    .map(|p| (p.epsilon * 255.0, p.accuracy))
                    .collect(),
            })
            .collect();
        if !adv.is_empty() {
            emit(
                format!("adversarial_{pair}.svg"),
                line_chart(
                    &format!("FGSM accuracy, {pair}"),
                    "epsilon x 255",
                    "accuracy",
                    &adv,
                ),
            )?;
        }
    }
    Ok(written)
}
