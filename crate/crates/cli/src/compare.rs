//! Two-corpus comparison of per-project metrics.

use std::path::PathBuf;

use botlint_core::patterns::{pattern, Category};
use botlint_core::ProjectMetrics;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{CorpusRun, ProjectOutcome};
use crate::stats::{mann_whitney_u, vargha_delaney_a12, StatsError};

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("{}: corpus contains no analyzable project", .0.display())]
    EmptyCorpus(PathBuf),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Size metrics followed by per-category issue counts.
pub const DEFAULT_METRICS: [&str; 8] = [
    "block_count",
    "script_count",
    "wmc",
    "longest_script",
    "most_complex_script",
    "bugs",
    "smells",
    "perfumes",
];

/// A per-project quantity to compare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Metric {
    Size(&'static str),
    Category(Category),
    Pattern(&'static str),
}

impl Metric {
    /// Accepts a size metric name, a category (`bugs`, `smells`, `perfumes`)
    /// or a pattern id.
    pub fn parse(name: &str) -> Result<Metric, CompareError> {
        if let Some(size) = ProjectMetrics::NAMES.iter().find(|n| **n == name) {
            return Ok(Metric::Size(size));
        }
        if let Some(p) = pattern(name) {
            return Ok(Metric::Pattern(p.id));
        }
        name.parse::<Category>()
            .map(Metric::Category)
            .map_err(|_| CompareError::UnknownMetric(name.to_string()))
    }

    pub fn is_count(&self) -> bool {
        !matches!(self, Metric::Size(_))
    }

    /// The metric's value for one project. With `per_block`, issue counts
    /// are divided by the project's block count; size metrics are unchanged.
    pub fn value(&self, project: &ProjectOutcome, per_block: bool) -> f64 {
        let raw = match self {
            Metric::Size(name) => project.metrics.get(name).expect("validated metric name") as f64,
            Metric::Category(c) => project.count_category(*c) as f64,
            Metric::Pattern(id) => project.count(id) as f64,
        };
        if per_block && self.is_count() {
            match project.metrics.block_count {
                0 => 0.0,
                blocks => raw / blocks as f64,
            }
        } else {
            raw
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub metric: String,
    pub n1: usize,
    pub n2: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub u_statistic: f64,
    pub p_value: f64,
    pub a12: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn compare_samples(metric: &str, a: &[f64], b: &[f64]) -> Result<ComparisonResult, StatsError> {
    let mw = mann_whitney_u(a, b)?;
    let a12 = vargha_delaney_a12(a, b)?;
    let pairs = (a.len() * b.len()) as f64;
    assert!(
        (mw.u - a12 * pairs).abs() <= 1e-9 * pairs.max(1.0),
        "rank-sum U {} disagrees with pair count {}",
        mw.u,
        a12 * pairs
    );
    Ok(ComparisonResult {
        metric: metric.to_string(),
        n1: a.len(),
        n2: b.len(),
        mean_a: mean(a),
        mean_b: mean(b),
        u_statistic: mw.u,
        p_value: mw.p_value,
        a12,
    })
}

pub fn compare_runs(
    (dir_a, a): (&PathBuf, &CorpusRun),
    (dir_b, b): (&PathBuf, &CorpusRun),
    metrics: &[String],
    per_block: bool,
) -> Result<Vec<ComparisonResult>, CompareError> {
    let parsed = metrics
        .iter()
        .map(|m| Metric::parse(m))
        .collect::<Result<Vec<_>, _>>()?;
    if a.projects.is_empty() {
        return Err(CompareError::EmptyCorpus(dir_a.clone()));
    }
    if b.projects.is_empty() {
        return Err(CompareError::EmptyCorpus(dir_b.clone()));
    }
    let mut rows = Vec::new();
    for (name, metric) in metrics.iter().zip(&parsed) {
        let xs: Vec<f64> = a.projects.iter().map(|p| metric.value(p, per_block)).collect();
        let ys: Vec<f64> = b.projects.iter().map(|p| metric.value(p, per_block)).collect();
        let label = if per_block && metric.is_count() {
            format!("{name}/block")
        } else {
            name.clone()
        };
        rows.push(compare_samples(&label, &xs, &ys)?);
    }
    Ok(rows)
}

/// p-values below 0.001 print as `<0.001`.
fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

pub fn to_text(rows: &[ComparisonResult]) -> String {
    let width = rows.iter().map(|r| r.metric.len()).max().unwrap_or(0).max(6);
    let mut out = format!(
        "{:<width$}  {:>6}  {:>6}  {:>10}  {:>10}  {:>10}  {:>8}  {:>5}\n",
        "metric", "n1", "n2", "mean A", "mean B", "U", "p-value", "A12"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>6}  {:>6}  {:>10.2}  {:>10.2}  {:>10.1}  {:>8}  {:>5.2}\n",
            r.metric,
            r.n1,
            r.n2,
            r.mean_a,
            r.mean_b,
            r.u_statistic,
            format_p(r.p_value),
            r.a12
        ));
    }
    out
}

pub fn to_csv(rows: &[ComparisonResult]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["metric", "n1", "n2", "mean_a", "mean_b", "u_statistic", "p_value", "a12"])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
