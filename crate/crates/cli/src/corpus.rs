//! Batch analysis of project directories and per-pattern aggregation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use botlint_core::patterns::{Category, PATTERNS};
use botlint_core::{analyze, build_ast, load_container, IngestError, Issue, Project, ProjectMetrics, Registry};
use rayon::prelude::*;
use serde::Serialize;
use walkdir::WalkDir;

#[derive(Debug, Clone)]
pub struct CorpusOptions<'r> {
    pub registry: &'r Registry,
    pub include: Vec<Category>,
    pub filter_robot_code: bool,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl<'r> CorpusOptions<'r> {
    pub fn new(registry: &'r Registry) -> Self {
        CorpusOptions {
            registry,
            include: Category::ALL.to_vec(),
            filter_robot_code: false,
            jobs: 0,
        }
    }
}

/// Findings of one successfully analyzed project.
#[derive(Debug, Clone)]
pub struct ProjectOutcome {
    pub path: PathBuf,
    pub metrics: ProjectMetrics,
    pub issues: Vec<Issue>,
    pub warnings: usize,
}

impl ProjectOutcome {
    pub fn count(&self, pattern_id: &str) -> usize {
        self.issues.iter().filter(|i| i.pattern_id == pattern_id).count()
    }

    pub fn count_category(&self, category: Category) -> usize {
        self.issues.iter().filter(|i| i.category == category).count()
    }
}

#[derive(Debug)]
pub enum Skip {
    Failed(IngestError),
    /// No robot actor carries a script.
    NoRobotCode,
}

#[derive(Debug, Default)]
pub struct CorpusRun {
    /// Analyzed projects in path order.
    pub projects: Vec<ProjectOutcome>,
    pub skipped: Vec<(PathBuf, Skip)>,
}

/// Project files below `dir`, sorted by path.
pub fn discover(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{}: not a directory", dir.display()),
        ));
    }
    let mut files: Vec<PathBuf> = WalkDir::new(dir)
        .into_iter()
        .filter_map(|entry| match entry {
            Ok(e) => Some(e),
            Err(err) => {
                log::warn!("skipping unreadable entry: {err}");
                None
            }
        })
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| is_project_file(p))
        .collect();
    files.sort();
    Ok(files)
}

pub fn is_project_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json") || e.eq_ignore_ascii_case("zip"))
}

pub fn has_robot_code(project: &Project) -> bool {
    project
        .actors
        .iter()
        .any(|a| a.device.is_some() && !a.scripts.is_empty())
}

fn analyze_one(path: &Path, opts: &CorpusOptions) -> Result<ProjectOutcome, Skip> {
    let raw = load_container(path).map_err(Skip::Failed)?;
    let project = build_ast(&raw, opts.registry);
    if opts.filter_robot_code && !has_robot_code(&project) {
        return Err(Skip::NoRobotCode);
    }
    for w in &project.warnings {
        log::warn!("{}: {} block {}: {:?}", path.display(), w.target, w.block_id, w.kind);
    }
    let warnings = project.warnings.len();
    let analysis = analyze(project, &opts.include);
    Ok(ProjectOutcome {
        path: path.to_path_buf(),
        metrics: analysis.metrics,
        issues: analysis.issues,
        warnings,
    })
}

/// Analyzes `paths` on a worker pool. The result is ordered by path no
/// matter how the input was ordered.
pub fn analyze_files(paths: &[PathBuf], opts: &CorpusOptions) -> CorpusRun {
    let mut paths = paths.to_vec();
    paths.sort();
    paths.dedup();
    let work = || -> Vec<(PathBuf, Result<ProjectOutcome, Skip>)> {
        paths
            .par_iter()
            .map(|p| (p.clone(), analyze_one(p, opts)))
            .collect()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build() {
        Ok(pool) => pool.install(work),
        Err(err) => {
            log::warn!("falling back to the global pool: {err}");
            work()
        }
    };
    let mut run = CorpusRun::default();
    for (path, result) in results {
        match result {
            Ok(outcome) => run.projects.push(outcome),
            Err(skip) => {
                match &skip {
                    Skip::Failed(err) => log::warn!("skipped {err}"),
                    Skip::NoRobotCode => log::info!("skipped {}: no robot code", path.display()),
                }
                run.skipped.push((path, skip));
            }
        }
    }
    run
}

pub fn analyze_dir(dir: &Path, opts: &CorpusOptions) -> std::io::Result<CorpusRun> {
    Ok(analyze_files(&discover(dir)?, opts))
}

// ---------------------------------------------------------------------------
// Aggregation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternAggregate {
    /// A pattern id, or `total` for a category's summary row.
    pub pattern_id: String,
    pub name: String,
    pub category: Category,
    pub instance_count: usize,
    pub project_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_wmc_of_affected: Option<f64>,
}

pub const TOTAL_ID: &str = "total";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusTable {
    pub projects_analyzed: usize,
    pub projects_skipped: usize,
    pub rows: Vec<PatternAggregate>,
}

fn row(pattern_id: &str, name: &str, category: Category, hits: &[(usize, usize)]) -> PatternAggregate {
    // hits: (instances, wmc) per project with at least one instance
    let instance_count = hits.iter().map(|h| h.0).sum();
    let project_count = hits.len();
    let mean_wmc_of_affected =
        (project_count > 0).then(|| hits.iter().map(|h| h.1 as f64).sum::<f64>() / project_count as f64);
    PatternAggregate {
        pattern_id: pattern_id.to_string(),
        name: name.to_string(),
        category,
        instance_count,
        project_count,
        mean_wmc_of_affected,
    }
}

/// One row per pattern of each included category, alphabetical by name,
/// followed by that category's total row.
pub fn aggregate(run: &CorpusRun, include: &[Category]) -> CorpusTable {
    let mut per_pattern: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    let mut per_category: BTreeMap<Category, Vec<(usize, usize)>> = BTreeMap::new();
    for project in &run.projects {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for issue in &project.issues {
            *counts.entry(issue.pattern_id.as_str()).or_default() += 1;
        }
        for (id, n) in counts {
            per_pattern.entry(id).or_default().push((n, project.metrics.wmc));
        }
        for category in include {
            let n = project.count_category(*category);
            if n > 0 {
                per_category.entry(*category).or_default().push((n, project.metrics.wmc));
            }
        }
    }
    let mut rows = Vec::new();
    for category in Category::ALL {
        if !include.contains(&category) {
            continue;
        }
        let mut patterns: Vec<_> = PATTERNS.iter().filter(|p| p.category == category).collect();
        patterns.sort_by_key(|p| p.name);
        for p in patterns {
            let hits = per_pattern.get(p.id).map_or(&[][..], Vec::as_slice);
            rows.push(row(p.id, p.name, category, hits));
        }
        let hits = per_category.get(&category).map_or(&[][..], Vec::as_slice);
        rows.push(row(TOTAL_ID, "Total", category, hits));
    }
    CorpusTable {
        projects_analyzed: run.projects.len(),
        projects_skipped: run.skipped.len(),
        rows,
    }
}

fn format_mean(mean: Option<f64>) -> String {
    mean.map(|m| format!("{m:.2}")).unwrap_or_default()
}

impl CorpusTable {
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(7);
        let mut out = format!(
            "{} projects analyzed, {} skipped\n",
            self.projects_analyzed, self.projects_skipped
        );
        let mut current = None;
        for r in &self.rows {
            if current != Some(r.category) {
                out.push_str(&format!(
                    "\n{:>width$}  {:>10}  {:>10}  {:>9}\n",
                    r.category.label(),
                    "# Patterns",
                    "# Projects",
                    "Avg. WMC"
                ));
                current = Some(r.category);
            }
            out.push_str(&format!(
                "{:>width$}  {:>10}  {:>10}  {:>9}\n",
                r.name,
                r.instance_count,
                r.project_count,
                format_mean(r.mean_wmc_of_affected)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "category",
            "pattern_id",
            "name",
            "instance_count",
            "project_count",
            "mean_wmc_of_affected",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.category.as_str(),
                &r.pattern_id,
                &r.name,
                &r.instance_count.to_string(),
                &r.project_count.to_string(),
                &format_mean(r.mean_wmc_of_affected),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
