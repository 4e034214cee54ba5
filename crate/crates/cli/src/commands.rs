//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use botlint_core::patterns::Category;
use botlint_core::report::{Format, Report};
use botlint_core::{analyze, build_ast, load_container, HintCatalog, ProjectMetrics, Registry};
use clap::{Args, Parser, Subcommand};

use crate::compare::{self, DEFAULT_METRICS};
use crate::corpus::{self, CorpusOptions, CorpusRun};

/// Exit status of `check` when no bug pattern was found.
pub const EXIT_CLEAN: u8 = 0;
pub const EXIT_BUGS: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "botlint", version, about = "Linter for mBlock Codey Rocky and mBot programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true, default_value = "text")]
    pub format: Format,
    /// Comma-separated categories: bugs, smells, perfumes.
    #[arg(long, global = true, value_delimiter = ',', default_value = "bugs,smells,perfumes")]
    pub include: Vec<Category>,
    #[arg(long, global = true, env = "BOTLINT_LANG", default_value = "en")]
    pub lang: String,
    /// Opcode table replacing the built-in one.
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
    /// Hint catalog replacing the built-in one.
    #[arg(long, global = true)]
    pub hints: Option<PathBuf>,
    /// Skip projects whose robot actors contain no scripts.
    #[arg(long, global = true)]
    pub filter_robot_code: bool,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for directory runs; 0 uses all cores.
    #[arg(long, short, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one project and report its findings.
    Check { path: PathBuf },
    /// Analyze every project below a directory and tabulate pattern counts.
    Corpus { dir: PathBuf },
    /// Print size and complexity metrics of a project or a directory.
    Metrics { path: PathBuf },
    /// Compare two corpora metric by metric.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// Comma-separated metrics, categories or pattern ids.
        #[arg(long = "metric", value_delimiter = ',')]
        metrics: Vec<String>,
        /// Divide issue counts by the project's block count.
        #[arg(long)]
        per_block: bool,
    },
}

/// Loaded registry and hint catalog, borrowed from the built-ins unless
/// overridden on the command line.
struct Tables {
    registry: std::borrow::Cow<'static, Registry>,
    hints: std::borrow::Cow<'static, HintCatalog>,
}

impl Tables {
    fn load(opts: &GlobalOpts) -> Result<Tables> {
        let registry = match &opts.registry {
            Some(p) => std::borrow::Cow::Owned(
                Registry::load(p).with_context(|| format!("loading registry {}", p.display()))?,
            ),
            None => std::borrow::Cow::Borrowed(Registry::builtin()),
        };
        let hints = match &opts.hints {
            Some(p) => std::borrow::Cow::Owned(
                HintCatalog::load(p).with_context(|| format!("loading hints {}", p.display()))?,
            ),
            None => std::borrow::Cow::Borrowed(HintCatalog::builtin()),
        };
        Ok(Tables { registry, hints })
    }
}

fn emit(opts: &GlobalOpts, text: &str) -> Result<()> {
    match &opts.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let opts = &cli.opts;
    let tables = Tables::load(opts)?;
    match &cli.command {
        Command::Check { path } => check(path, opts, &tables),
        Command::Corpus { dir } => {
            let run = corpus::analyze_dir(dir, &corpus_options(opts, &tables))?;
            let table = corpus::aggregate(&run, &opts.include);
            let text = match opts.format {
                Format::Text => table.to_text(),
                Format::Json => table.to_json(),
                Format::Csv => table.to_csv()?,
            };
            emit(opts, &text)?;
            Ok(EXIT_CLEAN)
        }
        Command::Metrics { path } => {
            let rows = metrics_rows(path, opts, &tables)?;
            emit(opts, &render_metrics(&rows, opts.format)?)?;
            Ok(EXIT_CLEAN)
        }
        Command::Compare {
            dir_a,
            dir_b,
            metrics,
            per_block,
        } => {
            let metrics: Vec<String> = if metrics.is_empty() {
                DEFAULT_METRICS.iter().map(|s| s.to_string()).collect()
            } else {
                metrics.clone()
            };
            // counts need every category regardless of --include
            let mut copts = corpus_options(opts, &tables);
            copts.include = Category::ALL.to_vec();
            let a = corpus::analyze_dir(dir_a, &copts)?;
            let b = corpus::analyze_dir(dir_b, &copts)?;
            let rows = compare::compare_runs((dir_a, &a), (dir_b, &b), &metrics, *per_block)?;
            let text = match opts.format {
                Format::Text => compare::to_text(&rows),
                Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
                Format::Csv => compare::to_csv(&rows)?,
            };
            emit(opts, &text)?;
            Ok(EXIT_CLEAN)
        }
    }
}

fn corpus_options<'t>(opts: &GlobalOpts, tables: &'t Tables) -> CorpusOptions<'t> {
    CorpusOptions {
        registry: &tables.registry,
        include: opts.include.clone(),
        filter_robot_code: opts.filter_robot_code,
        jobs: opts.jobs,
    }
}

fn check(path: &Path, opts: &GlobalOpts, tables: &Tables) -> Result<u8> {
    let raw = match load_container(path) {
        Ok(raw) => raw,
        Err(err) => {
            eprintln!("error: {err}");
            return Ok(EXIT_ERROR);
        }
    };
    let project = build_ast(&raw, &tables.registry);
    for w in &project.warnings {
        log::warn!("{}: {} block {}: {:?}", path.display(), w.target, w.block_id, w.kind);
    }
    let analysis = analyze(project, &opts.include);
    let report = Report::new(
        &path.display().to_string(),
        analysis.metrics,
        &analysis.issues,
        &tables.hints,
        &opts.lang,
    )?;
    emit(opts, &report.render(opts.format))?;
    let bugs = analysis.issues.iter().any(|i| i.category == Category::Bug);
    Ok(if bugs { EXIT_BUGS } else { EXIT_CLEAN })
}

fn metrics_rows(path: &Path, opts: &GlobalOpts, tables: &Tables) -> Result<Vec<(String, ProjectMetrics)>> {
    if path.is_dir() {
        let run: CorpusRun = corpus::analyze_dir(path, &corpus_options(opts, tables))?;
        return Ok(run
            .projects
            .into_iter()
            .map(|p| (p.path.display().to_string(), p.metrics))
            .collect());
    }
    if !path.exists() {
        bail!("{}: file not found", path.display());
    }
    let raw = load_container(path)?;
    let project = build_ast(&raw, &tables.registry);
    Ok(vec![(path.display().to_string(), botlint_core::compute_metrics(&project))])
}

fn render_metrics(rows: &[(String, ProjectMetrics)], format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let values: Vec<serde_json::Value> = rows
                .iter()
                .map(|(project, m)| {
                    let mut v = serde_json::json!({ "project": project });
                    for name in ProjectMetrics::NAMES {
                        v[name] = m.get(name).into();
                    }
                    v
                })
                .collect();
            serde_json::to_string_pretty(&values)? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["project"];
            header.extend(ProjectMetrics::NAMES);
            w.write_record(&header)?;
            for (project, m) in rows {
                let mut record = vec![project.clone()];
                record.extend(ProjectMetrics::NAMES.iter().map(|n| m.get(n).unwrap_or(0).to_string()));
                w.write_record(&record)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?
        }
        Format::Text => {
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(7);
            let mut out = format!(
                "{:<width$}  {:>6}  {:>7}  {:>5}  {:>7}  {:>12}\n",
                "project", "blocks", "scripts", "WMC", "longest", "most complex"
            );
            for (project, m) in rows {
                out.push_str(&format!(
                    "{:<width$}  {:>6}  {:>7}  {:>5}  {:>7}  {:>12}\n",
                    project, m.block_count, m.script_count, m.wmc, m.longest_script, m.most_complex_script
                ));
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse_anywhere() {
        let cli = Cli::try_parse_from([
            "botlint",
            "check",
            "p.json",
            "--format",
            "json",
            "--include",
            "bugs,perfumes",
            "--lang",
            "de",
        ])
        .unwrap();
        assert_eq!(cli.opts.format, Format::Json);
        assert_eq!(cli.opts.include, [Category::Bug, Category::Perfume]);
        assert_eq!(cli.opts.lang, "de");
        assert!(matches!(cli.command, Command::Check { .. }));
    }

    #[test]
    fn compare_takes_metric_list() {
        let cli = Cli::try_parse_from(["botlint", "compare", "a", "b", "--metric", "wmc,bugs", "--per-block"]).unwrap();
        let Command::Compare { metrics, per_block, .. } = cli.command else {
            panic!("expected compare")
        };
        assert_eq!(metrics, ["wmc", "bugs"]);
        assert!(per_block);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(Cli::try_parse_from(["botlint", "check", "p", "--format", "xml"]).is_err());
        assert!(Cli::try_parse_from(["botlint", "check", "p", "--include", "warnings"]).is_err());
    }
}
