//! Issues, the localized hint catalog, and report serialization.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::metrics::ProjectMetrics;
use crate::patterns::{pattern, Category, PATTERNS};

pub const REPORT_SCHEMA: &str = "botlint-report-1";
pub const CSV_HEADER: [&str; 7] = ["project", "actor", "script", "pattern_id", "category", "block_ids", "hint"];
pub const DEFAULT_LANG: &str = "en";

/// One finding of one pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub pattern_id: String,
    pub category: Category,
    pub actor: String,
    /// Index of the script within its actor.
    pub script: Option<usize>,
    pub block_ids: Vec<String>,
    pub hint_key: String,
    pub params: BTreeMap<String, String>,
    pub metadata: BTreeMap<String, Value>,
}

impl Issue {
    /// # Panics
    /// If `pattern_id` is not a registered pattern.
    pub fn new(pattern_id: &str, actor: &str, script: Option<usize>, block_ids: Vec<String>) -> Issue {
        let p = pattern(pattern_id).unwrap_or_else(|| panic!("unregistered pattern `{pattern_id}`"));
        Issue {
            pattern_id: p.id.to_string(),
            category: p.category,
            actor: actor.to_string(),
            script,
            block_ids,
            hint_key: p.id.to_string(),
            params: BTreeMap::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<String>) -> Issue {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Issue {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Ordering key: actor, script (loose first), block ids, pattern.
    pub fn sort_key(&self) -> (&str, Option<usize>, &[String], &str) {
        (&self.actor, self.script, &self.block_ids, &self.pattern_id)
    }
}

/// Canonical order used by every report.
pub fn sort_issues(issues: &mut [Issue]) {
    issues.sort_by(|a, b| {
        a.sort_key()
            .cmp(&b.sort_key())
            .then_with(|| params_key(a).cmp(&params_key(b)))
    });
}

fn params_key(issue: &Issue) -> String {
    serde_json::to_string(&(&issue.params, &issue.metadata)).unwrap_or_default()
}

/// Formats a number without a trailing `.0` for whole values.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------------
// Hints

#[derive(Debug, Error)]
pub enum HintError {
    #[error("no hint template for pattern `{0}`")]
    UnknownPattern(String),
    #[error("hint for `{pattern}` needs parameter `{param}`")]
    MissingParam { pattern: String, param: String },
    #[error("hint catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("hint catalog is malformed: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("hint catalog: `{pattern}` has no `en` template")]
    MissingEnglish { pattern: String },
    #[error("hint catalog: `{pattern}` uses different placeholders in `{lang}` than in `en`")]
    PlaceholderMismatch { pattern: String, lang: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogEntry {
    /// Marks text taken verbatim from the original tool.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    canonical: bool,
    #[serde(flatten)]
    templates: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    note: String,
    patterns: BTreeMap<String, CatalogEntry>,
}

/// Hint templates keyed by pattern id and language tag.
#[derive(Debug, Clone)]
pub struct HintCatalog {
    entries: BTreeMap<String, CatalogEntry>,
}

fn placeholders(template: &str) -> BTreeSet<&str> {
    let mut out = BTreeSet::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                let name = &after[..end];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
                    out.insert(name);
                }
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

impl HintCatalog {
    pub fn builtin() -> &'static HintCatalog {
        static CATALOG: OnceLock<HintCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| {
            HintCatalog::from_json(include_str!("../data/hints.json")).expect("built-in hint catalog is valid")
        })
    }

    pub fn from_json(text: &str) -> Result<HintCatalog, HintError> {
        let file: CatalogFile = serde_json::from_str(text)?;
        for (id, entry) in &file.patterns {
            let en = entry
                .templates
                .get(DEFAULT_LANG)
                .ok_or_else(|| HintError::MissingEnglish { pattern: id.clone() })?;
            let expected = placeholders(en);
            for (lang, template) in &entry.templates {
                if placeholders(template) != expected {
                    return Err(HintError::PlaceholderMismatch {
                        pattern: id.clone(),
                        lang: lang.clone(),
                    });
                }
            }
        }
        Ok(HintCatalog { entries: file.patterns })
    }

    pub fn load(path: &Path) -> Result<HintCatalog, HintError> {
        let text = std::fs::read_to_string(path).map_err(|source| HintError::Io {
            path: path.display().to_string(),
            source,
        })?;
        HintCatalog::from_json(&text)
    }

    pub fn template(&self, pattern_id: &str, lang: &str) -> Option<&str> {
        let entry = self.entries.get(pattern_id)?;
        entry
            .templates
            .get(lang)
            .or_else(|| entry.templates.get(DEFAULT_LANG))
            .map(String::as_str)
    }

    pub fn placeholders(&self, pattern_id: &str) -> Option<BTreeSet<&str>> {
        self.template(pattern_id, DEFAULT_LANG).map(placeholders)
    }

    pub fn is_canonical(&self, pattern_id: &str) -> bool {
        self.entries.get(pattern_id).is_some_and(|e| e.canonical)
    }

    pub fn languages(&self, pattern_id: &str) -> Vec<&str> {
        self.entries
            .get(pattern_id)
            .map(|e| e.templates.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Ids of registered patterns lacking a template.
    pub fn missing_patterns(&self) -> Vec<&'static str> {
        PATTERNS
            .iter()
            .map(|p| p.id)
            .filter(|id| !self.entries.contains_key(*id))
            .collect()
    }

    /// Hint text for `issue` in `lang`, falling back to English.
    pub fn resolve(&self, issue: &Issue, lang: &str) -> Result<String, HintError> {
        let template = self
            .template(&issue.hint_key, lang)
            .ok_or_else(|| HintError::UnknownPattern(issue.hint_key.clone()))?;
        let mut out = template.to_string();
        for name in placeholders(template) {
            let value = issue.params.get(name).ok_or_else(|| HintError::MissingParam {
                pattern: issue.hint_key.clone(),
                param: name.to_string(),
            })?;
            out = out.replace(&format!("{{{name}}}"), value);
        }
        Ok(out)
    }
}

pub fn resolve_hint(issue: &Issue, lang: &str) -> Result<String, HintError> {
    HintCatalog::builtin().resolve(issue, lang)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    #[serde(flatten)]
    pub issue: Issue,
    pub hint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub project: String,
    pub metrics: ProjectMetrics,
    pub issues: Vec<ReportEntry>,
}

impl Report {
    pub fn new(
        project: &str,
        metrics: ProjectMetrics,
        issues: &[Issue],
        catalog: &HintCatalog,
        lang: &str,
    ) -> Result<Report, HintError> {
        let issues = issues
            .iter()
            .map(|issue| {
                Ok(ReportEntry {
                    hint: catalog.resolve(issue, lang)?,
                    issue: issue.clone(),
                })
            })
            .collect::<Result<_, HintError>>()?;
        Ok(Report {
            schema: REPORT_SCHEMA.to_string(),
            project: project.to_string(),
            metrics,
            issues,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let m = &self.metrics;
        let mut out = format!(
            "{}\n  blocks {}, scripts {}, WMC {}, longest script {}, most complex script {}\n",
            self.project, m.block_count, m.script_count, m.wmc, m.longest_script, m.most_complex_script
        );
        if self.issues.is_empty() {
            out.push_str("  no findings\n");
        }
        let mut current_actor: Option<&str> = None;
        for entry in &self.issues {
            let issue = &entry.issue;
            if current_actor != Some(issue.actor.as_str()) {
                out.push_str(&format!("\n{}\n", issue.actor));
                current_actor = Some(&issue.actor);
            }
            let name = pattern(&issue.pattern_id).map_or(issue.pattern_id.as_str(), |p| p.name);
            out.push_str(&format!(
                "  {} {} found: {}\n",
                issue.category.label(),
                name,
                entry.hint
            ));
            let script = issue
                .script
                .map_or_else(|| "loose blocks".to_string(), |s| format!("script {s}"));
            out.push_str(&format!("    at {script}, blocks {}\n", issue.block_ids.join(", ")));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        self.write_csv_rows(&mut writer, true).expect("in-memory csv");
        String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    /// Appends rows; the header is written only when `header` is set.
    pub fn write_csv_rows<W: std::io::Write>(&self, writer: &mut csv::Writer<W>, header: bool) -> csv::Result<()> {
        if header {
            writer.write_record(CSV_HEADER)?;
        }
        for entry in &self.issues {
            let issue = &entry.issue;
            writer.write_record([
                self.project.as_str(),
                issue.actor.as_str(),
                &issue.script.map(|s| s.to_string()).unwrap_or_default(),
                issue.pattern_id.as_str(),
                issue.category.as_str(),
                &issue.block_ids.join(";"),
                entry.hint.as_str(),
            ])?;
        }
        Ok(())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Json => self.to_json() + "\n",
            Format::Csv => self.to_csv(),
        }
    }
}

/// Renders a report for sorted `issues` in the requested format.
pub fn serialize_report(
    project: &str,
    issues: &[Issue],
    metrics: ProjectMetrics,
    format: Format,
    catalog: &HintCatalog,
    lang: &str,
) -> Result<Vec<u8>, HintError> {
    Ok(Report::new(project, metrics, issues, catalog, lang)?
        .render(format)
        .into_bytes())
}
