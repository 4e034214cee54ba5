//! Shared access to the seeded fixture corpus and its expected findings.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use botlint_core::patterns::{Category, PATTERNS};
use botlint_core::{analyze_path, dsl, ProjectMetrics, Registry};
use serde::Deserialize;

pub const REGENERATE_VAR: &str = "BOTLINT_REGENERATE_FIXTURES";

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub fixtures: Vec<Fixture>,
}

#[derive(Debug, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub source: String,
    pub expected: BTreeMap<String, usize>,
    pub metrics: Option<ProjectMetrics>,
}

impl Fixture {
    pub fn path(&self) -> PathBuf {
        corpus_dir().join(format!("{}.json", self.name))
    }

    pub fn expected_count(&self, pattern_id: &str) -> usize {
        self.expected.get(pattern_id).copied().unwrap_or(0)
    }
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures_dir().join("corpus")
}

/// Loads the manifest and makes sure every corpus file is the compiled form
/// of its source. With the regeneration variable set, files are rewritten.
pub fn manifest() -> Manifest {
    let text = std::fs::read_to_string(fixtures_dir().join("corpus_expected.json")).expect("manifest readable");
    let manifest: Manifest = serde_json::from_str(&text).expect("manifest parses");
    for f in &manifest.fixtures {
        for id in f.expected.keys() {
            assert!(PATTERNS.iter().any(|p| p.id == id), "{}: unknown pattern {id}", f.name);
        }
    }
    let regenerate = std::env::var_os(REGENERATE_VAR).is_some();
    if regenerate {
        std::fs::create_dir_all(corpus_dir()).unwrap();
    }
    for f in &manifest.fixtures {
        let compiled = dsl::to_json(&f.source).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        let path = f.path();
        if regenerate {
            let text = serde_json::to_string_pretty(&compiled).unwrap() + "\n";
            std::fs::write(&path, text).unwrap();
            continue;
        }
        let on_disk: serde_json::Value = std::fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_else(|| panic!("{} missing or unreadable; rerun with {REGENERATE_VAR}=1", path.display()));
        assert_eq!(on_disk, compiled, "{} is stale; rerun with {REGENERATE_VAR}=1", path.display());
    }
    manifest
}

/// Differences between reported and expected findings, one line each.
pub fn mismatches(fixture: &Fixture) -> Vec<String> {
    let analysis = analyze_path(&fixture.path(), Registry::builtin(), &Category::ALL)
        .unwrap_or_else(|e| panic!("{}: {e}", fixture.name));
    let mut found: BTreeMap<&str, usize> = BTreeMap::new();
    for issue in &analysis.issues {
        *found.entry(issue.pattern_id.as_str()).or_default() += 1;
    }
    let mut out = Vec::new();
    for p in PATTERNS {
        let got = found.get(p.id).copied().unwrap_or(0);
        let want = fixture.expected_count(p.id);
        if got != want {
            out.push(format!("{}: {} reported {got}, expected {want}", fixture.name, p.id));
        }
    }
    if let Some(expected) = fixture.metrics {
        if analysis.metrics != expected {
            out.push(format!("{}: metrics {:?}, expected {expected:?}", fixture.name, analysis.metrics));
        }
    }
    out
}
