//! Static analysis of block-based programs for Codey Rocky and mBot robots:
//! bug patterns, code smells, code perfumes and size metrics.

pub mod ast;
pub mod dsl;
pub mod finders;
pub mod ingest;
pub mod metrics;
pub mod patterns;
pub mod registry;
pub mod report;

use std::path::Path;

pub use ast::{build_ast, Project};
pub use ingest::{load_container, IngestError};
pub use metrics::{compute_metrics, ProjectMetrics};
pub use patterns::Category;
pub use registry::Registry;
pub use report::{HintCatalog, Issue};

/// Findings and metrics of one project.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub project: Project,
    pub issues: Vec<Issue>,
    pub metrics: ProjectMetrics,
}

/// Runs the selected finders and computes metrics for a built project.
pub fn analyze(project: Project, include: &[Category]) -> Analysis {
    let issues = finders::run_finders(&project, include);
    let metrics = compute_metrics(&project);
    Analysis {
        project,
        issues,
        metrics,
    }
}

/// Loads, builds and analyzes a project file.
pub fn analyze_path(path: &Path, registry: &Registry, include: &[Category]) -> Result<Analysis, IngestError> {
    let raw = load_container(path)?;
    Ok(analyze(build_ast(&raw, registry), include))
}
