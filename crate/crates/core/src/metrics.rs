//! Size and complexity metrics per project.
//!
//! Cyclomatic complexity counts control blocks only: `if`, `if-else`, the
//! three loops and `wait until`. Boolean operators do not add paths.

use serde::{Deserialize, Serialize};

use crate::ast::{Expr, Project, Script, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMetrics {
    pub block_count: usize,
    pub script_count: usize,
    pub wmc: usize,
    pub longest_script: usize,
    pub most_complex_script: usize,
}

impl ProjectMetrics {
    pub const NAMES: [&'static str; 5] = [
        "block_count",
        "script_count",
        "wmc",
        "longest_script",
        "most_complex_script",
    ];

    pub fn get(&self, name: &str) -> Option<usize> {
        Some(match name {
            "block_count" => self.block_count,
            "script_count" => self.script_count,
            "wmc" => self.wmc,
            "longest_script" => self.longest_script,
            "most_complex_script" => self.most_complex_script,
            _ => return None,
        })
    }
}

fn is_decision(stmt: &Stmt) -> bool {
    matches!(
        stmt.kind,
        StmtKind::If { .. }
            | StmtKind::IfElse { .. }
            | StmtKind::RepeatTimes { .. }
            | StmtKind::RepeatUntil { .. }
            | StmtKind::Forever { .. }
            | StmtKind::WaitUntil { .. }
    )
}

pub fn cyclomatic(script: &Script) -> usize {
    1 + crate::ast::flatten(&script.body)
        .into_iter()
        .filter(|s| is_decision(s))
        .count()
}

fn expr_blocks(expr: &Expr) -> usize {
    let own = usize::from(expr.is_block());
    own + expr.children().into_iter().map(expr_blocks).sum::<usize>()
}

/// Non-shadow blocks in a statement list, nested ones included.
pub fn body_blocks(body: &[Stmt]) -> usize {
    body.iter()
        .map(|stmt| match &stmt.kind {
            StmtKind::Reporter { expr } => expr_blocks(expr),
            _ => {
                1 + stmt.exprs().into_iter().map(expr_blocks).sum::<usize>()
                    + stmt.bodies().into_iter().map(body_blocks).sum::<usize>()
            }
        })
        .sum()
}

/// Blocks of a script including its hat.
pub fn script_blocks(script: &Script) -> usize {
    1 + body_blocks(&script.body)
}

pub fn compute_metrics(project: &Project) -> ProjectMetrics {
    let mut m = ProjectMetrics::default();
    for actor in &project.actors {
        m.block_count += body_blocks(&actor.loose_blocks);
        for script in &actor.scripts {
            let size = script_blocks(script);
            let cc = cyclomatic(script);
            m.block_count += size;
            m.script_count += 1;
            m.wmc += cc;
            m.longest_script = m.longest_script.max(size);
            m.most_complex_script = m.most_complex_script.max(cc);
        }
    }
    m
}
