//! Code smell finders.

use super::bugs::find_motor_class;
use super::{id, robots, script_index, statement_lists, stmt_sites, MotorClass};
use crate::ast::{is_timed, literal_number, Project, Stmt, StmtKind};
use crate::registry::Actuator;
use crate::report::{format_number, Issue};

pub fn find_negative_motor_power(project: &Project) -> Vec<Issue> {
    find_motor_class(project, MotorClass::Negative)
}

/// Actuator and target addressed by an untimed setting.
fn setting(stmt: &Stmt) -> Option<(Actuator, Option<&str>)> {
    match &stmt.kind {
        StmtKind::ActuatorOn { actuator, target, .. } | StmtKind::ActuatorOff { actuator, target } => {
            Some((*actuator, target.as_deref()))
        }
        StmtKind::Move { target, .. } => Some((Actuator::Motor, target.as_deref())),
        _ => None,
    }
}

/// Two targets overlap unless both name different single parts.
fn overlapping(a: Option<&str>, b: Option<&str>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a == b || a == "all" || b == "all",
        _ => true,
    }
}

pub fn find_noneffective_modification(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for script in &actor.scripts {
            for list in statement_lists(script) {
                for pair in list.windows(2) {
                    let (Some((a, ta)), Some((b, tb))) = (setting(&pair[0]), setting(&pair[1])) else {
                        continue;
                    };
                    if a == b && overlapping(ta, tb) {
                        issues.push(Issue::new(
                            "noneffective-modification",
                            &actor.name,
                            script_index(script),
                            vec![id(&pair[0]), id(&pair[1])],
                        ));
                    }
                }
            }
        }
    }
    issues
}

pub fn find_noneffective_time_limit(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            if !is_timed(site.stmt) {
                continue;
            }
            let Some(t) = site.stmt.time_limit().and_then(literal_number) else {
                continue;
            };
            if t <= 0.0 {
                issues.push(
                    Issue::new(
                        "noneffective-time-limit",
                        &actor.name,
                        script_index(site.script),
                        vec![id(site.stmt)],
                    )
                    .param("time", format_number(t)),
                );
            }
        }
    }
    issues
}
