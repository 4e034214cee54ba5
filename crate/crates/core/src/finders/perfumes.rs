//! Code perfume finders.

use super::bugs::find_motor_class;
use super::{id, robots, script_index, sensing_sites, stmt_sites, MotorClass, SensingClass};
use crate::ast::{activation_of, colour_components, deactivation_of, scripts_grouped_by_hat, sensor_reporters, ExprKind, Project, StmtKind};
use crate::patterns::{off_id, sensing_id};
use crate::registry::{Actuator, Sensor};
use crate::report::{format_number, Issue};

pub fn find_colour_usage(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            let components = colour_components(site.stmt.colour_args());
            let valid = !components.is_empty()
                && components
                    .iter()
                    .all(|c| c.is_some_and(|v| v.fract() == 0.0 && (0.0..=255.0).contains(&v)));
            if valid {
                issues.push(Issue::new(
                    "colour-usage",
                    &actor.name,
                    script_index(site.script),
                    vec![id(site.stmt)],
                ));
            }
        }
    }
    issues
}

pub fn find_correct_sensing(project: &Project, sensor: Sensor) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, device) in robots(project) {
        for (script, cmp, range, class) in sensing_sites(actor, device) {
            if class != SensingClass::Correct || cmp.sensor != sensor {
                continue;
            }
            issues.push(
                Issue::new(
                    sensing_id(sensor),
                    &actor.name,
                    script_index(script),
                    cmp.expr.block_id.iter().cloned().collect(),
                )
                .param("min", format_number(range.lo))
                .param("max", format_number(range.hi)),
            );
        }
    }
    issues
}

pub fn find_all_correct_sensing(project: &Project) -> Vec<Issue> {
    Sensor::ALL
        .into_iter()
        .flat_map(|s| find_correct_sensing(project, s))
        .collect()
}

pub fn find_actuator_off(project: &Project, actuator: Actuator) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        let sites = stmt_sites(actor);
        if !sites.iter().any(|s| activation_of(s.stmt) == Some(actuator)) {
            continue;
        }
        let offs: Vec<_> = sites
            .iter()
            .filter(|s| deactivation_of(s.stmt) == Some(actuator))
            .collect();
        let Some(first) = offs.first() else { continue };
        issues.push(Issue::new(
            off_id(actuator),
            &actor.name,
            script_index(first.script),
            offs.iter().map(|s| id(s.stmt)).collect(),
        ));
    }
    issues
}

pub fn find_all_actuator_off(project: &Project) -> Vec<Issue> {
    Actuator::ALL
        .into_iter()
        .flat_map(|a| find_actuator_off(project, a))
        .collect()
}

pub fn find_loop_sensing(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            let Some(condition) = site.stmt.condition() else { continue };
            let looped = site.in_loop() || matches!(site.stmt.kind, StmtKind::RepeatUntil { .. });
            if !looped {
                continue;
            }
            for reporter in sensor_reporters(condition) {
                let (Some(block), ExprKind::Sensor { sensor }) = (&reporter.block_id, &reporter.kind) else {
                    continue;
                };
                issues.push(
                    Issue::new(
                        "loop-sensing",
                        &actor.name,
                        script_index(site.script),
                        vec![block.clone()],
                    )
                    .param("sensor", sensor.display_name()),
                );
            }
        }
    }
    issues
}

pub fn find_motor_usage(project: &Project) -> Vec<Issue> {
    find_motor_class(project, MotorClass::Usage)
}

pub fn find_parallelisation(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for group in scripts_grouped_by_hat(actor) {
            if group.len() < 2 {
                continue;
            }
            let scripts: Vec<usize> = group.iter().map(|s| s.id.index).collect();
            issues.push(
                Issue::new(
                    "parallelisation",
                    &actor.name,
                    script_index(group[0]),
                    group.iter().map(|s| s.hat.block_id.clone()).collect(),
                )
                .param("count", group.len().to_string())
                .meta("size", group.len())
                .meta("scripts", scripts),
            );
        }
    }
    issues
}
