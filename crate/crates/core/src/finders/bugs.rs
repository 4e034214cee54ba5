//! Bug pattern finders.

use std::collections::BTreeSet;

use serde_json::json;

use super::{
    id, is_variable_write, motor_sites, robots, script_index, sensing_sites, stmt_sites, MotorClass,
    SensingClass,
};
use crate::ast::{
    activation_of, actuator_of, deactivation_of, flatten, is_delaying, is_timed, scripts_grouped_by_hat,
    colour_components, queries_sensor_or_button, sensor_reporters, sensor_refs, untimed_activation_of, Expr, ExprKind,
    Project, Script, StmtKind, StopKind,
};
use crate::patterns::{off_missing_id, useless_sensing_id};
use crate::registry::{Actuator, Device, HatEvent, Sensor};
use crate::report::{format_number, Issue};

pub(crate) fn actuator_label(actuator: Actuator) -> &'static str {
    match actuator {
        Actuator::Led => "LEDs",
        Actuator::Light => "light",
        Actuator::Matrix => "LED matrix",
        Actuator::Motor => "motors",
    }
}

fn sensor_of(expr: &Expr) -> Option<Sensor> {
    match expr.kind {
        ExprKind::Sensor { sensor } => Some(sensor),
        _ => None,
    }
}

/// Block ids of statements in `script` that activate `actuator` inside a loop.
fn looped_activations(script: &Script, actuator: Actuator) -> Vec<String> {
    fn visit(body: &[crate::ast::Stmt], in_loop: bool, actuator: Actuator, out: &mut Vec<String>) {
        for stmt in body {
            if in_loop && activation_of(stmt) == Some(actuator) {
                out.push(id(stmt));
            }
            let nested = in_loop || stmt.is_loop();
            for b in stmt.bodies() {
                visit(b, nested, actuator, out);
            }
        }
    }
    let mut out = Vec::new();
    visit(&script.body, false, actuator, &mut out);
    out
}

pub fn find_action_not_stopped(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for script in &actor.scripts {
            let mut scripts_stopped = false;
            for stmt in flatten(&script.body) {
                if matches!(
                    stmt.kind,
                    StmtKind::Stop {
                        stop: StopKind::All | StopKind::OtherScripts
                    }
                ) {
                    scripts_stopped = true;
                }
                let Some(actuator) = deactivation_of(stmt) else {
                    continue;
                };
                if scripts_stopped {
                    continue;
                }
                let uses: Vec<String> = actor
                    .scripts
                    .iter()
                    .filter(|other| other.id != script.id)
                    .flat_map(|other| looped_activations(other, actuator))
                    .collect();
                if uses.is_empty() {
                    continue;
                }
                let mut block_ids = vec![id(stmt)];
                block_ids.extend(uses.iter().cloned());
                issues.push(
                    Issue::new("action-not-stopped", &actor.name, script_index(script), block_ids)
                        .param("actuator", actuator_label(actuator))
                        .meta("looped_uses", uses),
                );
            }
        }
    }
    issues
}

pub fn find_actuator_off_missing(project: &Project, actuator: Actuator) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        let sites = stmt_sites(actor);
        if sites.iter().any(|s| deactivation_of(s.stmt) == Some(actuator)) {
            continue;
        }
        for site in sites.iter().filter(|s| untimed_activation_of(s.stmt) == Some(actuator)) {
            issues.push(Issue::new(
                off_missing_id(actuator),
                &actor.name,
                script_index(site.script),
                vec![id(site.stmt)],
            ));
        }
    }
    issues
}

pub fn find_all_actuator_off_missing(project: &Project) -> Vec<Issue> {
    Actuator::ALL
        .into_iter()
        .flat_map(|a| find_actuator_off_missing(project, a))
        .collect()
}

pub fn find_colour_out_of_range(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            let components = colour_components(site.stmt.colour_args());
            for (index, value) in components.into_iter().enumerate() {
                let Some(v) = value else { continue };
                if (0.0..=255.0).contains(&v) {
                    continue;
                }
                issues.push(
                    Issue::new(
                        "colour-out-of-range",
                        &actor.name,
                        script_index(site.script),
                        vec![id(site.stmt)],
                    )
                    .param("value", format_number(v))
                    .meta("component", index),
                );
            }
        }
    }
    issues
}

/// Sensor reporters read by a loop itself: its condition plus every
/// expression of its body, without descending into nested loops. Also
/// reports whether that region contains a delaying statement.
fn loop_region(stmt: &crate::ast::Stmt) -> (Vec<&Expr>, bool) {
    fn visit<'a>(body: &'a [crate::ast::Stmt], sensors: &mut Vec<&'a Expr>, delays: &mut bool) {
        for stmt in body {
            if stmt.is_loop() {
                continue;
            }
            *delays |= is_delaying(stmt);
            for e in stmt.exprs() {
                sensors.extend(sensor_reporters(e));
            }
            for b in stmt.bodies() {
                visit(b, sensors, delays);
            }
        }
    }
    let mut sensors = Vec::new();
    let mut delays = false;
    if let Some(c) = stmt.condition() {
        sensors.extend(sensor_reporters(c));
    }
    for b in stmt.bodies() {
        visit(b, &mut sensors, &mut delays);
    }
    (sensors, delays)
}

pub fn find_interrupted_loop_sensing(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor).into_iter().filter(|s| s.stmt.is_loop()) {
            let (sensors, delays) = loop_region(site.stmt);
            if !delays {
                continue;
            }
            for sensor in sensors {
                let Some(sensor_id) = sensor.block_id.clone() else { continue };
                let name = sensor_of(sensor).map_or("", |s| s.display_name());
                issues.push(
                    Issue::new(
                        "interrupted-loop-sensing",
                        &actor.name,
                        script_index(site.script),
                        vec![id(site.stmt), sensor_id],
                    )
                    .param("sensor", name),
                );
            }
        }
    }
    issues
}

fn motor_finder(project: &Project, class: MotorClass, pattern_id: &str) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, device) in robots(project) {
        for (script, stmt, p, c) in motor_sites(actor, device) {
            if c == class {
                issues.push(
                    Issue::new(pattern_id, &actor.name, script_index(script), vec![id(stmt)])
                        .param("power", format_number(p)),
                );
            }
        }
    }
    issues
}

pub(crate) fn find_motor_class(project: &Project, class: MotorClass) -> Vec<Issue> {
    let pattern_id = match class {
        MotorClass::OutOfRange => "motor-out-of-range",
        MotorClass::Low => "low-motor-power",
        MotorClass::Negative => "negative-motor-power",
        MotorClass::Usage => "motor-usage",
        MotorClass::Nothing => return Vec::new(),
    };
    motor_finder(project, class, pattern_id)
}

pub fn find_low_motor_power(project: &Project) -> Vec<Issue> {
    find_motor_class(project, MotorClass::Low)
}

pub fn find_motor_out_of_range(project: &Project) -> Vec<Issue> {
    find_motor_class(project, MotorClass::OutOfRange)
}

pub fn find_missing_loop_sensing(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            let conditional = matches!(
                site.stmt.kind,
                StmtKind::If { .. } | StmtKind::IfElse { .. } | StmtKind::WaitUntil { .. }
            );
            if !conditional || site.in_loop() {
                continue;
            }
            let sensors = site.stmt.condition().map(sensor_refs).unwrap_or_default();
            let Some(first) = sensors.first() else { continue };
            issues.push(
                Issue::new(
                    "missing-loop-sensing",
                    &actor.name,
                    script_index(site.script),
                    vec![id(site.stmt)],
                )
                .param("sensor", first.display_name()),
            );
        }
    }
    issues
}

pub fn find_parallel_actuator_use(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for group in scripts_grouped_by_hat(actor) {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    for actuator in Actuator::ALL {
                        let uses = |s: &Script| -> Vec<String> {
                            flatten(&s.body)
                                .into_iter()
                                .filter(|st| actuator_of(st) == Some(actuator))
                                .map(id)
                                .collect()
                        };
                        let (ua, ub) = (uses(a), uses(b));
                        if ua.is_empty() || ub.is_empty() {
                            continue;
                        }
                        issues.push(
                            Issue::new(
                                "parallel-actuator-use",
                                &actor.name,
                                script_index(a),
                                ua.into_iter().chain(ub).collect(),
                            )
                            .param("actuator", actuator_label(actuator))
                            .meta("other_script", b.id.index),
                        );
                    }
                }
            }
        }
    }
    issues
}

pub fn find_query_in_loop(project: &Project) -> Vec<Issue> {
    let fast = |stmt: &crate::ast::Stmt| {
        stmt.bodies()
            .into_iter()
            .all(|b| !flatten(b).into_iter().any(is_delaying))
    };
    let mutates = |bodies: Vec<&[crate::ast::Stmt]>| {
        bodies
            .into_iter()
            .any(|b| flatten(b).into_iter().any(is_variable_write))
    };
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            let stmt = site.stmt;
            let fires = match &stmt.kind {
                StmtKind::If { condition, .. } | StmtKind::IfElse { condition, .. } => {
                    site.nearest_loop().is_some_and(fast)
                        && queries_sensor_or_button(condition)
                        && mutates(stmt.bodies())
                }
                StmtKind::RepeatUntil { condition, .. } => {
                    fast(stmt) && queries_sensor_or_button(condition) && mutates(stmt.bodies())
                }
                _ => false,
            };
            if fires {
                issues.push(Issue::new(
                    "query-in-loop",
                    &actor.name,
                    script_index(site.script),
                    vec![id(stmt)],
                ));
            }
        }
    }
    issues
}

pub fn find_sensor_equals_check(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, device) in robots(project) {
        for (script, cmp, _, class) in sensing_sites(actor, device) {
            if class == SensingClass::EqualsCheck {
                issues.push(
                    Issue::new(
                        "sensor-equals-check",
                        &actor.name,
                        script_index(script),
                        cmp.expr.block_id.iter().cloned().collect(),
                    )
                    .param("sensor", cmp.sensor.display_name()),
                );
            }
        }
    }
    issues
}

pub fn find_several_launches(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, device) in robots(project) {
        if device != Device::Mcore {
            continue;
        }
        let launches: Vec<&Script> = actor
            .scripts
            .iter()
            .filter(|s| s.hat.event == HatEvent::BoardLaunch)
            .collect();
        if launches.len() < 2 {
            continue;
        }
        issues.push(
            Issue::new(
                "several-launches",
                &actor.name,
                script_index(launches[0]),
                launches.iter().map(|s| s.hat.block_id.clone()).collect(),
            )
            .param("count", launches.len().to_string())
            .meta("count", launches.len()),
        );
    }
    issues
}

pub fn find_stuttering_action(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, _) in robots(project) {
        for site in stmt_sites(actor) {
            let timed_motor = matches!(
                site.stmt.kind,
                StmtKind::TimedMove { .. }
                    | StmtKind::TimedActuator {
                        actuator: Actuator::Motor,
                        ..
                    }
            );
            if timed_motor && site.in_loop() {
                issues.push(Issue::new(
                    "stuttering-action",
                    &actor.name,
                    script_index(site.script),
                    vec![id(site.stmt)],
                ));
            }
        }
    }
    issues
}

pub fn find_useless_sensing(project: &Project, sensor: Sensor) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, device) in robots(project) {
        for (script, cmp, range, class) in sensing_sites(actor, device) {
            let SensingClass::Useless(verdict) = class else { continue };
            if cmp.sensor != sensor {
                continue;
            }
            issues.push(
                Issue::new(
                    useless_sensing_id(sensor),
                    &actor.name,
                    script_index(script),
                    cmp.expr.block_id.iter().cloned().collect(),
                )
                .param("value", format_number(cmp.value))
                .param("min", format_number(range.lo))
                .param("max", format_number(range.hi))
                .meta("verdict", verdict.as_str()),
            );
        }
    }
    issues
}

pub fn find_all_useless_sensing(project: &Project) -> Vec<Issue> {
    Sensor::ALL
        .into_iter()
        .flat_map(|s| find_useless_sensing(project, s))
        .collect()
}

pub fn find_waiting_aborted(project: &Project) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (actor, device) in robots(project) {
        if device != Device::Codey {
            continue;
        }
        let sites = stmt_sites(actor);
        let stops: Vec<_> = sites
            .iter()
            .filter(|s| matches!(s.stmt.kind, StmtKind::Stop { stop: StopKind::All }))
            .collect();
        let timed: Vec<_> = sites.iter().filter(|s| is_timed(s.stmt)).collect();
        let qualifying: Vec<_> = stops
            .iter()
            .filter(|stop| timed.iter().any(|t| t.script.id != stop.script.id))
            .collect();
        let Some(first) = qualifying.first() else { continue };
        let stop_scripts: BTreeSet<usize> = qualifying.iter().map(|s| s.script.id.index).collect();
        let at_risk: Vec<String> = timed
            .iter()
            .filter(|t| stop_scripts.iter().any(|&s| s != t.script.id.index))
            .map(|t| id(t.stmt))
            .collect();
        issues.push(
            Issue::new(
                "waiting-aborted",
                &actor.name,
                script_index(first.script),
                qualifying.iter().map(|s| id(s.stmt)).collect(),
            )
            .meta("at_risk", json!(at_risk)),
        );
    }
    issues
}
