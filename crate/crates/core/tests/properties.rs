mod common;

use std::collections::{BTreeMap, HashSet};

use botlint_core::ast::{literal_number, walk, Context, Expr, ExprKind, Stmt, Visitor};
use botlint_core::finders::{classify_motor, run_finders, verdict, CmpOp, MotorClass, Verdict};
use botlint_core::metrics::{compute_metrics, cyclomatic};
use botlint_core::patterns::{off_id, off_missing_id, Category};
use botlint_core::registry::{sensor_range, Actuator, Device, OperatorKind, Sensor, SensorRange};
use botlint_core::report::{sort_issues, HintCatalog, Issue, Report};
use botlint_core::{analyze, dsl, Project};
use common::program;
use proptest::prelude::*;
use serde_json::Value;

const ALL: [Category; 3] = [Category::Bug, Category::Smell, Category::Perfume];

fn build(src: &str) -> Project {
    dsl::project(src).unwrap_or_else(|e| panic!("{e}: {src}"))
}

fn issues(src: &str) -> Vec<Issue> {
    run_finders(&build(src), &ALL)
}

/// Every value the sensor can report, sampled on the integer grid plus the
/// endpoints, and `c` itself when it lies in a continuous range.
fn grid(range: SensorRange, c: f64) -> Vec<f64> {
    let mut values: Vec<f64> = (range.lo.ceil() as i64..=range.hi.floor() as i64)
        .map(|v| v as f64)
        .collect();
    values.push(range.lo);
    values.push(range.hi);
    if !range.discrete && c >= range.lo && c <= range.hi {
        values.push(c);
    }
    values
}

fn brute_force(range: SensorRange, op: CmpOp, c: f64) -> Verdict {
    let results: Vec<bool> = grid(range, c).into_iter().map(|x| op.eval(x, c)).collect();
    if results.iter().all(|&r| r) {
        Verdict::AlwaysTrue
    } else if results.iter().all(|&r| !r) {
        Verdict::AlwaysFalse
    } else {
        Verdict::Satisfiable
    }
}

/// Statements and sensor comparisons found by an independent walk.
#[derive(Default)]
struct Inventory<'a> {
    motor: Vec<(&'a str, &'a Stmt, Device, f64)>,
    comparisons: Vec<(&'a str, &'a Expr, Sensor)>,
}

impl<'a> Visitor<'a> for Inventory<'a> {
    fn visit_stmt(&mut self, stmt: &'a Stmt, ctx: &Context<'a>) {
        if let (Some(device), Some(power)) = (ctx.actor.device, stmt.motor_power()) {
            if let Some(p) = literal_number(power) {
                self.motor.push((&ctx.actor.name, stmt, device, p));
            }
        }
    }

    fn visit_expr(&mut self, expr: &'a Expr, ctx: &Context<'a>) {
        if ctx.actor.device.is_none() {
            return;
        }
        let ExprKind::Binary { op, lhs, rhs } = &expr.kind else { return };
        if !matches!(op, OperatorKind::Gt | OperatorKind::Lt | OperatorKind::Eq) {
            return;
        }
        let sensor = |e: &Expr| match e.kind {
            ExprKind::Sensor { sensor } => Some(sensor),
            _ => None,
        };
        match (sensor(lhs), sensor(rhs)) {
            (Some(s), None) if literal_number(rhs).is_some() => self.comparisons.push((&ctx.actor.name, expr, s)),
            (None, Some(s)) if literal_number(lhs).is_some() => self.comparisons.push((&ctx.actor.name, expr, s)),
            _ => {}
        }
    }
}

fn anchored<'i>(issues: &'i [Issue], actor: &str, block: &str) -> Vec<&'i str> {
    issues
        .iter()
        .filter(|i| i.actor == actor && i.block_ids.first().map(String::as_str) == Some(block))
        .map(|i| i.pattern_id.as_str())
        .collect()
}

/// Decision blocks and non-shadow blocks counted straight from the JSON.
fn json_counts(src: &str) -> (usize, usize, usize) {
    let doc = dsl::to_json(src).unwrap();
    let (mut blocks, mut decisions, mut hats) = (0, 0, 0);
    for target in doc["targets"].as_array().unwrap() {
        for block in target["blocks"].as_object().unwrap().values() {
            let opcode = block["opcode"].as_str().unwrap();
            if block["shadow"] == Value::Bool(true) {
                continue;
            }
            blocks += 1;
            if matches!(
                opcode,
                "control_if" | "control_if_else" | "control_repeat" | "control_repeat_until" | "control_forever"
                    | "control_wait_until"
            ) {
                decisions += 1;
            }
            if opcode.starts_with("event_when") || opcode.contains(".when_") {
                hats += 1;
            }
        }
    }
    (blocks, decisions, hats)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analysis_is_deterministic(prog in program()) {
        let src = prog.source();
        let a = analyze(build(&src), &ALL);
        let b = analyze(build(&src), &ALL);
        prop_assert_eq!(&a.issues, &b.issues);
        prop_assert_eq!(a.metrics, b.metrics);
        let mut sorted = a.issues.clone();
        sort_issues(&mut sorted);
        prop_assert_eq!(sorted, a.issues);
    }

    #[test]
    fn adding_an_empty_actor_changes_nothing(prog in program()) {
        let src = prog.source();
        let base = issues(&src);
        prop_assert_eq!(&issues(&format!("{src} sprite \"Extra\" {{[on_flag; wait(1)]}}")), &base);
        prop_assert_eq!(&issues(&format!("{src} mcore \"Empty\" {{}}")), &base);
    }

    #[test]
    fn off_missing_and_off_perfume_are_exclusive(prog in program()) {
        let found = issues(&prog.source());
        for actor in found.iter().map(|i| i.actor.clone()).collect::<HashSet<_>>() {
            for a in Actuator::ALL {
                let has = |id: &str| found.iter().any(|i| i.actor == actor && i.pattern_id == id);
                prop_assert!(!(has(off_missing_id(a)) && has(off_id(a))));
            }
        }
    }

    #[test]
    fn motor_literals_fall_in_exactly_one_family(prog in program()) {
        let project = build(&prog.source());
        let found = run_finders(&project, &ALL);
        let mut inv = Inventory::default();
        walk(&project, &mut inv);
        let family = ["motor-usage", "low-motor-power", "motor-out-of-range", "negative-motor-power"];
        for (actor, stmt, device, p) in inv.motor {
            let hits: Vec<&str> = anchored(&found, actor, &stmt.block_id)
                .into_iter()
                .filter(|id| family.contains(id))
                .collect();
            if p == 0.0 {
                prop_assert!(hits.is_empty(), "{p}: {hits:?}");
            } else {
                prop_assert_eq!(hits.len(), 1, "{} on {:?}: {:?}", p, device, hits);
            }
            prop_assert_eq!(hits.is_empty(), classify_motor(device, p) == MotorClass::Nothing);
        }
    }

    #[test]
    fn comparisons_fall_in_exactly_one_family(prog in program()) {
        let project = build(&prog.source());
        let found = run_finders(&project, &ALL);
        let mut inv = Inventory::default();
        walk(&project, &mut inv);
        for (actor, expr, sensor) in inv.comparisons {
            let id = expr.block_id.clone().unwrap();
            let useless = format!("useless-{}-sensing", sensor.slug());
            let correct = format!("{}-sensing", sensor.slug());
            let hits: Vec<&str> = anchored(&found, actor, &id)
                .into_iter()
                .filter(|p| *p == useless || *p == correct || *p == "sensor-equals-check")
                .collect();
            prop_assert_eq!(hits.len(), 1, "{}: {:?}", id, hits);
            if sensor == Sensor::Line {
                prop_assert!(hits[0] != "sensor-equals-check");
            }
        }
    }

    #[test]
    fn useless_verdict_matches_brute_force(
        sensor in prop::sample::select(Sensor::ALL.to_vec()),
        device in prop::sample::select(vec![Device::Codey, Device::Mcore]),
        op in prop::sample::select(vec![CmpOp::Gt, CmpOp::Lt, CmpOp::Eq]),
        c in prop_oneof![(-300i32..1200).prop_map(f64::from), -300.0f64..1200.0],
    ) {
        let range = sensor_range(sensor, device);
        prop_assert_eq!(verdict(range, op, c), brute_force(range, op, c));
    }

    #[test]
    fn wmc_and_block_count_match_raw_json(prog in program()) {
        let src = prog.source();
        let m = compute_metrics(&build(&src));
        let (blocks, decisions, hats) = json_counts(&src);
        prop_assert_eq!(m.block_count, blocks);
        prop_assert_eq!(m.script_count, hats);
        prop_assert_eq!(m.wmc, hats + decisions);
        let project = build(&src);
        let per_script: usize = project.actors.iter().flat_map(|a| &a.scripts).map(cyclomatic).sum();
        prop_assert_eq!(m.wmc, per_script);
        prop_assert!(m.most_complex_script <= m.wmc);
        if m.script_count > 0 {
            prop_assert!(m.wmc >= m.script_count);
        }
    }

    #[test]
    fn deleting_a_script_never_increases_metrics(prog in program(), pick in any::<prop::sample::Index>()) {
        let total: usize = prog.actors.iter().map(|(_, s)| s.len()).sum();
        prop_assume!(total > 0);
        let mut k = pick.index(total);
        let mut smaller = prog.clone();
        for (_, scripts) in &mut smaller.actors {
            if k < scripts.len() {
                scripts.remove(k);
                break;
            }
            k -= scripts.len();
        }
        let before = compute_metrics(&build(&prog.source()));
        let after = compute_metrics(&build(&smaller.source()));
        prop_assert!(after.block_count <= before.block_count);
        prop_assert!(after.script_count < before.script_count);
        prop_assert!(after.wmc <= before.wmc);
        prop_assert!(after.longest_script <= before.longest_script);
        prop_assert!(after.most_complex_script <= before.most_complex_script);
    }

    #[test]
    fn reports_round_trip_and_hints_resolve(prog in program()) {
        let a = analyze(build(&prog.source()), &ALL);
        let catalog = HintCatalog::builtin();
        for lang in ["en", "de"] {
            let report = Report::new("p.json", a.metrics, &a.issues, catalog, lang).unwrap();
            let text = report.to_json();
            let back: Report = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_json(), text);
            prop_assert_eq!(report.to_csv().lines().count(), a.issues.len() + 1);
        }
        for issue in &a.issues {
            let needed = catalog.placeholders(&issue.hint_key).unwrap();
            let given: std::collections::BTreeSet<&str> = issue.params.keys().map(String::as_str).collect();
            prop_assert!(needed.is_subset(&given), "{}", issue.pattern_id);
            prop_assert!(!issue.block_ids.is_empty());
        }
    }
}

#[test]
fn category_filter_selects_subsets() {
    let src = "mcore{[on_flag; led_on(255,0,0); move(fwd,-50)] [on_flag; move(fwd,50)]}";
    let all = issues(src);
    let mut by_cat: BTreeMap<Category, usize> = BTreeMap::new();
    for c in ALL {
        let only = run_finders(&build(src), &[c]);
        assert!(only.iter().all(|i| i.category == c));
        by_cat.insert(c, only.len());
    }
    assert_eq!(by_cat.values().sum::<usize>(), all.len());
    assert!(by_cat.values().all(|&n| n > 0));
}
