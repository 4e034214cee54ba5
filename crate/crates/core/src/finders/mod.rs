//! Pattern finders. Every finder is a pure function from a project to its
//! issues; only scripts of robot actors are inspected.

pub mod bugs;
pub mod perfumes;
pub mod smells;

use crate::ast::{
    literal_number, walk_actor, Actor, Context, Expr, ExprKind, Project, Script, Stmt, StmtKind, Visitor,
};
use crate::patterns::Category;
use crate::registry::{motor_spec, sensor_range, Device, OperatorKind, Sensor, SensorRange};
use crate::report::{sort_issues, Issue};

pub type FinderFn = fn(&Project) -> Vec<Issue>;

/// Every finder with the category of the patterns it reports.
pub const FINDERS: &[(Category, FinderFn)] = &[
    (Category::Bug, bugs::find_action_not_stopped),
    (Category::Bug, bugs::find_all_actuator_off_missing),
    (Category::Bug, bugs::find_colour_out_of_range),
    (Category::Bug, bugs::find_interrupted_loop_sensing),
    (Category::Bug, bugs::find_low_motor_power),
    (Category::Bug, bugs::find_missing_loop_sensing),
    (Category::Bug, bugs::find_motor_out_of_range),
    (Category::Bug, bugs::find_parallel_actuator_use),
    (Category::Bug, bugs::find_query_in_loop),
    (Category::Bug, bugs::find_sensor_equals_check),
    (Category::Bug, bugs::find_several_launches),
    (Category::Bug, bugs::find_stuttering_action),
    (Category::Bug, bugs::find_all_useless_sensing),
    (Category::Bug, bugs::find_waiting_aborted),
    (Category::Smell, smells::find_negative_motor_power),
    (Category::Smell, smells::find_noneffective_modification),
    (Category::Smell, smells::find_noneffective_time_limit),
    (Category::Perfume, perfumes::find_colour_usage),
    (Category::Perfume, perfumes::find_all_correct_sensing),
    (Category::Perfume, perfumes::find_all_actuator_off),
    (Category::Perfume, perfumes::find_loop_sensing),
    (Category::Perfume, perfumes::find_motor_usage),
    (Category::Perfume, perfumes::find_parallelisation),
];

/// Runs the finders of the given categories; issues come back sorted.
pub fn run_finders(project: &Project, include: &[Category]) -> Vec<Issue> {
    let mut issues: Vec<Issue> = FINDERS
        .iter()
        .filter(|(category, _)| include.contains(category))
        .flat_map(|(_, finder)| finder(project))
        .collect();
    sort_issues(&mut issues);
    issues
}

// ---------------------------------------------------------------------------
// Traversal helpers

/// Robot actors with their device.
pub(crate) fn robots(project: &Project) -> impl Iterator<Item = (&Actor, Device)> {
    project
        .actors
        .iter()
        .filter_map(|a| a.device.map(|d| (a, d)))
}

/// A statement inside a script, with its enclosing statements.
pub(crate) struct StmtSite<'a> {
    pub script: &'a Script,
    pub stmt: &'a Stmt,
    pub ancestors: Vec<&'a Stmt>,
}

impl StmtSite<'_> {
    pub fn in_loop(&self) -> bool {
        self.ancestors.iter().any(|s| s.is_loop())
    }

    pub fn nearest_loop(&self) -> Option<&Stmt> {
        self.ancestors.iter().rev().copied().find(|s| s.is_loop())
    }
}

/// An expression inside a script.
pub(crate) struct ExprSite<'a> {
    pub script: &'a Script,
    pub expr: &'a Expr,
}

#[derive(Default)]
struct SiteCollector<'a> {
    stmts: Vec<StmtSite<'a>>,
    exprs: Vec<ExprSite<'a>>,
}

impl<'a> Visitor<'a> for SiteCollector<'a> {
    fn visit_stmt(&mut self, stmt: &'a Stmt, ctx: &Context<'a>) {
        if let Some(script) = ctx.script {
            self.stmts.push(StmtSite {
                script,
                stmt,
                ancestors: ctx.ancestors.clone(),
            });
        }
    }

    fn visit_expr(&mut self, expr: &'a Expr, ctx: &Context<'a>) {
        if let Some(script) = ctx.script {
            self.exprs.push(ExprSite { script, expr });
        }
    }
}

/// Statement sites of an actor's scripts in document order.
pub(crate) fn stmt_sites(actor: &Actor) -> Vec<StmtSite<'_>> {
    let mut c = SiteCollector::default();
    walk_actor(actor, &mut c);
    c.stmts
}

pub(crate) fn expr_sites(actor: &Actor) -> Vec<ExprSite<'_>> {
    let mut c = SiteCollector::default();
    walk_actor(actor, &mut c);
    c.exprs
}

pub(crate) fn id(stmt: &Stmt) -> String {
    stmt.block_id.clone()
}

pub(crate) fn script_index(script: &Script) -> Option<usize> {
    Some(script.id.index)
}

// ---------------------------------------------------------------------------
// Sensor comparisons

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Gt,
    Lt,
    Eq,
}

impl CmpOp {
    pub fn eval(self, x: f64, c: f64) -> bool {
        match self {
            CmpOp::Gt => x > c,
            CmpOp::Lt => x < c,
            CmpOp::Eq => x == c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AlwaysTrue,
    AlwaysFalse,
    Satisfiable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AlwaysTrue => "alwaysTrue",
            Verdict::AlwaysFalse => "alwaysFalse",
            Verdict::Satisfiable => "satisfiable",
        }
    }
}

/// Truth of `sensor <op> c` over every value the sensor can report.
pub fn verdict(range: SensorRange, op: CmpOp, c: f64) -> Verdict {
    let SensorRange { lo, hi, discrete } = range;
    match op {
        CmpOp::Gt if c >= hi => Verdict::AlwaysFalse,
        CmpOp::Gt if c < lo => Verdict::AlwaysTrue,
        CmpOp::Lt if c <= lo => Verdict::AlwaysFalse,
        CmpOp::Lt if c > hi => Verdict::AlwaysTrue,
        CmpOp::Eq if c < lo || c > hi || (discrete && c.fract() != 0.0) => Verdict::AlwaysFalse,
        _ => Verdict::Satisfiable,
    }
}

/// Which family claims a sensor/literal comparison. Exactly one applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingClass {
    Useless(Verdict),
    EqualsCheck,
    Correct,
}

pub fn classify_sensing(range: SensorRange, op: CmpOp, c: f64) -> SensingClass {
    match verdict(range, op, c) {
        Verdict::Satisfiable if op == CmpOp::Eq && !range.discrete => SensingClass::EqualsCheck,
        Verdict::Satisfiable => SensingClass::Correct,
        v => SensingClass::Useless(v),
    }
}

/// A sensor compared with a numeric literal, normalized to sensor-on-the-left.
#[derive(Debug, Clone)]
pub struct Comparison<'a> {
    pub expr: &'a Expr,
    pub sensor: Sensor,
    pub op: CmpOp,
    pub value: f64,
}

pub fn comparison(expr: &Expr) -> Option<Comparison<'_>> {
    let ExprKind::Binary { op, lhs, rhs } = &expr.kind else {
        return None;
    };
    let op = match op {
        OperatorKind::Gt => CmpOp::Gt,
        OperatorKind::Lt => CmpOp::Lt,
        OperatorKind::Eq => CmpOp::Eq,
        _ => return None,
    };
    let sensor_of = |e: &Expr| match e.kind {
        ExprKind::Sensor { sensor } => Some(sensor),
        _ => None,
    };
    let (sensor, value, op) = match (sensor_of(lhs), sensor_of(rhs)) {
        (Some(s), None) => (s, literal_number(rhs)?, op),
        (None, Some(s)) => {
            let flipped = match op {
                CmpOp::Gt => CmpOp::Lt,
                CmpOp::Lt => CmpOp::Gt,
                CmpOp::Eq => CmpOp::Eq,
            };
            (s, literal_number(lhs)?, flipped)
        }
        _ => return None,
    };
    Some(Comparison {
        expr,
        sensor,
        op,
        value,
    })
}

/// Classified sensor comparisons of one actor.
pub(crate) fn sensing_sites(actor: &Actor, device: Device) -> Vec<(&Script, Comparison<'_>, SensorRange, SensingClass)> {
    expr_sites(actor)
        .into_iter()
        .filter_map(|site| {
            let cmp = comparison(site.expr)?;
            site.expr.block_id.as_ref()?;
            let range = sensor_range(cmp.sensor, device);
            let class = classify_sensing(range, cmp.op, cmp.value);
            Some((site.script, cmp, range, class))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Motor power literals

/// Which family claims a motor power literal. Exactly one applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotorClass {
    OutOfRange,
    Low,
    Negative,
    Usage,
    Nothing,
}

pub fn classify_motor(device: Device, p: f64) -> MotorClass {
    let spec = motor_spec(device);
    if p.abs() > spec.max {
        MotorClass::OutOfRange
    } else if p != 0.0 && p.abs() < spec.min_effective {
        MotorClass::Low
    } else if p < 0.0 {
        MotorClass::Negative
    } else if p > 0.0 {
        MotorClass::Usage
    } else {
        MotorClass::Nothing
    }
}

/// Motor statements with a literal power, classified.
pub(crate) fn motor_sites(actor: &Actor, device: Device) -> Vec<(&Script, &Stmt, f64, MotorClass)> {
    stmt_sites(actor)
        .into_iter()
        .filter_map(|site| {
            let p = literal_number(site.stmt.motor_power()?)?;
            Some((site.script, site.stmt, p, classify_motor(device, p)))
        })
        .collect()
}

/// Statement lists of a script, outermost first.
pub(crate) fn statement_lists(script: &Script) -> Vec<&[Stmt]> {
    let mut out: Vec<&[Stmt]> = vec![&script.body];
    let mut i = 0;
    while i < out.len() {
        let list = out[i];
        for stmt in list {
            out.extend(stmt.bodies());
        }
        i += 1;
    }
    out
}

pub(crate) fn is_variable_write(stmt: &Stmt) -> bool {
    matches!(stmt.kind, StmtKind::SetVariable { .. } | StmtKind::ChangeVariable { .. })
}
