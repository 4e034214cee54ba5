//! Typed syntax tree of a project, its builder, and the visitor driver.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use serde::Serialize;

use crate::ingest::{IngestWarning, LiteralKind, RawBlock, RawInput, RawProject, RawTarget, WarningKind};
use crate::registry::{
    Actuator, BlockKind, BooleanSensorKind, ControlKind, Device, Direction, HatEvent, OperatorKind,
    Registry, RegistryEntry, Sensor,
};

/// Expressions nested deeper than this are cut off with a warning.
const MAX_DEPTH: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Project {
    pub source_path: PathBuf,
    pub actors: Vec<Actor>,
    pub warnings: Vec<IngestWarning>,
}

impl Project {
    pub fn robot_actors(&self) -> impl Iterator<Item = &Actor> {
        self.actors.iter().filter(|a| a.is_robot())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Actor {
    pub name: String,
    pub is_stage: bool,
    /// Set for Codey Rocky and mBot actors only.
    pub device: Option<Device>,
    /// Device id as written in the file, including unsupported robots.
    pub raw_device: Option<String>,
    pub scripts: Vec<Script>,
    /// Hatless top-level fragments, in document order.
    pub loose_blocks: Vec<Stmt>,
}

impl Actor {
    pub fn is_robot(&self) -> bool {
        self.device.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ScriptId {
    pub actor: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Script {
    pub id: ScriptId,
    pub hat: Hat,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hat {
    pub block_id: String,
    pub opcode: String,
    pub event: HatEvent,
    pub fields: BTreeMap<String, String>,
}

impl Hat {
    /// Two hats start scripts on the same occasion.
    pub fn same_trigger(&self, other: &Hat) -> bool {
        self.opcode == other.opcode && self.fields == other.fields
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    All,
    OtherScripts,
    ThisScript,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stmt {
    pub block_id: String,
    pub opcode: String,
    pub kind: StmtKind,
    /// Inputs not bound to a named slot.
    pub extra: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StmtKind {
    ActuatorOn {
        actuator: Actuator,
        target: Option<String>,
        colour: Vec<Expr>,
    },
    ActuatorOff {
        actuator: Actuator,
        target: Option<String>,
    },
    TimedActuator {
        actuator: Actuator,
        target: Option<String>,
        time: Expr,
        power: Option<Expr>,
        colour: Vec<Expr>,
    },
    Move {
        direction: Direction,
        target: Option<String>,
        power: Expr,
    },
    TimedMove {
        direction: Direction,
        power: Expr,
        time: Expr,
    },
    If {
        condition: Expr,
        then_body: Vec<Stmt>,
    },
    IfElse {
        condition: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    Forever {
        body: Vec<Stmt>,
    },
    RepeatTimes {
        times: Expr,
        body: Vec<Stmt>,
    },
    RepeatUntil {
        condition: Expr,
        body: Vec<Stmt>,
    },
    Wait {
        time: Expr,
    },
    WaitUntil {
        condition: Expr,
    },
    Stop {
        stop: StopKind,
    },
    SetVariable {
        variable: String,
        value: Expr,
    },
    ChangeVariable {
        variable: String,
        by: Expr,
    },
    /// Unmapped or non-robot statement; `SUBSTACK*` inputs are kept as bodies.
    Other {
        bodies: Vec<Vec<Stmt>>,
    },
    /// A reporter block lying loose on the canvas.
    Reporter {
        expr: Expr,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expr {
    /// Absent for inline literals.
    pub block_id: Option<String>,
    /// Menu or literal shadow block.
    pub shadow: bool,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExprKind {
    Number { value: f64 },
    Text { text: String },
    Colour { components: Vec<f64> },
    Sensor { sensor: Sensor },
    BooleanSensor { sensor: BooleanSensorKind },
    Binary {
        op: OperatorKind,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not { operand: Box<Expr> },
    Variable { name: String },
    Unknown { opcode: String, args: Vec<Expr> },
    Empty,
}

impl Expr {
    pub fn literal(kind: ExprKind) -> Expr {
        Expr {
            block_id: None,
            shadow: false,
            kind,
        }
    }

    pub fn empty() -> Expr {
        Expr::literal(ExprKind::Empty)
    }

    /// A real (non-shadow) block that counts toward size metrics.
    pub fn is_block(&self) -> bool {
        self.block_id.is_some() && !self.shadow
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Not { operand } => vec![operand],
            ExprKind::Unknown { args, .. } => args.iter().collect(),
            _ => Vec::new(),
        }
    }
}

impl Stmt {
    /// Nested statement lists, in document order.
    pub fn bodies(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::If { then_body, .. } => vec![then_body],
            StmtKind::IfElse {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            StmtKind::Forever { body }
            | StmtKind::RepeatTimes { body, .. }
            | StmtKind::RepeatUntil { body, .. } => vec![body],
            StmtKind::Other { bodies } => bodies.iter().map(Vec::as_slice).collect(),
            _ => Vec::new(),
        }
    }

    /// Expressions held directly by this statement, in slot order.
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut out: Vec<&Expr> = match &self.kind {
            StmtKind::ActuatorOn { colour, .. } => colour.iter().collect(),
            StmtKind::TimedActuator {
                time, power, colour, ..
            } => colour.iter().chain(power).chain(std::iter::once(time)).collect(),
            StmtKind::Move { power, .. } => vec![power],
            StmtKind::TimedMove { power, time, .. } => vec![power, time],
            StmtKind::If { condition, .. }
            | StmtKind::IfElse { condition, .. }
            | StmtKind::RepeatUntil { condition, .. }
            | StmtKind::WaitUntil { condition } => vec![condition],
            StmtKind::RepeatTimes { times, .. } => vec![times],
            StmtKind::Wait { time } => vec![time],
            StmtKind::SetVariable { value, .. } => vec![value],
            StmtKind::ChangeVariable { by, .. } => vec![by],
            StmtKind::Reporter { expr } => vec![expr],
            StmtKind::ActuatorOff { .. }
            | StmtKind::Forever { .. }
            | StmtKind::Stop { .. }
            | StmtKind::Other { .. } => Vec::new(),
        };
        out.extend(self.extra.iter());
        out
    }

    pub fn is_loop(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Forever { .. } | StmtKind::RepeatTimes { .. } | StmtKind::RepeatUntil { .. }
        )
    }

    /// Condition of an `if`, `if-else`, `wait until` or `repeat until`.
    pub fn condition(&self) -> Option<&Expr> {
        match &self.kind {
            StmtKind::If { condition, .. }
            | StmtKind::IfElse { condition, .. }
            | StmtKind::RepeatUntil { condition, .. }
            | StmtKind::WaitUntil { condition } => Some(condition),
            _ => None,
        }
    }

    /// Power argument of a movement or timed motor statement.
    pub fn motor_power(&self) -> Option<&Expr> {
        match &self.kind {
            StmtKind::Move { power, .. } | StmtKind::TimedMove { power, .. } => Some(power),
            StmtKind::TimedActuator {
                actuator: Actuator::Motor,
                power,
                ..
            } => power.as_ref(),
            _ => None,
        }
    }

    /// Duration argument of a time-limited statement.
    pub fn time_limit(&self) -> Option<&Expr> {
        match &self.kind {
            StmtKind::TimedActuator { time, .. } | StmtKind::TimedMove { time, .. } => Some(time),
            _ => None,
        }
    }

    pub fn colour_args(&self) -> &[Expr] {
        match &self.kind {
            StmtKind::ActuatorOn { colour, .. } | StmtKind::TimedActuator { colour, .. } => colour,
            _ => &[],
        }
    }
}

// ---------------------------------------------------------------------------
// Semantic queries

/// Time-limited statement: activate, wait, deactivate.
pub fn is_timed(stmt: &Stmt) -> bool {
    matches!(stmt.kind, StmtKind::TimedActuator { .. } | StmtKind::TimedMove { .. })
}

/// A statement that pauses its script: a wait or a time-limited statement
/// whose duration is positive or not a literal.
pub fn is_delaying(stmt: &Stmt) -> bool {
    let time = match &stmt.kind {
        StmtKind::Wait { time } => time,
        _ => match stmt.time_limit() {
            Some(time) => time,
            None => return false,
        },
    };
    literal_number(time).is_none_or(|t| t > 0.0)
}

pub fn actuator_of(stmt: &Stmt) -> Option<Actuator> {
    match &stmt.kind {
        StmtKind::ActuatorOn { actuator, .. }
        | StmtKind::ActuatorOff { actuator, .. }
        | StmtKind::TimedActuator { actuator, .. } => Some(*actuator),
        StmtKind::Move { .. } | StmtKind::TimedMove { .. } => Some(Actuator::Motor),
        _ => None,
    }
}

/// Statement switching an actuator on, timed or not.
pub fn activation_of(stmt: &Stmt) -> Option<Actuator> {
    match &stmt.kind {
        StmtKind::ActuatorOff { .. } => None,
        _ => actuator_of(stmt),
    }
}

/// Statement switching an actuator on without ever switching it off.
pub fn untimed_activation_of(stmt: &Stmt) -> Option<Actuator> {
    match &stmt.kind {
        StmtKind::ActuatorOn { actuator, .. } => Some(*actuator),
        StmtKind::Move { .. } => Some(Actuator::Motor),
        _ => None,
    }
}

pub fn deactivation_of(stmt: &Stmt) -> Option<Actuator> {
    match &stmt.kind {
        StmtKind::ActuatorOff { actuator, .. } => Some(*actuator),
        _ => None,
    }
}

/// Sensor reporters inside `expr`, through operators, in pre-order.
pub fn sensor_reporters(expr: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    let mut stack = vec![expr];
    while let Some(e) = stack.pop() {
        if matches!(e.kind, ExprKind::Sensor { .. }) {
            out.push(e);
        }
        stack.extend(e.children().into_iter().rev());
    }
    out
}

pub fn sensor_refs(expr: &Expr) -> Vec<Sensor> {
    sensor_reporters(expr)
        .into_iter()
        .filter_map(|e| match e.kind {
            ExprKind::Sensor { sensor } => Some(sensor),
            _ => None,
        })
        .collect()
}

/// True when `expr` reads a numeric sensor or a button/remote/key state.
pub fn queries_sensor_or_button(expr: &Expr) -> bool {
    let mut stack = vec![expr];
    while let Some(e) = stack.pop() {
        if matches!(e.kind, ExprKind::Sensor { .. } | ExprKind::BooleanSensor { .. }) {
            return true;
        }
        stack.extend(e.children());
    }
    false
}

/// Numeric value of a literal; text is coerced when it parses as a finite number.
pub fn literal_number(expr: &Expr) -> Option<f64> {
    match &expr.kind {
        ExprKind::Number { value } => Some(*value),
        ExprKind::Text { text } => parse_number(text),
        _ => None,
    }
}

fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Colour components of a block's colour arguments. Every argument yields
/// one or more components; non-literal arguments yield `None`.
pub fn colour_components(args: &[Expr]) -> Vec<Option<f64>> {
    let mut out = Vec::new();
    for arg in args {
        match &arg.kind {
            ExprKind::Colour { components } => out.extend(components.iter().map(|c| Some(*c))),
            ExprKind::Number { value } => out.push(Some(*value)),
            ExprKind::Text { text } => match parse_packed(text) {
                Some(components) => out.extend(components.into_iter().map(Some)),
                None => out.push(None),
            },
            _ => out.push(None),
        }
    }
    out
}

/// `"200"`, `"#ff8000"`, or a comma/space separated component list.
fn parse_packed(text: &str) -> Option<Vec<f64>> {
    if let Some(c) = parse_hex_colour(text) {
        return Some(c);
    }
    let parts: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect();
    if parts.is_empty() {
        return None;
    }
    parts.into_iter().map(parse_number).collect()
}

fn parse_hex_colour(text: &str) -> Option<Vec<f64>> {
    let hex = text.trim().strip_prefix('#')?;
    if hex.len() != 6 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    (0..3)
        .map(|i| u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).ok().map(f64::from))
        .collect()
}

/// Scripts of an actor grouped by hat equality, groups in order of first appearance.
pub fn scripts_grouped_by_hat(actor: &Actor) -> Vec<Vec<&Script>> {
    let mut groups: Vec<Vec<&Script>> = Vec::new();
    for script in &actor.scripts {
        match groups
            .iter_mut()
            .find(|g| g[0].hat.same_trigger(&script.hat))
        {
            Some(group) => group.push(script),
            None => groups.push(vec![script]),
        }
    }
    groups
}

/// All statements of a body, depth-first in document order.
pub fn flatten(body: &[Stmt]) -> Vec<&Stmt> {
    let mut out = Vec::new();
    let mut stack: Vec<&Stmt> = body.iter().rev().collect();
    while let Some(stmt) = stack.pop() {
        out.push(stmt);
        for b in stmt.bodies().into_iter().rev() {
            stack.extend(b.iter().rev());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Visitor

/// Position of a visited node.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub actor: &'a Actor,
    /// `None` for loose blocks.
    pub script: Option<&'a Script>,
    /// Enclosing statements, outermost first. For expressions the owning
    /// statement is the last entry.
    pub ancestors: Vec<&'a Stmt>,
}

impl<'a> Context<'a> {
    pub fn enclosing_loops(&self) -> Vec<&'a Stmt> {
        self.ancestors.iter().copied().filter(|s| s.is_loop()).collect()
    }

    pub fn in_loop(&self) -> bool {
        self.ancestors.iter().any(|s| s.is_loop())
    }

    pub fn nearest_loop(&self) -> Option<&'a Stmt> {
        self.ancestors.iter().rev().copied().find(|s| s.is_loop())
    }
}

/// Callbacks for [`walk`]; every method defaults to doing nothing.
pub trait Visitor<'a> {
    fn visit_actor(&mut self, _actor: &'a Actor) {}
    fn leave_actor(&mut self, _actor: &'a Actor) {}
    fn visit_script(&mut self, _script: &'a Script, _ctx: &Context<'a>) {}
    fn visit_hat(&mut self, _hat: &'a Hat, _ctx: &Context<'a>) {}
    fn visit_stmt(&mut self, _stmt: &'a Stmt, _ctx: &Context<'a>) {}
    fn visit_expr(&mut self, _expr: &'a Expr, _ctx: &Context<'a>) {}
}

/// Depth-first, document-order traversal visiting every actor, script,
/// hat, statement and expression exactly once.
pub fn walk<'a, V: Visitor<'a>>(project: &'a Project, visitor: &mut V) {
    for actor in &project.actors {
        walk_actor(actor, visitor);
    }
}

pub fn walk_actor<'a, V: Visitor<'a>>(actor: &'a Actor, visitor: &mut V) {
    visitor.visit_actor(actor);
    for script in &actor.scripts {
        let mut ctx = Context {
            actor,
            script: Some(script),
            ancestors: Vec::new(),
        };
        visitor.visit_script(script, &ctx);
        visitor.visit_hat(&script.hat, &ctx);
        walk_body(&script.body, &mut ctx, visitor);
    }
    let mut ctx = Context {
        actor,
        script: None,
        ancestors: Vec::new(),
    };
    walk_body(&actor.loose_blocks, &mut ctx, visitor);
    visitor.leave_actor(actor);
}

fn walk_body<'a, V: Visitor<'a>>(body: &'a [Stmt], ctx: &mut Context<'a>, visitor: &mut V) {
    for stmt in body {
        visitor.visit_stmt(stmt, ctx);
        ctx.ancestors.push(stmt);
        for expr in stmt.exprs() {
            walk_expr(expr, ctx, visitor);
        }
        for nested in stmt.bodies() {
            walk_body(nested, ctx, visitor);
        }
        ctx.ancestors.pop();
    }
}

fn walk_expr<'a, V: Visitor<'a>>(expr: &'a Expr, ctx: &Context<'a>, visitor: &mut V) {
    visitor.visit_expr(expr, ctx);
    for child in expr.children() {
        walk_expr(child, ctx, visitor);
    }
}

// ---------------------------------------------------------------------------
// Builder

/// Converts a decoded project into its syntax tree. Never fails: broken
/// substructures become `Unknown`/`Empty` nodes with a warning.
pub fn build_ast(raw: &RawProject, registry: &Registry) -> Project {
    let mut warnings = raw.warnings.clone();
    let actors = raw
        .targets
        .iter()
        .map(|target| {
            let mut builder = ActorBuilder {
                target,
                device: target.device.as_deref().and_then(Device::from_id),
                registry,
                used: HashSet::new(),
                warnings: &mut warnings,
            };
            builder.build()
        })
        .collect();
    Project {
        source_path: raw.source_path.clone(),
        actors,
        warnings,
    }
}

struct ActorBuilder<'r> {
    target: &'r RawTarget,
    device: Option<Device>,
    registry: &'r Registry,
    used: HashSet<&'r str>,
    warnings: &'r mut Vec<IngestWarning>,
}

impl<'r> ActorBuilder<'r> {
    fn build(&mut self) -> Actor {
        let mut scripts = Vec::new();
        let mut loose_blocks = Vec::new();
        let tops: Vec<(&str, &RawBlock)> = self
            .target
            .blocks
            .iter()
            .filter(|(_, b)| b.top_level && !b.shadow)
            .map(|(id, b)| (id.as_str(), b))
            .collect();
        for (id, block) in tops {
            if self.used.contains(id) {
                continue;
            }
            let kind = self.kind_of(block);
            match kind {
                BlockKind::Hat { event } => {
                    self.used.insert(id);
                    let body = match block.next.as_deref() {
                        Some(next) => self.chain(next, 0),
                        None => Vec::new(),
                    };
                    scripts.push(Script {
                        id: ScriptId {
                            actor: self.target.name.clone(),
                            index: scripts.len(),
                        },
                        hat: Hat {
                            block_id: id.to_string(),
                            opcode: block.opcode.clone(),
                            event,
                            fields: block.fields.clone(),
                        },
                        body,
                    });
                }
                BlockKind::SensorReporter { .. }
                | BlockKind::BooleanSensor { .. }
                | BlockKind::Operator { .. }
                | BlockKind::VariableReporter => {
                    let expr = self.expr_block(id, 0);
                    loose_blocks.push(Stmt {
                        block_id: id.to_string(),
                        opcode: block.opcode.clone(),
                        kind: StmtKind::Reporter { expr },
                        extra: Vec::new(),
                    });
                }
                _ => loose_blocks.extend(self.chain(id, 0)),
            }
        }
        Actor {
            name: self.target.name.clone(),
            is_stage: self.target.is_stage,
            device: self.device,
            raw_device: self.target.device.clone(),
            scripts,
            loose_blocks,
        }
    }

    fn warn(&mut self, block_id: &str, kind: WarningKind) {
        self.warnings.push(IngestWarning {
            target: self.target.name.clone(),
            block_id: block_id.to_string(),
            kind,
        });
    }

    fn entry(&self, block: &RawBlock) -> Option<&'r RegistryEntry> {
        self.registry.entry(&block.opcode, self.device)
    }

    fn kind_of(&self, block: &RawBlock) -> BlockKind {
        self.entry(block)
            .map_or(BlockKind::Unknown, |e| e.kind_for_fields(&block.fields))
    }

    /// Follows `next` links from `start`.
    fn chain(&mut self, start: &'r str, depth: usize) -> Vec<Stmt> {
        let mut out = Vec::new();
        let mut cursor = Some(start);
        while let Some(id) = cursor {
            let Some((key, block)) = self.target.blocks.get_key_value(id) else {
                break;
            };
            if !self.used.insert(key.as_str()) {
                self.warn(id, WarningKind::Cycle);
                break;
            }
            if depth > MAX_DEPTH {
                self.warn(id, WarningKind::Cycle);
                break;
            }
            out.push(self.stmt(key, block, depth));
            cursor = block.next.as_deref();
        }
        out
    }

    fn stmt(&mut self, id: &'r str, block: &'r RawBlock, depth: usize) -> Stmt {
        let entry = self.entry(block);
        let kind = entry.map_or(BlockKind::Unknown, |e| e.kind_for_fields(&block.fields));
        let slots = entry.map(|e| e.slots.clone()).unwrap_or_default();
        let mut consumed: HashSet<String> = HashSet::new();

        macro_rules! input {
            ($slot:expr) => {{
                let slot: Option<&String> = $slot.as_ref();
                if let Some(s) = slot {
                    consumed.insert(s.clone());
                }
                self.input_expr(block, slot.map(String::as_str), depth)
            }};
        }
        macro_rules! body {
            ($slot:expr) => {{
                let slot: Option<&String> = $slot.as_ref();
                if let Some(s) = slot {
                    consumed.insert(s.clone());
                }
                self.substack(block, slot.map(String::as_str), depth)
            }};
        }

        let target = slots.target.as_deref().and_then(|t| {
            consumed.insert(t.to_string());
            self.text_arg(block, t)
        });
        let colour: Vec<Expr> = slots
            .colour
            .iter()
            .map(|slot| {
                consumed.insert(slot.clone());
                self.input_expr(block, Some(slot), depth)
            })
            .collect();

        let kind = match kind {
            BlockKind::ActuatorOn { actuator } => StmtKind::ActuatorOn {
                actuator,
                target,
                colour,
            },
            BlockKind::ActuatorOff { actuator } => StmtKind::ActuatorOff { actuator, target },
            BlockKind::TimedActuator { actuator } => {
                let power = slots.power.as_ref().map(|_| input!(slots.power));
                StmtKind::TimedActuator {
                    actuator,
                    target,
                    time: input!(slots.time),
                    power,
                    colour,
                }
            }
            BlockKind::Move { direction } => StmtKind::Move {
                direction,
                target,
                power: input!(slots.power),
            },
            BlockKind::TimedMove { direction } => StmtKind::TimedMove {
                direction,
                power: input!(slots.power),
                time: input!(slots.time),
            },
            BlockKind::Control { control } => match control {
                ControlKind::If => StmtKind::If {
                    condition: input!(slots.condition),
                    then_body: body!(slots.substack),
                },
                ControlKind::IfElse => StmtKind::IfElse {
                    condition: input!(slots.condition),
                    then_body: body!(slots.substack),
                    else_body: body!(slots.substack2),
                },
                ControlKind::Forever => StmtKind::Forever {
                    body: body!(slots.substack),
                },
                ControlKind::RepeatTimes => StmtKind::RepeatTimes {
                    times: input!(slots.times),
                    body: body!(slots.substack),
                },
                ControlKind::RepeatUntil => StmtKind::RepeatUntil {
                    condition: input!(slots.condition),
                    body: body!(slots.substack),
                },
                ControlKind::Wait => StmtKind::Wait {
                    time: input!(slots.time),
                },
                ControlKind::WaitUntil => StmtKind::WaitUntil {
                    condition: input!(slots.condition),
                },
                ControlKind::StopAll => StmtKind::Stop { stop: StopKind::All },
                ControlKind::StopOtherScripts => StmtKind::Stop {
                    stop: StopKind::OtherScripts,
                },
                ControlKind::StopThisScript => StmtKind::Stop {
                    stop: StopKind::ThisScript,
                },
            },
            BlockKind::VariableSet => StmtKind::SetVariable {
                variable: self.variable_name(block, slots.variable.as_deref(), &mut consumed),
                value: input!(slots.value),
            },
            BlockKind::VariableChange => StmtKind::ChangeVariable {
                variable: self.variable_name(block, slots.variable.as_deref(), &mut consumed),
                by: input!(slots.value),
            },
            _ => {
                let substack_slots: Vec<String> = block
                    .inputs
                    .keys()
                    .filter(|k| k.starts_with("SUBSTACK"))
                    .cloned()
                    .collect();
                let bodies = substack_slots
                    .iter()
                    .map(|s| {
                        consumed.insert(s.clone());
                        self.substack(block, Some(s), depth)
                    })
                    .collect();
                StmtKind::Other { bodies }
            }
        };

        let extra_slots: Vec<&'r String> = block
            .inputs
            .keys()
            .filter(|k| !consumed.contains(k.as_str()))
            .collect();
        let extra = extra_slots
            .into_iter()
            .map(|slot| self.input_expr(block, Some(slot), depth))
            .collect();
        Stmt {
            block_id: id.to_string(),
            opcode: block.opcode.clone(),
            kind,
            extra,
        }
    }

    fn variable_name(
        &self,
        block: &RawBlock,
        field: Option<&str>,
        consumed: &mut HashSet<String>,
    ) -> String {
        let Some(field) = field else {
            return String::new();
        };
        consumed.insert(field.to_string());
        if let Some(name) = block.fields.get(field) {
            return name.clone();
        }
        match block.inputs.get(field) {
            Some(RawInput::Variable(name)) => name.clone(),
            Some(RawInput::Literal(l)) => l.text.clone(),
            _ => String::new(),
        }
    }

    /// Field value or literal input text used to address an LED/port.
    fn text_arg(&self, block: &RawBlock, name: &str) -> Option<String> {
        if let Some(v) = block.fields.get(name) {
            return Some(v.clone());
        }
        match block.inputs.get(name)? {
            RawInput::Literal(l) => Some(l.text.clone()),
            RawInput::Block(id) => {
                let shadow = self.target.blocks.get(id).filter(|b| b.shadow)?;
                shadow.fields.values().next().cloned()
            }
            _ => None,
        }
    }

    fn substack(&mut self, block: &'r RawBlock, slot: Option<&str>, depth: usize) -> Vec<Stmt> {
        match slot.and_then(|s| block.inputs.get(s)) {
            Some(RawInput::Block(id)) => self.chain(id, depth + 1),
            _ => Vec::new(),
        }
    }

    fn input_expr(&mut self, block: &'r RawBlock, slot: Option<&str>, depth: usize) -> Expr {
        match slot.and_then(|s| block.inputs.get(s)) {
            None | Some(RawInput::Empty) => Expr::empty(),
            Some(RawInput::Literal(lit)) => Expr::literal(literal_kind(&lit.kind, &lit.text)),
            Some(RawInput::Variable(name)) => Expr::literal(ExprKind::Variable { name: name.clone() }),
            Some(RawInput::Block(id)) => self.expr_block(id, depth + 1),
        }
    }

    fn expr_block(&mut self, id: &'r str, depth: usize) -> Expr {
        let Some((key, block)) = self.target.blocks.get_key_value(id) else {
            return Expr::empty();
        };
        if !self.used.insert(key.as_str()) || depth > MAX_DEPTH {
            self.warn(id, WarningKind::Cycle);
            return Expr::empty();
        }
        let block_id = Some(key.clone());
        if block.shadow {
            let kind = match block.fields.values().next() {
                Some(text) => {
                    let lk = if block.opcode == "colour_picker" {
                        LiteralKind::Colour
                    } else {
                        LiteralKind::Number
                    };
                    literal_kind(&lk, text)
                }
                None => ExprKind::Empty,
            };
            return Expr {
                block_id,
                shadow: true,
                kind,
            };
        }
        let entry = self.entry(block);
        let kind = entry.map_or(BlockKind::Unknown, |e| e.kind_for_fields(&block.fields));
        let slots = entry.map(|e| e.slots.clone()).unwrap_or_default();
        let kind = match kind {
            BlockKind::SensorReporter { sensor } => ExprKind::Sensor { sensor },
            BlockKind::BooleanSensor { sensor } => ExprKind::BooleanSensor { sensor },
            BlockKind::Operator {
                operator: OperatorKind::Not,
            } => ExprKind::Not {
                operand: Box::new(self.input_expr(block, slots.operand.as_deref(), depth)),
            },
            BlockKind::Operator { operator } => ExprKind::Binary {
                op: operator,
                lhs: Box::new(self.input_expr(block, slots.lhs.as_deref(), depth)),
                rhs: Box::new(self.input_expr(block, slots.rhs.as_deref(), depth)),
            },
            BlockKind::VariableReporter => {
                let name = slots
                    .variable
                    .as_deref()
                    .and_then(|f| block.fields.get(f))
                    .cloned()
                    .unwrap_or_default();
                ExprKind::Variable { name }
            }
            _ => {
                let slots: Vec<&'r String> = block.inputs.keys().collect();
                let args = slots
                    .into_iter()
                    .map(|s| self.input_expr(block, Some(s), depth))
                    .collect();
                ExprKind::Unknown {
                    opcode: block.opcode.clone(),
                    args,
                }
            }
        };
        Expr {
            block_id,
            shadow: false,
            kind,
        }
    }
}

fn literal_kind(kind: &LiteralKind, text: &str) -> ExprKind {
    match kind {
        LiteralKind::Number => match parse_number(text) {
            Some(value) => ExprKind::Number { value },
            None => ExprKind::Text {
                text: text.to_string(),
            },
        },
        LiteralKind::String => ExprKind::Text {
            text: text.to_string(),
        },
        LiteralKind::Colour => match parse_hex_colour(text) {
            Some(components) => ExprKind::Colour { components },
            None => ExprKind::Text {
                text: text.to_string(),
            },
        },
    }
}
