//! Compact text notation for block programs.
//!
//! ```text
//! mcore{S1:[on_flag; move_timed(fwd,50,1); led_on(255,0,0)]}
//! codey "Rocky" {A:[on_btn; stop_all()] B:[on_start; forever[move_timed(fwd,50,1)]]}
//! ```
//!
//! Each actor is `device{...}` (`mcore`, `codey`, `sprite`, `stage`, or any
//! other id for an unsupported robot) with an optional quoted name. Scripts
//! are bracketed sequences with an optional `label:`; a sequence that does
//! not begin with a hat becomes a loose fragment. Expressions are numbers,
//! `"strings"`, `#rrggbb` colours, `$variables`, bare words, or calls like
//! `gt(dist(), 10)`.
//!
//! The notation compiles to the regular project JSON, so everything built
//! from it goes through the same ingest path as files on disk.

use std::collections::HashMap;
use std::path::Path;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::ast::{build_ast, Project};
use crate::ingest::{parse_project_value, IngestError, RawProject};
use crate::registry::Registry;

#[derive(Debug, Error)]
pub enum DslError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: &'static str,
        got: usize,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Compiles notation into project JSON.
pub fn to_json(src: &str) -> Result<Value, DslError> {
    let actors = Parser::new(src).parse_project()?;
    let mut used_names: HashMap<String, usize> = HashMap::new();
    let mut targets = Vec::new();
    for actor in actors {
        let base = actor.name.clone().unwrap_or_else(|| default_name(&actor.device));
        let n = used_names.entry(base.clone()).or_insert(0);
        *n += 1;
        let name = if *n == 1 { base } else { format!("{base}{n}") };
        targets.push(Codegen::new(&actor.device).target(&name, &actor)?);
    }
    Ok(json!({"format": crate::ingest::FORMAT_TAG, "targets": targets}))
}

pub fn raw_project(src: &str) -> Result<RawProject, DslError> {
    Ok(parse_project_value(&to_json(src)?, Path::new("<dsl>"))?)
}

/// Compiles and builds the syntax tree with the built-in registry.
pub fn project(src: &str) -> Result<Project, DslError> {
    Ok(build_ast(&raw_project(src)?, Registry::builtin()))
}

fn default_name(device: &str) -> String {
    match device {
        "mcore" => "mBot".into(),
        "codey" => "Codey".into(),
        "sprite" => "Sprite".into(),
        "stage" => "Stage".into(),
        other => other.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug)]
struct DActor {
    device: String,
    name: Option<String>,
    sequences: Vec<Vec<DStmt>>,
}

#[derive(Debug)]
struct DStmt {
    name: String,
    args: Vec<DExpr>,
    body: Option<Vec<DStmt>>,
    else_body: Option<Vec<DStmt>>,
}

#[derive(Debug, Clone)]
enum DExpr {
    Num(String),
    Str(String),
    Colour(String),
    Var(String),
    Word(String),
    Call(String, Vec<DExpr>),
}

struct Parser<'s> {
    src: &'s str,
    pos: usize,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected identifier");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn string(&mut self) -> Result<String, DslError> {
        self.expect('"')?;
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if c == '"' {
                let s = self.src[start..self.pos].to_string();
                self.pos += 1;
                return Ok(s);
            }
            self.pos += c.len_utf8();
        }
        self.err("unterminated string")
    }

    fn parse_project(&mut self) -> Result<Vec<DActor>, DslError> {
        let mut actors = Vec::new();
        while self.peek().is_some() {
            let device = self.ident()?;
            let name = if self.peek() == Some('"') {
                Some(self.string()?)
            } else {
                None
            };
            self.expect('{')?;
            let mut sequences = Vec::new();
            while !self.eat('}') {
                if self.peek().is_none() {
                    return self.err("unterminated actor");
                }
                if self.peek() != Some('[') {
                    self.ident()?;
                    self.expect(':')?;
                }
                sequences.push(self.block()?);
            }
            actors.push(DActor {
                device,
                name,
                sequences,
            });
        }
        Ok(actors)
    }

    /// `[stmt; stmt; ...]`
    fn block(&mut self) -> Result<Vec<DStmt>, DslError> {
        self.expect('[')?;
        let mut out = Vec::new();
        loop {
            if self.eat(']') {
                return Ok(out);
            }
            out.push(self.stmt()?);
            if !self.eat(';') && self.peek() != Some(']') {
                return self.err("expected `;` or `]`");
            }
        }
    }

    fn stmt(&mut self) -> Result<DStmt, DslError> {
        let name = self.ident()?;
        let args = if self.peek() == Some('(') {
            self.args()?
        } else {
            Vec::new()
        };
        let body = if self.peek() == Some('[') {
            Some(self.block()?)
        } else {
            None
        };
        let else_body = if body.is_some() && self.src[self.pos..].trim_start().starts_with("else") {
            self.ident()?;
            Some(self.block()?)
        } else {
            None
        };
        Ok(DStmt {
            name,
            args,
            body,
            else_body,
        })
    }

    fn args(&mut self) -> Result<Vec<DExpr>, DslError> {
        self.expect('(')?;
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn expr(&mut self) -> Result<DExpr, DslError> {
        match self.peek() {
            Some('"') => Ok(DExpr::Str(self.string()?)),
            Some('$') => {
                self.pos += 1;
                Ok(DExpr::Var(self.ident()?))
            }
            Some('#') => {
                let start = self.pos;
                self.pos += 1;
                while self.peek_raw().is_some_and(|c| c.is_ascii_hexdigit()) {
                    self.pos += 1;
                }
                Ok(DExpr::Colour(self.src[start..self.pos].to_string()))
            }
            Some(c) if c == '-' || c == '.' || c.is_ascii_digit() => {
                let start = self.pos;
                self.pos += 1;
                while self
                    .peek_raw()
                    .is_some_and(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
                {
                    self.pos += 1;
                }
                Ok(DExpr::Num(self.src[start..self.pos].to_string()))
            }
            Some(_) => {
                let name = self.ident()?;
                if self.peek() == Some('(') {
                    Ok(DExpr::Call(name, self.args()?))
                } else {
                    Ok(DExpr::Word(name))
                }
            }
            None => self.err("unexpected end of input"),
        }
    }
}

// ---------------------------------------------------------------------------
// Code generation

struct Codegen {
    device: String,
    prefix: String,
    counter: usize,
    blocks: Map<String, Value>,
}

fn arity(name: &str, args: &[DExpr], allowed: &[usize], expected: &'static str) -> Result<(), DslError> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(DslError::Arity {
            name: name.to_string(),
            expected,
            got: args.len(),
        })
    }
}

fn word(expr: &DExpr) -> String {
    match expr {
        DExpr::Num(s) | DExpr::Str(s) | DExpr::Word(s) | DExpr::Colour(s) | DExpr::Var(s) => s.clone(),
        DExpr::Call(name, _) => name.clone(),
    }
}

fn direction_suffix(dir: &DExpr) -> Result<&'static str, DslError> {
    match word(dir).as_str() {
        "fwd" | "forward" => Ok("fwd"),
        "back" | "backward" => Ok("back"),
        "left" => Ok("left"),
        "right" => Ok("right"),
        other => Err(DslError::Unknown {
            what: "direction",
            name: other.to_string(),
        }),
    }
}

const HATS: &[&str] = &["on_flag", "on_start", "on_btn", "on_msg", "on_key", "on_shake"];

impl Codegen {
    fn new(device: &str) -> Self {
        let prefix = match device {
            "codey" => "codey",
            _ => "mcore",
        };
        Codegen {
            device: device.to_string(),
            prefix: prefix.to_string(),
            counter: 0,
            blocks: Map::new(),
        }
    }

    fn target(mut self, name: &str, actor: &DActor) -> Result<Value, DslError> {
        for seq in &actor.sequences {
            if let Some(first) = seq.first() {
                let is_hat = HATS.contains(&first.name.as_str());
                let (head, rest) = if is_hat {
                    let id = self.hat(first)?;
                    (Some(id), &seq[1..])
                } else {
                    (None, &seq[..])
                };
                let chain_head = self.chain(rest, head.as_deref())?;
                let top = head.or(chain_head);
                if let Some(top) = top {
                    let block = self.blocks.get_mut(&top).expect("generated");
                    block["topLevel"] = json!(true);
                    block["parent"] = Value::Null;
                }
            }
        }
        let mut target = json!({
            "name": name,
            "isStage": self.device == "stage",
            "blocks": Value::Object(self.blocks),
        });
        if !matches!(self.device.as_str(), "sprite" | "stage") {
            target["device"] = json!(self.device);
        }
        Ok(target)
    }

    fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("b{}", self.counter)
    }

    fn add(&mut self, opcode: &str, parent: Option<&str>) -> String {
        let id = self.fresh();
        self.blocks.insert(
            id.clone(),
            json!({"opcode": opcode, "next": null, "parent": parent, "topLevel": false,
                   "shadow": false, "inputs": {}, "fields": {}}),
        );
        id
    }

    fn set_input(&mut self, id: &str, slot: &str, value: Value) {
        self.blocks[id]["inputs"][slot] = value;
    }

    fn set_field(&mut self, id: &str, field: &str, value: &str) {
        self.blocks[id]["fields"][field] = json!(value);
    }

    fn hat(&mut self, stmt: &DStmt) -> Result<String, DslError> {
        let p = self.prefix.clone();
        let id = match stmt.name.as_str() {
            "on_flag" => self.add("event_whenflagclicked", None),
            "on_start" => self.add(&format!("{p}.when_launch"), None),
            "on_shake" => self.add("codey.when_shaken", None),
            "on_btn" => {
                let id = self.add(&format!("{p}.when_button_pressed"), None);
                let button = stmt.args.first().map_or("A".to_string(), word);
                self.set_field(&id, "BUTTON", &button);
                id
            }
            "on_msg" => {
                arity(&stmt.name, &stmt.args, &[1], "1")?;
                let id = self.add("event_whenbroadcastreceived", None);
                self.set_field(&id, "BROADCAST_OPTION", &word(&stmt.args[0]));
                id
            }
            "on_key" => {
                arity(&stmt.name, &stmt.args, &[1], "1")?;
                let id = self.add("event_whenkeypressed", None);
                self.set_field(&id, "KEY_OPTION", &word(&stmt.args[0]));
                id
            }
            other => {
                return Err(DslError::Unknown {
                    what: "hat",
                    name: other.to_string(),
                })
            }
        };
        Ok(id)
    }

    /// Emits a `next`-linked chain; returns the id of its first block.
    fn chain(&mut self, stmts: &[DStmt], parent: Option<&str>) -> Result<Option<String>, DslError> {
        let mut first = None;
        let mut prev: Option<String> = parent.map(str::to_string);
        for (i, stmt) in stmts.iter().enumerate() {
            let id = self.stmt(stmt, prev.as_deref())?;
            if let Some(p) = &prev {
                if i > 0 || parent.is_some() {
                    self.blocks[p.as_str()]["next"] = json!(id);
                }
            }
            first.get_or_insert_with(|| id.clone());
            prev = Some(id);
        }
        Ok(first)
    }

    fn substack(&mut self, id: &str, slot: &str, body: &[DStmt]) -> Result<(), DslError> {
        let mut first = None;
        let mut prev: Option<String> = None;
        for stmt in body {
            let parent = prev.clone().unwrap_or_else(|| id.to_string());
            let sid = self.stmt(stmt, Some(&parent))?;
            if let Some(p) = &prev {
                self.blocks[p.as_str()]["next"] = json!(sid);
            }
            first.get_or_insert_with(|| sid.clone());
            prev = Some(sid);
        }
        if let Some(first) = first {
            self.set_input(id, slot, json!([2, first]));
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &DStmt, parent: Option<&str>) -> Result<String, DslError> {
        let p = self.prefix.clone();
        let a = &stmt.args;
        let name = stmt.name.as_str();
        let empty = Vec::new();
        let body = stmt.body.as_ref().unwrap_or(&empty);
        let id = match name {
            "led_on" | "led_on_timed" => {
                let timed = name == "led_on_timed";
                let base = if timed { 4 } else { 3 };
                arity(name, a, &[base, base + 1], "colour (+ position)")?;
                let (pos, rest) = if a.len() == base + 1 {
                    (word(&a[0]), &a[1..])
                } else {
                    ("all".to_string(), &a[..])
                };
                let id = self.add(&format!("{p}.{name}"), parent);
                if p == "mcore" {
                    self.set_field(&id, "POSITION", &pos);
                }
                for (slot, e) in ["R", "G", "B"].iter().zip(rest) {
                    self.input(&id, slot, e)?;
                }
                if timed {
                    self.input(&id, "TIME", &rest[3])?;
                }
                id
            }
            "led_off" => {
                let id = self.add(&format!("{p}.led_off"), parent);
                if p == "mcore" {
                    let pos = a.first().map_or("all".to_string(), word);
                    self.set_field(&id, "POSITION", &pos);
                }
                id
            }
            "light_on" | "light_on_timed" => {
                let opcode = if name == "light_on" {
                    "codey.rocky_light_on"
                } else {
                    "codey.rocky_light_on_timed"
                };
                let id = self.add(opcode, parent);
                if name == "light_on_timed" {
                    arity(name, a, &[2], "2")?;
                    self.input(&id, "COLOUR", &a[0])?;
                    self.input(&id, "TIME", &a[1])?;
                } else if let Some(c) = a.first() {
                    self.input(&id, "COLOUR", c)?;
                }
                id
            }
            "light_off" => self.add("codey.rocky_light_off", parent),
            "matrix_show" | "matrix_show_timed" => {
                let timed = name == "matrix_show_timed";
                arity(name, a, if timed { &[2] } else { &[1] }, if timed { "2" } else { "1" })?;
                let id = self.add(&format!("{p}.{name}"), parent);
                if p == "mcore" {
                    self.set_field(&id, "PORT", "port1");
                }
                self.input(&id, "TEXT", &a[0])?;
                if timed {
                    self.input(&id, "TIME", &a[1])?;
                }
                id
            }
            "matrix_off" => {
                let id = self.add(&format!("{p}.matrix_off"), parent);
                if p == "mcore" {
                    self.set_field(&id, "PORT", "port1");
                }
                id
            }
            "move" => {
                arity(name, a, &[2], "2")?;
                let id = self.add(&format!("{p}.move_{}", direction_suffix(&a[0])?), parent);
                self.input(&id, "POWER", &a[1])?;
                id
            }
            "move_timed" | "turn_timed" => {
                arity(name, a, &[3], "3")?;
                let id = self.add(&format!("{p}.move_timed_{}", direction_suffix(&a[0])?), parent);
                self.input(&id, "POWER", &a[1])?;
                self.input(&id, "TIME", &a[2])?;
                id
            }
            "motor_run" | "motor_run_timed" => {
                let timed = name == "motor_run_timed";
                arity(name, a, if timed { &[3] } else { &[2] }, if timed { "3" } else { "2" })?;
                let id = self.add(&format!("{p}.{name}"), parent);
                self.set_field(&id, "PORT", &word(&a[0]));
                self.input(&id, "POWER", &a[1])?;
                if timed {
                    self.input(&id, "TIME", &a[2])?;
                }
                id
            }
            "motor_stop" => self.add(&format!("{p}.motor_stop"), parent),
            "wait" => {
                arity(name, a, &[1], "1")?;
                let id = self.add("control_wait", parent);
                self.input(&id, "DURATION", &a[0])?;
                id
            }
            "wait_until" => {
                arity(name, a, &[1], "1")?;
                let id = self.add("control_wait_until", parent);
                self.input(&id, "CONDITION", &a[0])?;
                id
            }
            "forever" => {
                let id = self.add("control_forever", parent);
                self.substack(&id, "SUBSTACK", body)?;
                id
            }
            "repeat" => {
                arity(name, a, &[1], "1")?;
                let id = self.add("control_repeat", parent);
                self.input(&id, "TIMES", &a[0])?;
                self.substack(&id, "SUBSTACK", body)?;
                id
            }
            "repeat_until" => {
                arity(name, a, &[1], "1")?;
                let id = self.add("control_repeat_until", parent);
                self.input(&id, "CONDITION", &a[0])?;
                self.substack(&id, "SUBSTACK", body)?;
                id
            }
            "if" => {
                arity(name, a, &[1], "1")?;
                let opcode = if stmt.else_body.is_some() {
                    "control_if_else"
                } else {
                    "control_if"
                };
                let id = self.add(opcode, parent);
                self.input(&id, "CONDITION", &a[0])?;
                self.substack(&id, "SUBSTACK", body)?;
                if let Some(else_body) = &stmt.else_body {
                    self.substack(&id, "SUBSTACK2", else_body)?;
                }
                id
            }
            "stop_all" | "stop_other" | "stop_this" => {
                let id = self.add("control_stop", parent);
                let option = match name {
                    "stop_all" => "all",
                    "stop_other" => "other scripts in sprite",
                    _ => "this script",
                };
                self.set_field(&id, "STOP_OPTION", option);
                id
            }
            "set_var" | "change_var" => {
                arity(name, a, &[2], "2")?;
                let opcode = if name == "set_var" {
                    "data_setvariableto"
                } else {
                    "data_changevariableby"
                };
                let id = self.add(opcode, parent);
                self.set_field(&id, "VARIABLE", &word(&a[0]));
                self.input(&id, "VALUE", &a[1])?;
                id
            }
            "block" => {
                if a.is_empty() {
                    return Err(DslError::Arity {
                        name: name.into(),
                        expected: "at least 1",
                        got: 0,
                    });
                }
                let id = self.add(&word(&a[0]), parent);
                for (i, e) in a[1..].iter().enumerate() {
                    self.input(&id, &format!("ARG{i}"), e)?;
                }
                if stmt.body.is_some() {
                    self.substack(&id, "SUBSTACK", body)?;
                }
                id
            }
            other if HATS.contains(&other) => {
                return Err(DslError::Syntax {
                    offset: 0,
                    message: format!("hat `{other}` must start a script"),
                })
            }
            other => {
                return Err(DslError::Unknown {
                    what: "statement",
                    name: other.to_string(),
                })
            }
        };
        Ok(id)
    }

    fn input(&mut self, id: &str, slot: &str, expr: &DExpr) -> Result<(), DslError> {
        let value = match expr {
            DExpr::Num(n) => json!([1, [4, n]]),
            DExpr::Str(s) | DExpr::Word(s) => json!([1, [10, s]]),
            DExpr::Colour(c) => json!([1, [9, c]]),
            DExpr::Var(v) => json!([3, [12, v, format!("var-{v}")], [10, ""]]),
            DExpr::Call(name, args) => {
                let child = self.reporter(name, args, id)?;
                json!([2, child])
            }
        };
        self.set_input(id, slot, value);
        Ok(())
    }

    fn reporter(&mut self, name: &str, args: &[DExpr], parent: &str) -> Result<String, DslError> {
        let p = self.prefix.clone();
        let sensor = match name {
            "dist" => Some("ultrasonic_distance"),
            "light" => Some("light_sensor"),
            "line" => Some("line_follower"),
            "battery" => Some("battery_level"),
            "colour" => Some("colour_sensor"),
            "loud" => Some("loudness"),
            "pitch" => Some("pitch_angle"),
            "roll" => Some("roll_angle"),
            "pot" => Some("potentiometer"),
            "shake" => Some("shaking_strength"),
            "button" => Some("button_pressed"),
            _ => None,
        };
        if let Some(sensor) = sensor {
            return Ok(self.add(&format!("{p}.{sensor}"), Some(parent)));
        }
        let binary = |n: &str| match n {
            "gt" => Some(("operator_gt", "OPERAND1", "OPERAND2")),
            "lt" => Some(("operator_lt", "OPERAND1", "OPERAND2")),
            "eq" => Some(("operator_equals", "OPERAND1", "OPERAND2")),
            "and" => Some(("operator_and", "OPERAND1", "OPERAND2")),
            "or" => Some(("operator_or", "OPERAND1", "OPERAND2")),
            "add" => Some(("operator_add", "NUM1", "NUM2")),
            "sub" => Some(("operator_subtract", "NUM1", "NUM2")),
            "mul" => Some(("operator_multiply", "NUM1", "NUM2")),
            "div" => Some(("operator_divide", "NUM1", "NUM2")),
            "mod" => Some(("operator_mod", "NUM1", "NUM2")),
            _ => None,
        };
        if let Some((opcode, l, r)) = binary(name) {
            arity(name, args, &[2], "2")?;
            let id = self.add(opcode, Some(parent));
            self.input(&id, l, &args[0])?;
            self.input(&id, r, &args[1])?;
            return Ok(id);
        }
        match name {
            "not" => {
                arity(name, args, &[1], "1")?;
                let id = self.add("operator_not", Some(parent));
                self.input(&id, "OPERAND", &args[0])?;
                Ok(id)
            }
            "ir" => Ok(self.add("mcore.ir_remote_pressed", Some(parent))),
            "key" => {
                arity(name, args, &[1], "1")?;
                let id = self.add("sensing_keypressed", Some(parent));
                self.input(&id, "KEY_OPTION", &args[0])?;
                Ok(id)
            }
            "var" => {
                arity(name, args, &[1], "1")?;
                let id = self.add("data_variable", Some(parent));
                self.set_field(&id, "VARIABLE", &word(&args[0]));
                Ok(id)
            }
            "reporter" => {
                if args.is_empty() {
                    return Err(DslError::Arity {
                        name: name.into(),
                        expected: "at least 1",
                        got: 0,
                    });
                }
                let id = self.add(&word(&args[0]), Some(parent));
                for (i, e) in args[1..].iter().enumerate() {
                    self.input(&id, &format!("ARG{i}"), e)?;
                }
                Ok(id)
            }
            other => Err(DslError::Unknown {
                what: "reporter",
                name: other.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{ExprKind, StmtKind};
    use crate::registry::{Device, Direction, OperatorKind, Sensor};

    #[test]
    fn compiles_fig1() {
        let v = to_json("mcore{S1:[on_flag; move_timed(fwd,50,1); move_timed(fwd,50,1); led_on(255,0,0)]}")
            .unwrap();
        let blocks = v["targets"][0]["blocks"].as_object().unwrap();
        assert_eq!(blocks.len(), 4);
        assert_eq!(blocks["b1"]["opcode"], "event_whenflagclicked");
        assert_eq!(blocks["b1"]["topLevel"], true);
        assert_eq!(blocks["b1"]["next"], "b2");
        assert_eq!(blocks["b2"]["next"], "b3");
        assert_eq!(blocks["b3"]["next"], "b4");
        assert_eq!(blocks["b4"]["parent"], "b3");
        assert_eq!(v["targets"][0]["device"], "mcore");
    }

    #[test]
    fn nested_structure() {
        let p = project("codey{[on_flag; forever[if(gt(dist(), 10))[move(back, 40)] else [wait(0.5)]]]}").unwrap();
        let actor = &p.actors[0];
        assert_eq!(actor.device, Some(Device::Codey));
        let StmtKind::Forever { body } = &actor.scripts[0].body[0].kind else {
            panic!()
        };
        let StmtKind::IfElse {
            condition,
            then_body,
            else_body,
        } = &body[0].kind
        else {
            panic!()
        };
        let ExprKind::Binary { op, lhs, rhs } = &condition.kind else {
            panic!()
        };
        assert_eq!(*op, OperatorKind::Gt);
        assert_eq!(lhs.kind, ExprKind::Sensor { sensor: Sensor::Distance });
        assert_eq!(rhs.kind, ExprKind::Number { value: 10.0 });
        assert!(matches!(
            then_body[0].kind,
            StmtKind::Move {
                direction: Direction::Backward,
                ..
            }
        ));
        assert!(matches!(else_body[0].kind, StmtKind::Wait { .. }));
    }

    #[test]
    fn actor_names_are_unique() {
        let v = to_json("mcore{} mcore{} codey \"Rocky\" {} sprite{}").unwrap();
        let names: Vec<&str> = v["targets"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t["name"].as_str().unwrap())
            .collect();
        assert_eq!(names, ["mBot", "mBot2", "Rocky", "Sprite"]);
        assert!(v["targets"][3].get("device").is_none());
    }

    #[test]
    fn errors() {
        assert!(matches!(to_json("mcore{[on_flag; fly()]}"), Err(DslError::Unknown { .. })));
        assert!(matches!(to_json("mcore{[on_flag; move(fwd)]}"), Err(DslError::Arity { .. })));
        assert!(matches!(to_json("mcore{[on_flag; wait(1)"), Err(DslError::Syntax { .. })));
        assert!(matches!(to_json("mcore{[wait(1); on_flag]}"), Err(DslError::Syntax { .. })));
    }
}
