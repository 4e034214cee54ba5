//! Project container loading and raw block-graph decoding.
//!
//! A project is either a bare `project.json` or a zip archive holding one.
//! The JSON schema follows sb3 conventions:
//!
//! ```json
//! {"format": "botlint-1",
//!  "targets": [{"name": "mBot", "isStage": false, "device": "mcore",
//!               "blocks": {"b1": {"opcode": "...", "next": null, "parent": null,
//!                                 "topLevel": true, "shadow": false,
//!                                 "inputs": {"POWER": [1, [4, "50"]]},
//!                                 "fields": {"POSITION": "all"}}}}]}
//! ```
//!
//! The `format` key is optional. Inputs use sb3 wrappers: `[1|2|3, inner,
//! shadow?]` around either a block id or a primitive `[code, text]`
//! (4–8 number, 9 colour, 10 string, 11 broadcast, 12 variable, 13 list).
//! A bare string is a block id and a bare JSON number is a number literal.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub const FORMAT_TAG: &str = "botlint-1";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: file not found", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: archive contains no project.json", .0.display())]
    NoProjectEntry(PathBuf),
    #[error("{}: unreadable archive: {message}", path.display())]
    Archive { path: PathBuf, message: String },
    #[error("{}: malformed JSON at byte {offset}: {message}", path.display())]
    MalformedJson {
        path: PathBuf,
        offset: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("{}: project has no targets", .0.display())]
    EmptyProject(PathBuf),
    #[error("{}: duplicate target name `{name}`", path.display())]
    DuplicateTarget { path: PathBuf, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiteralKind {
    Number,
    String,
    Colour,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Literal {
    pub kind: LiteralKind,
    pub text: String,
}

impl Literal {
    pub fn number(text: impl Into<String>) -> Literal {
        Literal {
            kind: LiteralKind::Number,
            text: text.into(),
        }
    }
}

/// A normalized input slot value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RawInput {
    Literal(Literal),
    Block(String),
    Variable(String),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawBlock {
    pub opcode: String,
    pub next: Option<String>,
    pub parent: Option<String>,
    pub top_level: bool,
    pub shadow: bool,
    pub inputs: IndexMap<String, RawInput>,
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawTarget {
    pub name: String,
    pub is_stage: bool,
    pub device: Option<String>,
    pub blocks: IndexMap<String, RawBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarningKind {
    /// A `next`, `parent` or input reference names a missing block; the link was dropped.
    DanglingReference { slot: String, reference: String },
    /// An input value had an unrecognized shape and was treated as empty.
    UnknownInputEncoding { slot: String },
    /// A block entry was not an object and was ignored.
    MalformedBlock,
    /// A top-level block also named a parent; the parent link was dropped.
    TopLevelWithParent,
    /// A `next` chain revisits a block.
    Cycle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestWarning {
    pub target: String,
    pub block_id: String,
    #[serde(flatten)]
    pub kind: WarningKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawProject {
    pub source_path: PathBuf,
    pub targets: Vec<RawTarget>,
    pub warnings: Vec<IngestWarning>,
}

/// Reads a `.json` project or a zip archive containing `project.json`.
pub fn load_container(path: &Path) -> Result<RawProject, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IngestError::NotFound(path.to_path_buf())
        } else {
            IngestError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let json = if is_archive(path, &bytes) {
        extract_project_json(path, &bytes)?
    } else {
        bytes
    };
    parse_project_bytes(&json, path)
}

fn is_archive(path: &Path, bytes: &[u8]) -> bool {
    let by_extension = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "zip" | "sb3" | "mblock"));
    by_extension || bytes.starts_with(b"PK\x03\x04") || bytes.starts_with(b"PK\x05\x06")
}

fn extract_project_json(path: &Path, bytes: &[u8]) -> Result<Vec<u8>, IngestError> {
    let archive_err = |e: zip::result::ZipError| IngestError::Archive {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut archive = zip::ZipArchive::new(std::io::Cursor::new(bytes)).map_err(archive_err)?;
    // Shallowest `project.json` wins; archive order breaks ties.
    let chosen = (0..archive.len())
        .filter_map(|i| Some((i, archive.name_for_index(i)?.ok()?.into_owned())))
        .filter(|(_, name)| !name.ends_with('/'))
        .filter(|(_, name)| name.rsplit('/').next() == Some("project.json"))
        .map(|(i, name)| (name.trim_start_matches('/').matches('/').count(), i, name))
        .min_by_key(|(depth, i, _)| (*depth, *i))
        .map(|(_, _, name)| name);
    let Some(name) = chosen else {
        return Err(IngestError::NoProjectEntry(path.to_path_buf()));
    };
    let mut entry = archive.by_name(&name).map_err(archive_err)?;
    let mut out = Vec::new();
    entry.read_to_end(&mut out).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(out)
}

pub fn parse_project_bytes(bytes: &[u8], source_path: &Path) -> Result<RawProject, IngestError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| IngestError::MalformedJson {
        path: source_path.to_path_buf(),
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    parse_project_value(&value, source_path)
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split_inclusive(|&b| b == b'\n')
        .take(line - 1)
        .map(<[u8]>::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

/// Builds a [`RawProject`] from an already decoded JSON document.
pub fn parse_project_value(value: &Value, source_path: &Path) -> Result<RawProject, IngestError> {
    let schema = |message: String| IngestError::Schema {
        path: source_path.to_path_buf(),
        message,
    };
    let obj = value
        .as_object()
        .ok_or_else(|| schema("project root must be an object".into()))?;
    if let Some(format) = obj.get("format") {
        if format.as_str() != Some(FORMAT_TAG) {
            return Err(schema(format!("unsupported format tag {format}")));
        }
    }
    let targets_json = match obj.get("targets") {
        Some(Value::Array(items)) => items,
        Some(_) => return Err(schema("`targets` must be an array".into())),
        None => return Err(IngestError::EmptyProject(source_path.to_path_buf())),
    };
    if targets_json.is_empty() {
        return Err(IngestError::EmptyProject(source_path.to_path_buf()));
    }

    let mut warnings = Vec::new();
    let mut targets = Vec::with_capacity(targets_json.len());
    let mut names = HashSet::new();
    for (i, t) in targets_json.iter().enumerate() {
        let t = t
            .as_object()
            .ok_or_else(|| schema(format!("target {i} is not an object")))?;
        let name = t
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| schema(format!("target {i} has no name")))?
            .to_string();
        if !names.insert(name.clone()) {
            return Err(IngestError::DuplicateTarget {
                path: source_path.to_path_buf(),
                name,
            });
        }
        let is_stage = t.get("isStage").and_then(Value::as_bool).unwrap_or(false);
        let device = t.get("device").and_then(Value::as_str).map(str::to_string);
        let mut blocks = IndexMap::new();
        if let Some(Value::Object(map)) = t.get("blocks") {
            for (id, raw) in map {
                match parse_block(&name, id, raw, &mut warnings) {
                    Some(block) => {
                        blocks.insert(id.clone(), block);
                    }
                    None => warnings.push(IngestWarning {
                        target: name.clone(),
                        block_id: id.clone(),
                        kind: WarningKind::MalformedBlock,
                    }),
                }
            }
        }
        let target = RawTarget {
            name,
            is_stage,
            device,
            blocks,
        };
        let (target, mut target_warnings) = decode_blocks(target);
        warnings.append(&mut target_warnings);
        targets.push(target);
    }
    Ok(RawProject {
        source_path: source_path.to_path_buf(),
        targets,
        warnings,
    })
}

fn parse_block(
    target: &str,
    id: &str,
    raw: &Value,
    warnings: &mut Vec<IngestWarning>,
) -> Option<RawBlock> {
    let obj = raw.as_object()?;
    let opcode = obj.get("opcode")?.as_str()?.to_string();
    let id_field = |key: &str| obj.get(key).and_then(Value::as_str).map(str::to_string);
    let mut inputs = IndexMap::new();
    if let Some(Value::Object(map)) = obj.get("inputs") {
        for (slot, value) in map {
            let input = parse_input(value).unwrap_or_else(|| {
                warnings.push(IngestWarning {
                    target: target.to_string(),
                    block_id: id.to_string(),
                    kind: WarningKind::UnknownInputEncoding { slot: slot.clone() },
                });
                RawInput::Empty
            });
            inputs.insert(slot.clone(), input);
        }
    }
    let mut fields = BTreeMap::new();
    if let Some(Value::Object(map)) = obj.get("fields") {
        for (name, value) in map {
            // sb3 stores fields as `[value, id]`; the botlint schema as plain text.
            let text = match value {
                Value::Array(items) => items.first().map(scalar_text),
                other => Some(scalar_text(other)),
            };
            if let Some(text) = text {
                fields.insert(name.clone(), text);
            }
        }
    }
    Some(RawBlock {
        opcode,
        next: id_field("next"),
        parent: id_field("parent"),
        top_level: obj.get("topLevel").and_then(Value::as_bool).unwrap_or(false),
        shadow: obj.get("shadow").and_then(Value::as_bool).unwrap_or(false),
        inputs,
        fields,
    })
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn parse_input(value: &Value) -> Option<RawInput> {
    match value {
        Value::Null => Some(RawInput::Empty),
        Value::String(id) => Some(RawInput::Block(id.clone())),
        Value::Number(n) => Some(RawInput::Literal(Literal::number(n.to_string()))),
        Value::Array(items) => {
            let code = items.first()?.as_u64()?;
            match code {
                1..=3 => {
                    let inner = items.get(1).map(parse_input).unwrap_or(Some(RawInput::Empty))?;
                    if inner == RawInput::Empty {
                        items.get(2).map(parse_input).unwrap_or(Some(RawInput::Empty))
                    } else {
                        Some(inner)
                    }
                }
                _ => parse_primitive(code, items),
            }
        }
        _ => None,
    }
}

fn parse_primitive(code: u64, items: &[Value]) -> Option<RawInput> {
    let text = items.get(1).map(scalar_text)?;
    let literal = |kind| Some(RawInput::Literal(Literal { kind, text: text.clone() }));
    match code {
        4..=8 => literal(LiteralKind::Number),
        9 => literal(LiteralKind::Colour),
        10 | 11 => literal(LiteralKind::String),
        12 | 13 => Some(RawInput::Variable(text.clone())),
        _ => None,
    }
}

/// Checks every block reference of a target. Dangling links are dropped
/// and reported; the target stays usable.
pub fn decode_blocks(mut target: RawTarget) -> (RawTarget, Vec<IngestWarning>) {
    let ids: HashSet<String> = target.blocks.keys().cloned().collect();
    let mut warnings = Vec::new();
    for (id, block) in target.blocks.iter_mut() {
        let mut warn = |kind| {
            warnings.push(IngestWarning {
                target: target.name.clone(),
                block_id: id.clone(),
                kind,
            })
        };
        for (slot, link) in [("next", &mut block.next), ("parent", &mut block.parent)] {
            if let Some(reference) = link.as_ref().filter(|r| !ids.contains(*r)) {
                warn(WarningKind::DanglingReference {
                    slot: slot.to_string(),
                    reference: reference.clone(),
                });
                *link = None;
            }
        }
        if block.top_level && block.parent.is_some() {
            warn(WarningKind::TopLevelWithParent);
            block.parent = None;
        }
        for (slot, input) in block.inputs.iter_mut() {
            if let RawInput::Block(reference) = input {
                if !ids.contains(reference.as_str()) {
                    warn(WarningKind::DanglingReference {
                        slot: slot.clone(),
                        reference: reference.clone(),
                    });
                    *input = RawInput::Empty;
                }
            }
        }
    }
    (target, warnings)
}
