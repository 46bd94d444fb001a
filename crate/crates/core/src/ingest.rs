//! Loading of Scratch 3 projects (`.sb3` archives or bare `project.json`)
//! into raw block records.
//!
//! Nothing here interprets opcodes: blocks are decoded verbatim, unknown
//! opcodes included, so the AST builder can decide what they mean.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use serde_json::{Map, Value};
use thiserror::Error;

pub type BlockId = String;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid project format: {0}")]
    Format(String),
    #[error("invalid project schema: {0}")]
    Schema(String),
}

/// A whole project as stored in `project.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawProject {
    pub targets: Vec<RawTarget>,
    /// The `meta` object, kept verbatim.
    pub meta: Value,
    /// Non-fatal problems found while decoding (dangling references,
    /// unknown literal type codes).
    pub diagnostics: Vec<String>,
}

impl RawProject {
    pub fn stage(&self) -> &RawTarget {
        self.targets
            .iter()
            .find(|t| t.is_stage)
            .expect("a decoded project always has a stage")
    }

    pub fn block_count(&self) -> usize {
        self.targets.iter().map(|t| t.blocks.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTarget {
    pub name: String,
    pub is_stage: bool,
    pub blocks: BTreeMap<BlockId, RawBlock>,
    /// id -> (name, value)
    pub variables: BTreeMap<String, (String, Value)>,
    /// id -> (name, items)
    pub lists: BTreeMap<String, (String, Vec<Value>)>,
    /// id -> name
    pub broadcasts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBlock {
    pub opcode: String,
    pub next: Option<BlockId>,
    pub parent: Option<BlockId>,
    pub inputs: BTreeMap<String, InputSlot>,
    /// name -> (value, optional id)
    pub fields: BTreeMap<String, (String, Option<String>)>,
    /// Mutation attributes (custom block prototypes and calls), values
    /// stringified.
    pub mutation: BTreeMap<String, String>,
    pub is_shadow: bool,
    pub is_top_level: bool,
}

impl RawBlock {
    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields.get(name).map(|(v, _)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Number,
    PositiveNumber,
    WholeNumber,
    Integer,
    Angle,
    Color,
    Text,
    Unknown,
}

impl LiteralKind {
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            LiteralKind::Number
                | LiteralKind::PositiveNumber
                | LiteralKind::WholeNumber
                | LiteralKind::Integer
                | LiteralKind::Angle
        )
    }
}

/// A normalized input slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSlot {
    BlockRef(BlockId),
    Literal { kind: LiteralKind, value: String },
    VariableRef { name: String, id: String },
    ListRef { name: String, id: String },
    BroadcastRef { name: String, id: String },
    Empty,
}

/// Loads a project from an `.sb3` archive or a bare `project.json`.
pub fn load_project(path: impl AsRef<Path>) -> Result<RawProject, IngestError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_bytes(&bytes)
}

/// Same as [`load_project`] over in-memory content.
pub fn load_bytes(bytes: &[u8]) -> Result<RawProject, IngestError> {
    if bytes.starts_with(b"PK") {
        let text = read_archive_member(bytes)?;
        parse_project_json(&text)
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| IngestError::Format("not a zip archive and not UTF-8 text".into()))?;
        parse_project_json(text)
    }
}

fn read_archive_member(bytes: &[u8]) -> Result<String, IngestError> {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| IngestError::Format(format!("unreadable zip archive: {e}")))?;
    let mut entry = archive
        .by_name("project.json")
        .map_err(|_| IngestError::Format("archive has no project.json at its root".into()))?;
    let mut text = String::new();
    entry
        .read_to_string(&mut text)
        .map_err(|e| IngestError::Format(format!("cannot read project.json: {e}")))?;
    Ok(text)
}

pub fn parse_project_json(text: &str) -> Result<RawProject, IngestError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| IngestError::Format(format!("project.json is not valid JSON: {e}")))?;
    decode_project(&value)
}

pub fn decode_project(value: &Value) -> Result<RawProject, IngestError> {
    let root = value
        .as_object()
        .ok_or_else(|| IngestError::Format("top-level value is not an object".into()))?;
    let Some(targets) = root.get("targets").and_then(Value::as_array) else {
        if root.contains_key("objName") {
            return Err(IngestError::Format(
                "Scratch 2 projects are not supported".into(),
            ));
        }
        return Err(IngestError::Format("missing `targets` array".into()));
    };

    let mut diagnostics = Vec::new();
    let mut decoded = Vec::with_capacity(targets.len());
    for (index, target) in targets.iter().enumerate() {
        decoded.push(decode_target(index, target, &mut diagnostics)?);
    }

    let stages = decoded.iter().filter(|t| t.is_stage).count();
    if stages != 1 {
        return Err(IngestError::Schema(format!(
            "expected exactly one stage target, found {stages}"
        )));
    }
    let mut names = std::collections::BTreeSet::new();
    for t in &decoded {
        if !names.insert(t.name.as_str()) {
            return Err(IngestError::Schema(format!(
                "duplicate target name `{}`",
                t.name
            )));
        }
    }

    Ok(RawProject {
        targets: decoded,
        meta: root.get("meta").cloned().unwrap_or(Value::Null),
        diagnostics,
    })
}

fn decode_target(
    index: usize,
    value: &Value,
    diagnostics: &mut Vec<String>,
) -> Result<RawTarget, IngestError> {
    let obj = value
        .as_object()
        .ok_or_else(|| IngestError::Schema(format!("target #{index} is not an object")))?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| IngestError::Schema(format!("target #{index} has no name")))?
        .to_string();
    let is_stage = obj.get("isStage").and_then(Value::as_bool).unwrap_or(false);

    let mut variables = BTreeMap::new();
    for (id, v) in object_entries(obj, "variables") {
        let name = v.get(0).map(text_of).unwrap_or_default();
        let value = v.get(1).cloned().unwrap_or(Value::Null);
        variables.insert(id.clone(), (name, value));
    }
    let mut lists = BTreeMap::new();
    for (id, v) in object_entries(obj, "lists") {
        let name = v.get(0).map(text_of).unwrap_or_default();
        let items = v
            .get(1)
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default();
        lists.insert(id.clone(), (name, items));
    }
    let broadcasts = object_entries(obj, "broadcasts")
        .map(|(id, v)| (id.clone(), text_of(v)))
        .collect();

    let mut blocks = BTreeMap::new();
    for (id, raw) in object_entries(obj, "blocks") {
        let block = decode_block(&name, id, raw, diagnostics)?;
        blocks.insert(id.clone(), block);
    }
    drop_dangling_links(&name, &mut blocks, diagnostics);

    Ok(RawTarget {
        name,
        is_stage,
        blocks,
        variables,
        lists,
        broadcasts,
    })
}

fn object_entries<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
) -> impl Iterator<Item = (&'a String, &'a Value)> {
    obj.get(key)
        .and_then(Value::as_object)
        .into_iter()
        .flatten()
}

// Invariant: every next/parent link resolves inside the same target.
fn drop_dangling_links(
    target: &str,
    blocks: &mut BTreeMap<BlockId, RawBlock>,
    diagnostics: &mut Vec<String>,
) {
    let ids: std::collections::BTreeSet<BlockId> = blocks.keys().cloned().collect();
    for (id, block) in blocks.iter_mut() {
        if let Some(next) = &block.next {
            if !ids.contains(next) {
                diagnostics.push(format!(
                    "{target}: block {id} points to missing next block {next}"
                ));
                block.next = None;
            }
        }
        if let Some(parent) = &block.parent {
            if !ids.contains(parent) {
                diagnostics.push(format!(
                    "{target}: block {id} points to missing parent block {parent}"
                ));
                block.parent = None;
            }
        }
        if block.is_top_level && block.parent.is_some() {
            diagnostics.push(format!(
                "{target}: top-level block {id} has a parent; parent link ignored"
            ));
            block.parent = None;
        }
    }
}

fn decode_block(
    target: &str,
    id: &str,
    raw: &Value,
    diagnostics: &mut Vec<String>,
) -> Result<RawBlock, IngestError> {
    // Top-level reporters dropped on the canvas use the compact primitive
    // encoding `[12, name, id, x, y]`.
    if let Some(arr) = raw.as_array() {
        return decode_top_level_primitive(target, id, arr);
    }
    let obj = raw
        .as_object()
        .ok_or_else(|| IngestError::Schema(format!("{target}: block {id} is not an object")))?;
    let opcode = obj
        .get("opcode")
        .and_then(Value::as_str)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| IngestError::Schema(format!("{target}: block {id} has no opcode")))?
        .to_string();

    let mut inputs = BTreeMap::new();
    for (name, slot) in object_entries(obj, "inputs") {
        let decoded = decode_input_slot(slot).map_err(|e| match e {
            IngestError::Schema(msg) => {
                IngestError::Schema(format!("{target}: block {id} input {name}: {msg}"))
            }
            other => other,
        })?;
        if let InputSlot::Literal {
            kind: LiteralKind::Unknown,
            ..
        } = decoded
        {
            diagnostics.push(format!(
                "{target}: block {id} input {name} has an unknown literal type code"
            ));
        }
        inputs.insert(name.clone(), decoded);
    }

    let mut fields = BTreeMap::new();
    for (name, field) in object_entries(obj, "fields") {
        let (value, field_id) = match field {
            Value::Array(parts) => (
                parts.first().map(text_of).unwrap_or_default(),
                parts.get(1).and_then(Value::as_str).map(str::to_string),
            ),
            other => (text_of(other), None),
        };
        fields.insert(name.clone(), (value, field_id));
    }

    let mutation = object_entries(obj, "mutation")
        .filter(|(_, v)| !v.is_array() && !v.is_object())
        .map(|(k, v)| (k.clone(), text_of(v)))
        .collect();

    Ok(RawBlock {
        opcode,
        next: obj.get("next").and_then(Value::as_str).map(str::to_string),
        parent: obj
            .get("parent")
            .and_then(Value::as_str)
            .map(str::to_string),
        inputs,
        fields,
        mutation,
        is_shadow: obj.get("shadow").and_then(Value::as_bool).unwrap_or(false),
        is_top_level: obj
            .get("topLevel")
            .and_then(Value::as_bool)
            .unwrap_or(false),
    })
}

fn decode_top_level_primitive(
    target: &str,
    id: &str,
    arr: &[Value],
) -> Result<RawBlock, IngestError> {
    let (opcode, field) = match arr.first().and_then(Value::as_i64) {
        Some(12) => ("data_variable", "VARIABLE"),
        Some(13) => ("data_listcontents", "LIST"),
        _ => {
            return Err(IngestError::Schema(format!(
                "{target}: block {id} is an unsupported compact primitive"
            )))
        }
    };
    let name = arr.get(1).map(text_of).unwrap_or_default();
    let var_id = arr.get(2).and_then(Value::as_str).map(str::to_string);
    Ok(RawBlock {
        opcode: opcode.to_string(),
        next: None,
        parent: None,
        inputs: BTreeMap::new(),
        fields: BTreeMap::from([(field.to_string(), (name, var_id))]),
        mutation: BTreeMap::new(),
        is_shadow: false,
        is_top_level: true,
    })
}

/// Decodes one entry of a block's `inputs` object.
///
/// The first array element is the shadow state (1, 2 or 3); the second is
/// what the slot currently holds: a block id, a compact primitive, or null.
/// Unknown primitive type codes decode to a literal of kind
/// [`LiteralKind::Unknown`].
pub fn decode_input_slot(raw: &Value) -> Result<InputSlot, IngestError> {
    let arr = raw
        .as_array()
        .ok_or_else(|| IngestError::Schema("input slot is not an array".into()))?;
    match arr.first().and_then(Value::as_i64) {
        Some(1..=3) => {}
        _ => {
            return Err(IngestError::Schema(
                "input slot does not start with a shadow state".into(),
            ))
        }
    }
    Ok(match arr.get(1) {
        None | Some(Value::Null) => InputSlot::Empty,
        Some(Value::String(id)) => InputSlot::BlockRef(id.clone()),
        Some(Value::Array(prim)) => decode_primitive(prim),
        Some(_) => return Err(IngestError::Schema("malformed input slot value".into())),
    })
}

fn decode_primitive(prim: &[Value]) -> InputSlot {
    let code = prim.first().and_then(Value::as_i64);
    let value = prim.get(1).map(text_of).unwrap_or_default();
    let id = prim.get(2).map(text_of).unwrap_or_default();
    let literal = |kind| InputSlot::Literal {
        kind,
        value: value.clone(),
    };
    match code {
        Some(4) => literal(LiteralKind::Number),
        Some(5) => literal(LiteralKind::PositiveNumber),
        Some(6) => literal(LiteralKind::WholeNumber),
        Some(7) => literal(LiteralKind::Integer),
        Some(8) => literal(LiteralKind::Angle),
        Some(9) => literal(LiteralKind::Color),
        Some(10) => literal(LiteralKind::Text),
        Some(11) => InputSlot::BroadcastRef { name: value, id },
        Some(12) => InputSlot::VariableRef { name: value, id },
        Some(13) => InputSlot::ListRef { name: value, id },
        _ => literal(LiteralKind::Unknown),
    }
}

fn text_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
