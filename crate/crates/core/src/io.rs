//! Model documents and result documents.
//!
//! A model document is a JSON object:
//!
//! ```json
//! {
//!   "version": 1,
//!   "players": ["1", "2"],
//!   "propositions": ["x", "y"],
//!   "states": [{ "name": "q0", "labels": [] }, { "name": "q1", "labels": ["x"] }],
//!   "moves": { "1": { "q0": ["L", "C"], "q1": ["L"] }, "2": { "q0": ["L"], "q1": ["L"] } },
//!   "transitions": [{ "from": "q0", "vector": ["L", "L"], "to": "q0" }]
//! }
//! ```
//!
//! `vector` lists one move per player in `players` order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::cgs::{self, Diagnostics, GameStructure, StateSpec, StructureSpec, TransitionSpec};
use crate::engine::CheckResult;
use crate::set::SatSet;

pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u64,
    #[serde(flatten)]
    pub structure: StructureSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },
    #[error("invalid model: {0}")]
    Invalid(#[from] Diagnostics),
}

fn schema(path: &str, message: impl Into<String>) -> IoError {
    IoError::SchemaError {
        path: if path.is_empty() {
            "/".into()
        } else {
            path.into()
        },
        message: message.into(),
    }
}

fn pointer(path: &str, key: &str) -> String {
    let escaped = key.replace('~', "~0").replace('/', "~1");
    format!("{path}/{escaped}")
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, IoError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn field<'v>(obj: &'v Map<String, Value>, key: &str, path: &str) -> Result<&'v Value, IoError> {
    obj.get(key)
        .ok_or_else(|| schema(&pointer(path, key), "missing required field"))
}

fn as_string(v: &Value, path: &str) -> Result<String, IoError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| schema(path, "expected a string"))
}

fn as_strings(v: &Value, path: &str) -> Result<Vec<String>, IoError> {
    let items = v
        .as_array()
        .ok_or_else(|| schema(path, "expected an array"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| as_string(item, &format!("{path}/{i}")))
        .collect()
}

fn parse_json(bytes: &[u8]) -> Result<Value, IoError> {
    serde_json::from_slice(bytes).map_err(|e| IoError::ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Decodes an already-parsed JSON value, reporting schema violations with
/// JSON-pointer paths.
pub fn decode_model(v: &Value) -> Result<ModelDocument, IoError> {
    let root = as_object(v, "")?;
    let version = field(root, "version", "")?
        .as_u64()
        .ok_or_else(|| schema("/version", "expected an unsigned integer"))?;
    if version != MODEL_VERSION {
        return Err(schema(
            "/version",
            format!("unsupported version {version}, expected {MODEL_VERSION}"),
        ));
    }
    let players = as_strings(field(root, "players", "")?, "/players")?;
    let propositions = as_strings(field(root, "propositions", "")?, "/propositions")?;

    let states_v = field(root, "states", "")?
        .as_array()
        .ok_or_else(|| schema("/states", "expected an array"))?;
    let mut states = Vec::with_capacity(states_v.len());
    for (i, st) in states_v.iter().enumerate() {
        let path = format!("/states/{i}");
        let obj = as_object(st, &path)?;
        let name = as_string(field(obj, "name", &path)?, &pointer(&path, "name"))?;
        let labels = match obj.get("labels") {
            Some(v) => as_strings(v, &pointer(&path, "labels"))?,
            None => Vec::new(),
        };
        states.push(StateSpec { name, labels });
    }

    let moves_v = as_object(field(root, "moves", "")?, "/moves")?;
    let mut moves = BTreeMap::new();
    for (player, per_state) in moves_v {
        let ppath = pointer("/moves", player);
        let per_state = as_object(per_state, &ppath)?;
        let mut table = BTreeMap::new();
        for (state, listed) in per_state {
            table.insert(state.clone(), as_strings(listed, &pointer(&ppath, state))?);
        }
        moves.insert(player.clone(), table);
    }

    let trans_v = field(root, "transitions", "")?
        .as_array()
        .ok_or_else(|| schema("/transitions", "expected an array"))?;
    let mut transitions = Vec::with_capacity(trans_v.len());
    for (i, t) in trans_v.iter().enumerate() {
        let path = format!("/transitions/{i}");
        let obj = as_object(t, &path)?;
        transitions.push(TransitionSpec {
            from: as_string(field(obj, "from", &path)?, &pointer(&path, "from"))?,
            vector: as_strings(field(obj, "vector", &path)?, &pointer(&path, "vector"))?,
            to: as_string(field(obj, "to", &path)?, &pointer(&path, "to"))?,
        });
    }

    Ok(ModelDocument {
        version,
        structure: StructureSpec {
            players,
            propositions,
            states,
            moves,
            transitions,
        },
    })
}

pub fn parse_model(bytes: &[u8]) -> Result<ModelDocument, IoError> {
    decode_model(&parse_json(bytes)?)
}

/// Parses, decodes and validates a model document.
pub fn load_model(bytes: &[u8]) -> Result<GameStructure, IoError> {
    Ok(cgs::validate(&parse_model(bytes)?.structure)?)
}

pub fn model_document(s: &GameStructure) -> ModelDocument {
    ModelDocument {
        version: MODEL_VERSION,
        structure: s.to_spec(),
    }
}

pub fn dump_model(s: &GameStructure) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&model_document(s)).expect("model serializes");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultStats {
    pub iterations: usize,
    pub milliseconds: f64,
    pub pre_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub formula: String,
    pub satisfying: Vec<String>,
}

/// Serialized check result. Fields are declared in key order so output is
/// stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub backend: String,
    pub formula: String,
    pub satisfying: Vec<String>,
    pub stats: ResultStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceDocument>>,
}

fn names_of(set: &SatSet, names: &[String]) -> Vec<String> {
    set.iter().map(|q| names[q.index()].clone()).collect()
}

pub fn result_document(r: &CheckResult, names: &[String]) -> ResultDocument {
    ResultDocument {
        backend: r.backend.name().to_string(),
        formula: crate::parser::format(&r.formula),
        satisfying: names_of(&r.satisfying, names),
        stats: ResultStats {
            iterations: r.stats.fixpoint_iterations,
            milliseconds: r.stats.elapsed.as_secs_f64() * 1000.0,
            pre_calls: r.stats.pre_calls,
        },
        trace: r.trace.as_ref().map(|entries| {
            entries
                .iter()
                .map(|e| TraceDocument {
                    formula: e.formula.clone(),
                    satisfying: names_of(&e.satisfying, names),
                })
                .collect()
        }),
    }
}

/// Pretty JSON with a trailing newline; states in ascending id order.
pub fn dump_result(r: &CheckResult, names: &[String]) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&result_document(r, names)).expect("result serializes");
    out.push(b'\n');
    out
}
