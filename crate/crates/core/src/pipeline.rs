//! Model + formula in, result document out, with errors classified for
//! front ends.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cgs;
use crate::engine::{CheckError, CheckOptions, Checker};
use crate::io::{self, IoError};
use crate::parser::{self, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorKind {
    ParseError,
    SchemaError,
    ValidationError,
    SyntaxError,
    UnknownProposition,
    UnknownPlayer,
    Internal,
}

impl ErrorKind {
    /// Whether the error comes from the caller's input rather than from us.
    pub fn is_input_error(self) -> bool {
        self != ErrorKind::Internal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind:?}: {message}")]
pub struct PipelineError {
    pub kind: ErrorKind,
    pub message: String,
    /// `line:column` for JSON syntax, a JSON pointer for schema errors,
    /// `offset N` for formula syntax.
    pub location: Option<String>,
}

impl PipelineError {
    pub fn new(kind: ErrorKind, message: impl Into<String>, location: Option<String>) -> Self {
        PipelineError {
            kind,
            message: message.into(),
            location,
        }
    }

    /// Prefixes schema locations, for models nested inside a larger document.
    pub fn nested_under(mut self, prefix: &str) -> Self {
        if self.kind == ErrorKind::SchemaError {
            self.location = self.location.map(|loc| {
                if loc == "/" {
                    prefix.to_string()
                } else {
                    format!("{prefix}{loc}")
                }
            });
        }
        self
    }
}

impl From<IoError> for PipelineError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::ParseError {
                line,
                column,
                ref message,
            } => PipelineError::new(
                ErrorKind::ParseError,
                message.clone(),
                Some(format!("{line}:{column}")),
            ),
            IoError::SchemaError { path, message } => {
                PipelineError::new(ErrorKind::SchemaError, message, Some(path))
            }
            IoError::Invalid(d) => {
                PipelineError::new(ErrorKind::ValidationError, d.to_string(), None)
            }
        }
    }
}

impl From<ParseError> for PipelineError {
    fn from(e: ParseError) -> Self {
        PipelineError::new(
            ErrorKind::SyntaxError,
            e.to_string(),
            Some(format!("offset {}", e.offset())),
        )
    }
}

impl From<CheckError> for PipelineError {
    fn from(e: CheckError) -> Self {
        let kind = match e {
            CheckError::UnknownProposition(_) => ErrorKind::UnknownProposition,
            CheckError::UnknownPlayer(_) => ErrorKind::UnknownPlayer,
            CheckError::Pre(_) => ErrorKind::Internal,
        };
        PipelineError::new(kind, e.to_string(), None)
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutput {
    /// Serialized result document.
    pub document: Vec<u8>,
    pub warnings: Vec<String>,
}

/// Checks `formula` against a decoded JSON model.
pub fn check_value(
    model: &Value,
    formula: &str,
    options: CheckOptions,
) -> Result<CheckOutput, PipelineError> {
    let doc = io::decode_model(model)?;
    let structure = cgs::validate(&doc.structure).map_err(IoError::from)?;
    let formula = parser::parse(formula)?;
    let result = Checker::new(&structure, options).check(&formula)?;
    Ok(CheckOutput {
        document: io::dump_result(&result, structure.state_names()),
        warnings: result.warnings,
    })
}

/// Checks `formula` against a model given as raw JSON bytes.
pub fn check_bytes(
    model: &[u8],
    formula: &str,
    options: CheckOptions,
) -> Result<CheckOutput, PipelineError> {
    let value: Value = serde_json::from_slice(model).map_err(|e| IoError::ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    check_value(&value, formula, options)
}
