//! Textual DSL for models (`.ovm`) and configurations (`.cfg`).
//!
//! ```text
//! model qkd-backbone {
//!   vp Medium "Medium" kind=structure cardinality=[1..2] {
//!     variant Satellite-based "Satellite-based" fragment=medium-satellite opens Free-Space
//!   }
//!   constraint requires BB84 -> Direct;
//!   include "fragments.ovm"
//!   fragment structure medium-satellite {
//!     block Alice "User A" role=endpoint
//!     part Network -> Alice
//!   }
//! }
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

mod lexer;
mod parser;
mod printer;

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::Severity;

pub use parser::{
    parse_configuration, parse_configuration_named, parse_model, parse_model_with,
    ParsedConfiguration, ParsedModel,
};
pub use printer::{serialize_configuration, serialize_model};

/// 1-based, inclusive line/column range into a source file. Columns count
/// Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line_start, self.col_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseCode {
    LexicalError,
    UnexpectedToken,
    DuplicateDefinition,
    UnknownReference,
    InvalidAttribute,
    IncludeFailed,
    UnknownVariant,
    DuplicateSelection,
    ModelMismatch,
}

impl ParseCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseCode::LexicalError => "LEXICAL_ERROR",
            ParseCode::UnexpectedToken => "UNEXPECTED_TOKEN",
            ParseCode::DuplicateDefinition => "DUPLICATE_DEFINITION",
            ParseCode::UnknownReference => "UNKNOWN_REFERENCE",
            ParseCode::InvalidAttribute => "INVALID_ATTRIBUTE",
            ParseCode::IncludeFailed => "INCLUDE_FAILED",
            ParseCode::UnknownVariant => "UNKNOWN_VARIANT",
            ParseCode::DuplicateSelection => "DUPLICATE_SELECTION",
            ParseCode::ModelMismatch => "MODEL_MISMATCH",
        }
    }
}

impl fmt::Display for ParseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub code: ParseCode,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}[{}]: {}", self.span, self.code, self.message)
    }
}

/// Definition sites of model elements, for attaching spans to validation
/// diagnostics after parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    /// Variation points and variants.
    pub elements: BTreeMap<String, SourceSpan>,
    pub fragments: BTreeMap<String, SourceSpan>,
}

impl SourceMap {
    pub fn span_of(&self, id: &str) -> Option<&SourceSpan> {
        self.elements.get(id).or_else(|| self.fragments.get(id))
    }
}

/// Loads the text behind `include "path"` directives.
pub trait IncludeResolver {
    /// Returns the canonical name used in spans plus the file's contents.
    fn resolve(&self, including_file: &str, path: &str) -> Result<(String, String), String>;
}

/// Resolver for in-memory parsing: every include fails.
pub struct NoIncludes;

impl IncludeResolver for NoIncludes {
    fn resolve(&self, _: &str, path: &str) -> Result<(String, String), String> {
        Err(alloc::format!(
            "cannot include `{path}`: no file access configured"
        ))
    }
}

/// Resolver backed by a fixed set of named sources, keyed by the include path.
#[derive(Debug, Clone, Default)]
pub struct MemoryIncludes(pub BTreeMap<String, String>);

impl IncludeResolver for MemoryIncludes {
    fn resolve(&self, _: &str, path: &str) -> Result<(String, String), String> {
        self.0
            .get(path)
            .map(|t| (String::from(path), t.clone()))
            .ok_or_else(|| alloc::format!("no such file `{path}`"))
    }
}

pub(crate) fn is_error(d: &ParseDiagnostic) -> bool {
    d.severity == Severity::Error
}
