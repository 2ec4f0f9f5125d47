//! Machine-readable diagnostics shared by model, fragment and configuration checks.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

macro_rules! codes {
    ($($variant:ident => $text:literal),* $(,)?) => {
        /// Stable diagnostic codes. The serialized form is the SCREAMING_SNAKE text.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Code {
            $(#[serde(rename = $text)] $variant,)*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$variant => $text,)*
                }
            }
        }
    };
}

codes! {
    // model structure
    DuplicateId => "DUPLICATE_ID",
    InvalidIdentifier => "INVALID_IDENTIFIER",
    DanglingReference => "DANGLING_REFERENCE",
    HierarchyCycle => "HIERARCHY_CYCLE",
    MultipleOpeners => "MULTIPLE_OPENERS",
    CardinalityInvalid => "CARDINALITY_INVALID",
    EmptyVariationPoint => "EMPTY_VARIATION_POINT",
    ViewKindMismatch => "VIEW_KIND_MISMATCH",
    SelfConstraint => "SELF_CONSTRAINT",
    // fragments
    DuplicateElement => "DUPLICATE_ELEMENT",
    MissingInitial => "MISSING_INITIAL",
    MultipleInitial => "MULTIPLE_INITIAL",
    UnknownNode => "UNKNOWN_NODE",
    UnknownLane => "UNKNOWN_LANE",
    UnreachableNode => "UNREACHABLE_NODE",
    DecisionArity => "DECISION_ARITY",
    UnguardedDecisionEdge => "UNGUARDED_DECISION_EDGE",
    UnknownLifeline => "UNKNOWN_LIFELINE",
    UnknownBlock => "UNKNOWN_BLOCK",
    ContainmentCycle => "CONTAINMENT_CYCLE",
    MultipleParents => "MULTIPLE_PARENTS",
    DuplicatePort => "DUPLICATE_PORT",
    // configurations
    ModelMismatch => "MODEL_MISMATCH",
    UnknownVariant => "UNKNOWN_VARIANT",
    UnresolvedVp => "UNRESOLVED_VP",
    CardinalityViolation => "CARDINALITY_VIOLATION",
    VariantOutOfScope => "VARIANT_OUT_OF_SCOPE",
    RequiresViolated => "REQUIRES_VIOLATED",
    ExcludesViolated => "EXCLUDES_VIOLATED",
    // composition
    MergeConflict => "MERGE_CONFLICT",
    UnboundLifeline => "UNBOUND_LIFELINE",
    ChannelMismatch => "CHANNEL_MISMATCH",
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    /// Ids of the model elements the diagnostic is about, most specific first.
    pub subjects: Vec<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn error<S: Into<String>>(
        code: Code,
        subjects: impl IntoIterator<Item = S>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            subjects: subjects.into_iter().map(Into::into).collect(),
            message: message.into(),
        }
    }

    pub fn warning<S: Into<String>>(
        code: Code,
        subjects: impl IntoIterator<Item = S>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, subjects, message)
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.diagnostics.extend(other.diagnostics);
    }

    pub fn is_empty(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// True when no error-severity diagnostic is present.
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn has_code(&self, code: Code) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn count_code(&self, code: Code) -> usize {
        self.diagnostics.iter().filter(|d| d.code == code).count()
    }

    /// Diagnostics with the given code whose first subject is `subject`.
    pub fn find(&self, code: Code, subject: &str) -> Option<&Diagnostic> {
        self.diagnostics
            .iter()
            .find(|d| d.code == code && d.subjects.first().map(String::as_str) == Some(subject))
    }
}
