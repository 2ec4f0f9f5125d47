//! Loading `.ovm` models and `.cfg` selections from disk.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use qkdvm_core::text::{
    parse_configuration_named, parse_model_with, IncludeResolver, ParseDiagnostic,
    ParsedConfiguration, SourceMap,
};
use qkdvm_core::{validate_model, Diagnostic, OvmModel, Severity, ValidationReport};

/// Resolves `include` paths relative to the including file.
pub struct FsIncludes;

impl IncludeResolver for FsIncludes {
    fn resolve(&self, including_file: &str, path: &str) -> Result<(String, String), String> {
        let base = Path::new(including_file).parent().unwrap_or(Path::new(""));
        let full: PathBuf = base.join(path);
        let text = fs::read_to_string(&full)
            .map_err(|e| format!("cannot read `{}`: {e}", full.display()))?;
        Ok((full.display().to_string(), text))
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
    Parse(Vec<ParseDiagnostic>),
    Invalid {
        file: String,
        report: ValidationReport,
        spans: SourceMap,
    },
}

impl LoadError {
    /// 2 for environment problems, 1 for anything wrong with the content.
    pub fn exit_code(&self) -> u8 {
        match self {
            LoadError::Io { .. } => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            LoadError::Parse(diags) => {
                for (i, d) in diags.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            LoadError::Invalid {
                file,
                report,
                spans,
            } => write_report(f, file, report, Some(spans)),
        }
    }
}

/// One line per diagnostic, prefixed with the source position of its first
/// subject when the model came from text.
pub fn write_report(
    f: &mut dyn fmt::Write,
    file: &str,
    report: &ValidationReport,
    spans: Option<&SourceMap>,
) -> fmt::Result {
    for (i, d) in report.diagnostics.iter().enumerate() {
        if i > 0 {
            writeln!(f)?;
        }
        let at = spans.and_then(|m| d.subjects.iter().find_map(|s| m.span_of(s)));
        match at {
            Some(span) => write!(f, "{span}: {d}")?,
            None => write!(f, "{file}: {d}")?,
        }
        if !d.subjects.is_empty() {
            write!(f, " [{}]", d.subjects.join(", "))?;
        }
    }
    Ok(())
}

pub fn report_text(file: &str, report: &ValidationReport, spans: Option<&SourceMap>) -> String {
    let mut s = String::new();
    let _ = write_report(&mut s, file, report, spans);
    s
}

pub struct LoadedModel {
    pub file: String,
    pub model: OvmModel,
    pub source_map: SourceMap,
    pub warnings: Vec<ParseDiagnostic>,
    /// Non-fatal validation findings.
    pub report: ValidationReport,
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|error| LoadError::Io {
        path: path.to_path_buf(),
        error,
    })
}

/// Parses and validates a model; fails on any error-severity finding.
pub fn load_model(path: &Path) -> Result<LoadedModel, LoadError> {
    let text = read(path)?;
    let file = path.display().to_string();
    let parsed = parse_model_with(&file, &text, &FsIncludes).map_err(LoadError::Parse)?;
    let report = validate_model(&parsed.model);
    if !report.is_valid() {
        return Err(LoadError::Invalid {
            file,
            report,
            spans: parsed.source_map,
        });
    }
    Ok(LoadedModel {
        file,
        model: parsed.model,
        source_map: parsed.source_map,
        warnings: parsed.warnings,
        report,
    })
}

pub fn load_configuration(path: &Path, model: &OvmModel) -> Result<ParsedConfiguration, LoadError> {
    let text = read(path)?;
    parse_configuration_named(&path.display().to_string(), &text, model).map_err(LoadError::Parse)
}

pub fn warnings_of(report: &ValidationReport) -> impl Iterator<Item = &Diagnostic> {
    report
        .diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Warning)
}
