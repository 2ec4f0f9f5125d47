use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::compose::ComposedArchitecture;
use crate::fragment::ChannelKind;
use crate::ident::Ident;

pub const ARCHITECTURE_SCHEMA: &str = "qkdvm.architecture.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Dot,
}

impl ExportFormat {
    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "json" => Some(ExportFormat::Json),
            "dot" => Some(ExportFormat::Dot),
            _ => None,
        }
    }
}

/// Canonical text export. JSON has sorted keys and a trailing newline; DOT
/// renders containers as clusters and connectors as channel-labelled edges.
pub fn export_architecture(arch: &ComposedArchitecture, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => to_json(arch),
        ExportFormat::Dot => to_dot(arch),
    }
}

fn to_json(arch: &ComposedArchitecture) -> String {
    let mut value = serde_json::to_value(arch).expect("architecture serializes");
    if let serde_json::Value::Object(map) = &mut value {
        map.insert(
            String::from("schema"),
            serde_json::Value::String(String::from(ARCHITECTURE_SCHEMA)),
        );
    }
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn to_dot(arch: &ComposedArchitecture) -> String {
    let s = &arch.structure;
    let mut children: BTreeMap<&Ident, Vec<&Ident>> = BTreeMap::new();
    for c in &s.containment {
        children.entry(&c.parent).or_default().push(&c.child);
    }
    let label = |id: &Ident| -> String {
        s.block(id)
            .and_then(|b| b.label.clone())
            .unwrap_or_else(|| String::from(id.as_str()))
    };

    let mut out = String::new();
    let name = if arch.model.is_empty() {
        "architecture"
    } else {
        arch.model.as_str()
    };
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  compound=true;\n  node [shape=box];\n");

    fn emit(
        out: &mut String,
        id: &Ident,
        depth: usize,
        children: &BTreeMap<&Ident, Vec<&Ident>>,
        label: &dyn Fn(&Ident) -> String,
    ) {
        let pad = "  ".repeat(depth);
        match children.get(id) {
            Some(kids) => {
                let _ = writeln!(
                    out,
                    "{pad}subgraph {} {{",
                    quote(&alloc::format!("cluster_{id}"))
                );
                let _ = writeln!(out, "{pad}  label={};", quote(&label(id)));
                let _ = writeln!(
                    out,
                    "{pad}  {} [shape=plaintext, label={}];",
                    quote(id),
                    quote(id)
                );
                for k in kids {
                    emit(out, k, depth + 1, children, label);
                }
                let _ = writeln!(out, "{pad}}}");
            }
            None => {
                let _ = writeln!(out, "{pad}{} [label={}];", quote(id), quote(&label(id)));
            }
        }
    }

    for b in &s.blocks {
        if s.parent_of(&b.id).is_none() {
            emit(&mut out, &b.id, 1, &children, &label);
        }
    }
    for c in &arch.interface.connectors {
        let style = match c.channel {
            ChannelKind::Quantum => "bold",
            ChannelKind::Classical => "dashed",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [dir=none, style={style}, label={}, taillabel={}, headlabel={}];",
            quote(&c.a.block),
            quote(&c.b.block),
            quote(c.channel.as_str()),
            quote(&c.a.port),
            quote(&c.b.port),
        );
    }
    out.push_str("}\n");
    out
}
