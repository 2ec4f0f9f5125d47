use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::compose::Configuration;
use crate::fragment::{
    BlockRole, Direction, InteractionFragment, NodeKind, ProcessFragment, StructureFragment,
    ViewFragment,
};
use crate::ovm::{OvmModel, Presence};

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

/// Canonical text form: `\n` line endings, two-space indentation, variation
/// points, then constraints, then fragments, each separated by a blank line.
/// Parsing the output yields a model equal to the input.
pub fn serialize_model(model: &OvmModel) -> String {
    if model.name.is_empty()
        && model.variation_points.is_empty()
        && model.constraints.is_empty()
        && model.fragments.is_empty()
    {
        return String::new();
    }
    let mut items: Vec<String> = Vec::new();

    for vp in &model.variation_points {
        let mut s = String::new();
        let _ = write!(
            s,
            "  vp {} {} kind={} cardinality={}",
            vp.id,
            quote(&vp.label),
            vp.view_kind,
            vp.cardinality
        );
        if vp.presence == Presence::Optional {
            s.push_str(" presence=optional");
        }
        s.push_str(" {\n");
        for v in &vp.variants {
            let _ = write!(
                s,
                "    variant {} {} fragment={}",
                v.id,
                quote(&v.label),
                v.fragment
            );
            if !v.opens.is_empty() {
                let opens: Vec<&str> = v.opens.iter().map(|o| o.as_str()).collect();
                let _ = write!(s, " opens {}", opens.join(", "));
            }
            s.push('\n');
        }
        s.push_str("  }\n");
        items.push(s);
    }

    if !model.constraints.is_empty() {
        let mut s = String::new();
        for c in &model.constraints {
            let _ = writeln!(
                s,
                "  constraint {} {} -> {};",
                c.kind.as_str(),
                c.from,
                c.to
            );
        }
        items.push(s);
    }

    for f in &model.fragments {
        let mut s = String::new();
        match f {
            ViewFragment::Process(p) => process(&mut s, p),
            ViewFragment::Interaction(i) => interaction(&mut s, i),
            ViewFragment::Structure(st) => structure(&mut s, st),
        }
        items.push(s);
    }

    let mut out = String::new();
    let _ = writeln!(out, "model {} {{", model.name);
    out.push_str(&items.join("\n"));
    out.push_str("}\n");
    out
}

fn process(s: &mut String, p: &ProcessFragment) {
    let _ = write!(s, "  fragment process {}", p.id);
    if let Some(proto) = p.protocol {
        let _ = write!(s, " protocol={proto}");
    }
    s.push_str(" {\n");
    for l in &p.lanes {
        let _ = writeln!(s, "    lane {l}");
    }
    for n in &p.nodes {
        let _ = write!(s, "    {} {}", n.kind.as_str(), n.id);
        match (&n.label, n.kind) {
            (Some(l), _) => {
                let _ = write!(s, " {}", quote(l));
            }
            // Actions always carry a label in the text form.
            (None, NodeKind::Action) => s.push_str(" \"\""),
            _ => {}
        }
        if let Some(lane) = &n.lane {
            let _ = write!(s, " lane={lane}");
        }
        s.push('\n');
    }
    for e in &p.edges {
        let _ = write!(s, "    edge {} -> {}", e.from, e.to);
        if let Some(g) = &e.guard {
            let _ = write!(s, " guard={}", quote(g));
        }
        s.push('\n');
    }
    s.push_str("  }\n");
}

fn interaction(s: &mut String, i: &InteractionFragment) {
    let _ = write!(s, "  fragment interaction {}", i.id);
    match i.applies.as_slice() {
        [] => {}
        [one] => {
            let _ = write!(s, " applies={one}");
        }
        many => {
            let names: Vec<&str> = many.iter().map(|m| m.as_str()).collect();
            let _ = write!(s, " applies=[{}]", names.join(", "));
        }
    }
    s.push_str(" {\n");
    for l in &i.lifelines {
        let _ = write!(s, "    lifeline {}", l.id);
        if let Some(r) = l.role {
            let _ = write!(s, " role={}", r.as_str());
        }
        s.push('\n');
    }
    for m in &i.messages {
        let _ = writeln!(
            s,
            "    message {} -> {} {} channel={}",
            m.from,
            m.to,
            quote(&m.label),
            m.channel
        );
    }
    s.push_str("  }\n");
}

fn structure(s: &mut String, st: &StructureFragment) {
    let _ = writeln!(s, "  fragment structure {} {{", st.id);
    for b in &st.blocks {
        let _ = write!(s, "    block {}", b.id);
        if let Some(l) = &b.label {
            let _ = write!(s, " {}", quote(l));
        }
        if let Some(role) = &b.role {
            let _ = write!(s, " role={}", role.keyword());
            if let BlockRole::Link { medium, length_km } = role {
                let _ = write!(s, " medium={medium}");
                if let Some(len) = length_km {
                    let _ = write!(s, " length={len}");
                }
            }
        }
        s.push('\n');
    }
    for c in &st.containment {
        let _ = writeln!(s, "    part {} -> {}", c.parent, c.child);
    }
    for p in &st.ports {
        let _ = write!(s, "    port {} {} channel={}", p.block, p.id, p.channel);
        if p.direction != Direction::Inout {
            let _ = write!(s, " direction={}", p.direction.as_str());
        }
        s.push('\n');
    }
    s.push_str("  }\n");
}

/// Canonical configuration text; selections are listed in id order.
pub fn serialize_configuration(name: &str, config: &Configuration) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "configuration {name} for {} {{", config.model);
    if !config.selected.is_empty() {
        let ids: Vec<&str> = config.selected.iter().map(|i| i.as_str()).collect();
        let _ = writeln!(out, "  select {}", ids.join(", "));
    }
    out.push_str("}\n");
    out
}
