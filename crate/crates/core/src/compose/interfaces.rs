use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::compose::{ComposedArchitecture, Connector, InterfaceDefinition, PortRef};
use crate::diag::{Code, Diagnostic, ValidationReport};
use crate::fragment::{ChannelKind, Direction, Port};
use crate::ident::Ident;

#[derive(Default)]
struct Group {
    forward: bool,
    backward: bool,
    carries: BTreeSet<String>,
}

/// Derives one connector per (block pair, channel) that some bound
/// interaction message crosses.
///
/// Each end reuses an unused declared port of the same channel when there is
/// one and otherwise gets a fresh `<channel>_<n>` port. A block whose declared
/// ports all carry the other channel kind cannot take the connector
/// (`CHANNEL_MISMATCH`).
pub fn derive_interfaces(
    arch: &ComposedArchitecture,
) -> Result<InterfaceDefinition, ValidationReport> {
    let mut report = ValidationReport::new();
    let known: BTreeSet<&str> = arch
        .structure
        .blocks
        .iter()
        .map(|b| b.id.as_str())
        .collect();

    let mut groups: BTreeMap<(Ident, Ident, ChannelKind), Group> = BTreeMap::new();
    for inst in &arch.interactions {
        for m in &inst.fragment.messages {
            let (Some(a), Some(b)) = (inst.bindings.get(&m.from), inst.bindings.get(&m.to)) else {
                continue;
            };
            if a == b {
                continue;
            }
            for end in [a, b] {
                if !known.contains(end.as_str()) {
                    report.push(Diagnostic::error(
                        Code::UnknownBlock,
                        [end.as_str(), inst.id.as_str()],
                        format!(
                            "interaction `{}` is bound to missing block `{end}`",
                            inst.id
                        ),
                    ));
                }
            }
            let (lo, hi, forward) = if a < b { (a, b, true) } else { (b, a, false) };
            let g = groups
                .entry((lo.clone(), hi.clone(), m.channel))
                .or_default();
            if forward {
                g.forward = true;
            } else {
                g.backward = true;
            }
            g.carries.insert(inst.id.clone());
        }
    }
    if !report.is_valid() {
        return Err(report);
    }

    let mut used: BTreeSet<(Ident, Ident)> = BTreeSet::new();
    let mut created: Vec<Port> = Vec::new();
    let mut connectors = Vec::new();

    for ((lo, hi, channel), g) in &groups {
        let dir_lo = match (g.forward, g.backward) {
            (true, false) => Direction::Out,
            (false, true) => Direction::In,
            _ => Direction::Inout,
        };
        let dir_hi = match dir_lo {
            Direction::Out => Direction::In,
            Direction::In => Direction::Out,
            Direction::Inout => Direction::Inout,
        };
        let mut end = |block: &Ident, dir: Direction, report: &mut ValidationReport| {
            allocate(arch, block, *channel, dir, &mut used, &mut created, report)
        };
        let pa = end(lo, dir_lo, &mut report);
        let pb = end(hi, dir_hi, &mut report);
        if let (Some(pa), Some(pb)) = (pa, pb) {
            connectors.push(Connector {
                a: PortRef {
                    block: lo.clone(),
                    port: pa,
                },
                b: PortRef {
                    block: hi.clone(),
                    port: pb,
                },
                channel: *channel,
                carries: g.carries.iter().cloned().collect(),
            });
        }
    }

    if report.is_valid() {
        Ok(InterfaceDefinition {
            connectors,
            created_ports: created,
        })
    } else {
        Err(report)
    }
}

fn allocate(
    arch: &ComposedArchitecture,
    block: &Ident,
    channel: ChannelKind,
    direction: Direction,
    used: &mut BTreeSet<(Ident, Ident)>,
    created: &mut Vec<Port>,
    report: &mut ValidationReport,
) -> Option<Ident> {
    let declared: Vec<&Port> = arch.structure.ports_of(block).collect();
    if let Some(p) = declared
        .iter()
        .find(|p| p.channel == channel && !used.contains(&(block.clone(), p.id.clone())))
    {
        used.insert((block.clone(), p.id.clone()));
        return Some(p.id.clone());
    }
    if !declared.is_empty() && declared.iter().all(|p| p.channel != channel) {
        report.push(Diagnostic::error(
            Code::ChannelMismatch,
            [block.as_str()],
            format!(
                "a {channel} message reaches `{block}`, whose ports are all {}",
                declared[0].channel
            ),
        ));
        return None;
    }
    let taken = |id: &str| {
        declared.iter().any(|p| p.id == id)
            || created.iter().any(|p| p.block == *block && p.id == id)
    };
    let mut n = 1usize;
    let id = loop {
        let candidate = format!("{}_{n}", channel.as_str());
        if !taken(&candidate) {
            break Ident::new(candidate);
        }
        n += 1;
    };
    used.insert((block.clone(), id.clone()));
    created.push(Port {
        block: block.clone(),
        id: id.clone(),
        channel,
        direction,
    });
    Some(id)
}
