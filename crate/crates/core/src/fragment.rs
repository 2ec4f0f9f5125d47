//! View fragments bound to variants: process (activity), interaction
//! (sequence) and structure (block definition) graphs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Code, Diagnostic, ValidationReport};
use crate::ident::Ident;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    Process,
    Interaction,
    Structure,
}

impl ViewKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViewKind::Process => "process",
            ViewKind::Interaction => "interaction",
            ViewKind::Structure => "structure",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "process" => Some(ViewKind::Process),
            "interaction" => Some(ViewKind::Interaction),
            "structure" => Some(ViewKind::Structure),
            _ => None,
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Quantum,
    Classical,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Quantum => "quantum",
            ChannelKind::Classical => "classical",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "quantum" => Some(ChannelKind::Quantum),
            "classical" => Some(ChannelKind::Classical),
            _ => None,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Physical medium of a link block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MediumKind {
    Fiber,
    FreeSpace,
}

impl MediumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MediumKind::Fiber => "fiber",
            MediumKind::FreeSpace => "free-space",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "fiber" | "fibre" => Some(MediumKind::Fiber),
            "free-space" => Some(MediumKind::FreeSpace),
            _ => None,
        }
    }
}

impl fmt::Display for MediumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// QKD protocol a process fragment describes, used to pick the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Bb84,
    Mdi,
    E91,
}

impl ProtocolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Bb84 => "bb84",
            ProtocolKind::Mdi => "mdi",
            ProtocolKind::E91 => "e91",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "bb84" => Some(ProtocolKind::Bb84),
            "mdi" => Some(ProtocolKind::Mdi),
            "e91" => Some(ProtocolKind::E91),
            _ => None,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------- process

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Initial,
    Action,
    Decision,
    Final,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Initial => "initial",
            NodeKind::Action => "action",
            NodeKind::Decision => "decision",
            NodeKind::Final => "final",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessNode {
    pub id: Ident,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane: Option<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlEdge {
    pub from: Ident,
    pub to: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
}

/// Activity-style description of a protocol's operational steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessFragment {
    pub id: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolKind>,
    pub lanes: Vec<Ident>,
    pub nodes: Vec<ProcessNode>,
    pub edges: Vec<ControlEdge>,
}

impl ProcessFragment {
    pub fn node(&self, id: &str) -> Option<&ProcessNode> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

// ------------------------------------------------------------ interaction

/// Role a lifeline plays when an interaction is instantiated on a quantum path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifelineRole {
    Sender,
    Receiver,
    Repeater,
    Medium,
}

impl LifelineRole {
    pub fn as_str(self) -> &'static str {
        match self {
            LifelineRole::Sender => "sender",
            LifelineRole::Receiver => "receiver",
            LifelineRole::Repeater => "repeater",
            LifelineRole::Medium => "medium",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "sender" => Some(LifelineRole::Sender),
            "receiver" => Some(LifelineRole::Receiver),
            "repeater" => Some(LifelineRole::Repeater),
            "medium" => Some(LifelineRole::Medium),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lifeline {
    pub id: Ident,
    /// Without a role the lifeline binds to the block of the same id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<LifelineRole>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: Ident,
    pub to: Ident,
    pub label: String,
    pub channel: ChannelKind,
}

/// Sequence-style description of information exchange between participants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionFragment {
    pub id: Ident,
    /// Media this interaction is instantiated on; empty means every medium.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub applies: Vec<MediumKind>,
    pub lifelines: Vec<Lifeline>,
    pub messages: Vec<Message>,
}

impl InteractionFragment {
    pub fn lifeline(&self, id: &str) -> Option<&Lifeline> {
        self.lifelines.iter().find(|l| l.id == id)
    }

    pub fn applies_to(&self, medium: Option<MediumKind>) -> bool {
        self.applies.is_empty() || medium.is_some_and(|m| self.applies.contains(&m))
    }
}

// -------------------------------------------------------------- structure

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase")]
pub enum BlockRole {
    /// A user (key-consuming party).
    Endpoint,
    /// A channel subsystem that carries one quantum path between the endpoints.
    Path,
    /// The physical medium inside a path.
    Link {
        medium: MediumKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length_km: Option<f64>,
    },
    Repeater,
}

impl BlockRole {
    pub fn keyword(&self) -> &'static str {
        match self {
            BlockRole::Endpoint => "endpoint",
            BlockRole::Path => "path",
            BlockRole::Link { .. } => "link",
            BlockRole::Repeater => "repeater",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", flatten)]
    pub role: Option<BlockRole>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Containment {
    pub parent: Ident,
    pub child: Ident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
    Inout,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::Inout => "inout",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "in" => Some(Direction::In),
            "out" => Some(Direction::Out),
            "inout" => Some(Direction::Inout),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub block: Ident,
    pub id: Ident,
    pub channel: ChannelKind,
    pub direction: Direction,
}

/// Block-definition-style hierarchy of system parts and their ports.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StructureFragment {
    pub id: Ident,
    pub blocks: Vec<Block>,
    pub containment: Vec<Containment>,
    pub ports: Vec<Port>,
}

impl StructureFragment {
    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn parent_of(&self, id: &str) -> Option<&Ident> {
        self.containment
            .iter()
            .find(|c| c.child == id)
            .map(|c| &c.parent)
    }

    /// `id` and every block transitively contained in it, in id order.
    pub fn subtree(&self, id: &str) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        let mut stack = alloc::vec![Ident::new(id)];
        while let Some(b) = stack.pop() {
            if !out.insert(b.clone()) {
                continue;
            }
            for c in self.containment.iter().filter(|c| c.parent == b) {
                stack.push(c.child.clone());
            }
        }
        out
    }

    pub fn ports_of<'a>(&'a self, block: &'a str) -> impl Iterator<Item = &'a Port> + 'a {
        self.ports.iter().filter(move |p| p.block == block)
    }
}

// ----------------------------------------------------------------- union

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ViewFragment {
    Process(ProcessFragment),
    Interaction(InteractionFragment),
    Structure(StructureFragment),
}

impl ViewFragment {
    pub fn id(&self) -> &Ident {
        match self {
            ViewFragment::Process(f) => &f.id,
            ViewFragment::Interaction(f) => &f.id,
            ViewFragment::Structure(f) => &f.id,
        }
    }

    pub fn kind(&self) -> ViewKind {
        fragment_kind(self)
    }
}

pub fn fragment_kind(fragment: &ViewFragment) -> ViewKind {
    match fragment {
        ViewFragment::Process(_) => ViewKind::Process,
        ViewFragment::Interaction(_) => ViewKind::Interaction,
        ViewFragment::Structure(_) => ViewKind::Structure,
    }
}

/// Checks a fragment's well-formedness. Subjects are `<fragment>` followed by
/// the offending element id.
pub fn validate_fragment(fragment: &ViewFragment) -> ValidationReport {
    let mut report = ValidationReport::new();
    match fragment {
        ViewFragment::Process(p) => validate_process(p, &mut report),
        ViewFragment::Interaction(i) => validate_interaction(i, &mut report),
        ViewFragment::Structure(s) => validate_structure(s, &mut report),
    }
    report
}

fn duplicates<'a, I: IntoIterator<Item = &'a Ident>>(ids: I) -> Vec<&'a Ident> {
    let mut seen = BTreeSet::new();
    let mut dup = Vec::new();
    for id in ids {
        if !seen.insert(id) && !dup.contains(&id) {
            dup.push(id);
        }
    }
    dup
}

fn validate_process(p: &ProcessFragment, report: &mut ValidationReport) {
    let fid = p.id.as_str();
    for d in duplicates(&p.lanes) {
        report.push(Diagnostic::error(
            Code::DuplicateElement,
            [fid, d.as_str()],
            format!("lane `{d}` declared more than once in `{fid}`"),
        ));
    }
    for d in duplicates(p.nodes.iter().map(|n| &n.id)) {
        report.push(Diagnostic::error(
            Code::DuplicateElement,
            [fid, d.as_str()],
            format!("node `{d}` declared more than once in `{fid}`"),
        ));
    }
    for n in &p.nodes {
        if let Some(lane) = &n.lane {
            if !p.lanes.contains(lane) {
                report.push(Diagnostic::error(
                    Code::UnknownLane,
                    [fid, n.id.as_str(), lane.as_str()],
                    format!("node `{}` is placed in undeclared lane `{lane}`", n.id),
                ));
            }
        }
    }

    let initials: Vec<&ProcessNode> = p
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Initial)
        .collect();
    match initials.len() {
        0 => report.push(Diagnostic::error(
            Code::MissingInitial,
            [fid],
            format!("process `{fid}` has no initial node"),
        )),
        1 => {}
        k => report.push(Diagnostic::error(
            Code::MultipleInitial,
            core::iter::once(fid).chain(initials.iter().map(|n| n.id.as_str())),
            format!("process `{fid}` has {k} initial nodes"),
        )),
    }

    let known: BTreeSet<&str> = p.nodes.iter().map(|n| n.id.as_str()).collect();
    let mut succ: BTreeMap<&str, Vec<&ControlEdge>> = BTreeMap::new();
    for e in &p.edges {
        for end in [&e.from, &e.to] {
            if !known.contains(end.as_str()) {
                report.push(Diagnostic::error(
                    Code::UnknownNode,
                    [fid, end.as_str()],
                    format!(
                        "edge `{} -> {}` references unknown node `{end}`",
                        e.from, e.to
                    ),
                ));
            }
        }
        succ.entry(e.from.as_str()).or_default().push(e);
    }

    if initials.len() == 1 {
        let mut reached = BTreeSet::new();
        let mut stack = alloc::vec![initials[0].id.as_str()];
        while let Some(n) = stack.pop() {
            if !reached.insert(n) {
                continue;
            }
            if let Some(out) = succ.get(n) {
                stack.extend(out.iter().map(|e| e.to.as_str()));
            }
        }
        for n in &p.nodes {
            if !reached.contains(n.id.as_str()) {
                report.push(Diagnostic::error(
                    Code::UnreachableNode,
                    [fid, n.id.as_str()],
                    format!("node `{}` is not reachable from the initial node", n.id),
                ));
            }
        }
    }

    for n in p.nodes.iter().filter(|n| n.kind == NodeKind::Decision) {
        let out = succ.get(n.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if out.len() < 2 {
            report.push(Diagnostic::error(
                Code::DecisionArity,
                [fid, n.id.as_str()],
                format!(
                    "decision `{}` needs at least two outgoing edges, found {}",
                    n.id,
                    out.len()
                ),
            ));
        }
        for e in out.iter().filter(|e| e.guard.is_none()) {
            report.push(Diagnostic::error(
                Code::UnguardedDecisionEdge,
                [fid, n.id.as_str(), e.to.as_str()],
                format!(
                    "edge `{} -> {}` leaves a decision without a guard",
                    e.from, e.to
                ),
            ));
        }
    }
}

fn validate_interaction(i: &InteractionFragment, report: &mut ValidationReport) {
    let fid = i.id.as_str();
    for d in duplicates(i.lifelines.iter().map(|l| &l.id)) {
        report.push(Diagnostic::error(
            Code::DuplicateElement,
            [fid, d.as_str()],
            format!("lifeline `{d}` declared more than once in `{fid}`"),
        ));
    }
    for (idx, m) in i.messages.iter().enumerate() {
        for end in [&m.from, &m.to] {
            if i.lifeline(end).is_none() {
                report.push(Diagnostic::error(
                    Code::UnknownLifeline,
                    [fid, end.as_str()],
                    format!(
                        "message #{} `{}` uses undeclared lifeline `{end}`",
                        idx + 1,
                        m.label
                    ),
                ));
            }
        }
    }
}

fn validate_structure(s: &StructureFragment, report: &mut ValidationReport) {
    let fid = s.id.as_str();
    for d in duplicates(s.blocks.iter().map(|b| &b.id)) {
        report.push(Diagnostic::error(
            Code::DuplicateElement,
            [fid, d.as_str()],
            format!("block `{d}` declared more than once in `{fid}`"),
        ));
    }
    let known: BTreeSet<&str> = s.blocks.iter().map(|b| b.id.as_str()).collect();

    let mut parents: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for c in &s.containment {
        for end in [&c.parent, &c.child] {
            if !known.contains(end.as_str()) {
                report.push(Diagnostic::error(
                    Code::UnknownBlock,
                    [fid, end.as_str()],
                    format!(
                        "part `{} -> {}` references unknown block `{end}`",
                        c.parent, c.child
                    ),
                ));
            }
        }
        parents
            .entry(c.child.as_str())
            .or_default()
            .insert(c.parent.as_str());
    }
    for (child, ps) in &parents {
        if ps.len() > 1 {
            report.push(Diagnostic::error(
                Code::MultipleParents,
                core::iter::once(fid)
                    .chain(core::iter::once(*child))
                    .chain(ps.iter().copied()),
                format!("block `{child}` is part of {} different parents", ps.len()),
            ));
        }
    }
    // Containment cycles: walk parent links from every block.
    let mut reported: BTreeSet<&str> = BTreeSet::new();
    for start in parents.keys() {
        let mut path: Vec<&str> = alloc::vec![*start];
        let mut cur = *start;
        while let Some(p) = parents.get(cur).and_then(|ps| ps.iter().next()) {
            if let Some(pos) = path.iter().position(|x| x == p) {
                let cycle = &path[pos..];
                if cycle.iter().all(|b| !reported.contains(b)) {
                    reported.extend(cycle.iter().copied());
                    let mut members: Vec<&str> = cycle.to_vec();
                    members.sort_unstable();
                    report.push(Diagnostic::error(
                        Code::ContainmentCycle,
                        core::iter::once(fid).chain(members.iter().copied()),
                        format!("containment cycle through {}", members.join(", ")),
                    ));
                }
                break;
            }
            path.push(p);
            cur = p;
        }
    }

    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    for p in &s.ports {
        if !known.contains(p.block.as_str()) {
            report.push(Diagnostic::error(
                Code::UnknownBlock,
                [fid, p.block.as_str()],
                format!(
                    "port `{}.{}` is on unknown block `{}`",
                    p.block, p.id, p.block
                ),
            ));
        }
        if !seen.insert((p.block.as_str(), p.id.as_str())) {
            report.push(Diagnostic::error(
                Code::DuplicatePort,
                [fid, p.block.as_str(), p.id.as_str()],
                format!("port `{}` declared twice on block `{}`", p.id, p.block),
            ));
        }
    }
}
