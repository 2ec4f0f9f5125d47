use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::compose::{
    check_configuration, derive_interfaces, BoundProcess, ComposedArchitecture, Configuration,
    InteractionInstance, QuantumPath,
};
use crate::diag::{Code, Diagnostic, ValidationReport};
use crate::fragment::{
    Block, BlockRole, ChannelKind, Containment, InteractionFragment, Lifeline, LifelineRole,
    Message, Port, StructureFragment, ViewFragment,
};
use crate::ident::Ident;
use crate::ovm::OvmModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComposeError {
    /// The configuration did not pass [`check_configuration`].
    InvalidConfiguration(ValidationReport),
    /// Fragments could not be merged or bound consistently.
    Conflict(ValidationReport),
}

impl ComposeError {
    pub fn report(&self) -> &ValidationReport {
        match self {
            ComposeError::InvalidConfiguration(r) | ComposeError::Conflict(r) => r,
        }
    }
}

impl fmt::Display for ComposeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self {
            ComposeError::InvalidConfiguration(_) => "configuration is invalid",
            ComposeError::Conflict(_) => "composition failed",
        };
        write!(f, "{what}")?;
        for d in &self.report().diagnostics {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ComposeError {}

type Origins = BTreeSet<Ident>;

#[derive(Default)]
struct MergedStructure {
    blocks: BTreeMap<Ident, (Block, Origins)>,
    ports: BTreeMap<(Ident, Ident), (Port, Origins)>,
    containment: BTreeSet<Containment>,
}

impl MergedStructure {
    fn add_fragment(
        &mut self,
        variant: &Ident,
        s: &StructureFragment,
        report: &mut ValidationReport,
    ) {
        for b in &s.blocks {
            match self.blocks.get_mut(&b.id) {
                None => {
                    self.blocks
                        .insert(b.id.clone(), (b.clone(), Origins::from([variant.clone()])));
                }
                Some((existing, origins)) => {
                    let mut clash = |what: &str| {
                        report.push(Diagnostic::error(
                            Code::MergeConflict,
                            core::iter::once(b.id.as_str())
                                .chain(origins.iter().map(Ident::as_str))
                                .chain(core::iter::once(variant.as_str())),
                            format!(
                                "block `{}` is declared with a different {what} by `{}` and `{variant}`",
                                b.id,
                                join(origins)
                            ),
                        ));
                    };
                    match (&existing.label, &b.label) {
                        (Some(x), Some(y)) if x != y => clash("label"),
                        (None, Some(y)) => existing.label = Some(y.clone()),
                        _ => {}
                    }
                    match (&existing.role, &b.role) {
                        (Some(x), Some(y)) if x != y => clash("role"),
                        (None, Some(y)) => existing.role = Some(*y),
                        _ => {}
                    }
                    origins.insert(variant.clone());
                }
            }
        }
        for p in &s.ports {
            let key = (p.block.clone(), p.id.clone());
            match self.ports.get_mut(&key) {
                None => {
                    self.ports
                        .insert(key, (p.clone(), Origins::from([variant.clone()])));
                }
                Some((existing, origins)) => {
                    if existing.channel != p.channel || existing.direction != p.direction {
                        report.push(Diagnostic::error(
                            Code::MergeConflict,
                            [
                                format!("{}.{}", p.block, p.id),
                                join(origins),
                                String::from(variant.as_str()),
                            ],
                            format!(
                                "port `{}.{}` is {} {} in `{}` but {} {} in `{variant}`",
                                p.block,
                                p.id,
                                existing.channel,
                                existing.direction.as_str(),
                                join(origins),
                                p.channel,
                                p.direction.as_str()
                            ),
                        ));
                    }
                    origins.insert(variant.clone());
                }
            }
        }
        self.containment.extend(s.containment.iter().cloned());
    }

    fn check_forest(&self, report: &mut ValidationReport) {
        let mut parent: BTreeMap<&Ident, &Ident> = BTreeMap::new();
        for c in &self.containment {
            if let Some(prev) = parent.insert(&c.child, &c.parent) {
                report.push(Diagnostic::error(
                    Code::MergeConflict,
                    [c.child.as_str(), prev.as_str(), c.parent.as_str()],
                    format!(
                        "block `{}` is placed in both `{prev}` and `{}`{}",
                        c.child,
                        c.parent,
                        self.origins_note(&c.child)
                    ),
                ));
            }
        }
        for start in parent.keys() {
            let mut seen = BTreeSet::from([*start]);
            let mut cur = *start;
            while let Some(p) = parent.get(cur) {
                if !seen.insert(*p) {
                    if p == start {
                        report.push(Diagnostic::error(
                            Code::MergeConflict,
                            [start.as_str()],
                            format!("merged containment puts `{start}` inside itself"),
                        ));
                    }
                    break;
                }
                cur = p;
            }
        }
    }

    fn origins_note(&self, id: &Ident) -> String {
        match self.blocks.get(id) {
            Some((_, o)) => format!(" (from {})", join(o)),
            None => String::new(),
        }
    }

    fn has_role(&self, id: &Ident, pred: impl Fn(&BlockRole) -> bool) -> bool {
        self.blocks
            .get(id)
            .and_then(|(b, _)| b.role.as_ref())
            .is_some_and(pred)
    }

    fn subtree(&self, root: &Ident) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        let mut stack = alloc::vec![root.clone()];
        while let Some(b) = stack.pop() {
            if out.insert(b.clone()) {
                stack.extend(
                    self.containment
                        .iter()
                        .filter(|c| c.parent == b)
                        .map(|c| c.child.clone()),
                );
            }
        }
        out
    }
}

fn join(set: &Origins) -> String {
    let v: Vec<&str> = set.iter().map(Ident::as_str).collect();
    v.join(", ")
}

/// Direct point-to-point link used on paths that no selected interaction
/// applies to.
pub(crate) fn implied_direct_link() -> InteractionFragment {
    let ll = |id: &str, role| Lifeline {
        id: id.into(),
        role: Some(role),
    };
    let msg = |a: &str, b: &str, label: &str, channel| Message {
        from: a.into(),
        to: b.into(),
        label: label.into(),
        channel,
    };
    InteractionFragment {
        id: "implied-direct-link".into(),
        applies: Vec::new(),
        lifelines: alloc::vec![
            ll("Sender", LifelineRole::Sender),
            ll("Medium", LifelineRole::Medium),
            ll("Receiver", LifelineRole::Receiver),
        ],
        messages: alloc::vec![
            msg("Sender", "Medium", "Quantum states", ChannelKind::Quantum),
            msg("Medium", "Receiver", "Quantum states", ChannelKind::Quantum),
            msg(
                "Receiver",
                "Sender",
                "Measurement bases",
                ChannelKind::Classical
            ),
            msg(
                "Sender",
                "Receiver",
                "Sifting result",
                ChannelKind::Classical
            ),
        ],
    }
}

/// Composes the views of a valid configuration into one architecture.
///
/// Structure fragments merge by block id: same-id blocks unify, ports union,
/// and containment must stay a forest. Process views are retained with lanes
/// bound to same-id blocks. Each selected interaction view is instantiated
/// once per path block whose medium it applies to; paths nobody covers get an
/// implied direct link. Inputs are processed in variant-id order, so the
/// result does not depend on declaration order.
pub fn compose(
    model: &OvmModel,
    config: &Configuration,
) -> Result<ComposedArchitecture, ComposeError> {
    let check = check_configuration(model, config);
    if !check.is_valid() {
        return Err(ComposeError::InvalidConfiguration(check));
    }

    let mut report = ValidationReport::new();
    let mut merged = MergedStructure::default();
    let mut processes = Vec::new();
    let mut interactions: Vec<(&Ident, &InteractionFragment)> = Vec::new();
    let mut provenance: BTreeMap<String, Origins> = BTreeMap::new();

    for vid in &config.selected {
        let variant = model.variant(vid).expect("checked configuration");
        let fragment = model.fragment(&variant.fragment).expect("validated model");
        match fragment {
            ViewFragment::Structure(s) => {
                merged.add_fragment(vid, s, &mut report);
                if s.blocks.is_empty() {
                    mark(&mut provenance, format!("structure:{}", s.id), vid);
                }
            }
            ViewFragment::Process(p) => processes.push((vid, p)),
            ViewFragment::Interaction(i) => interactions.push((vid, i)),
        }
    }
    merged.check_forest(&mut report);
    if !report.is_valid() {
        return Err(ComposeError::Conflict(report));
    }

    for (id, (_, origins)) in &merged.blocks {
        for o in origins {
            mark(&mut provenance, format!("block:{id}"), o);
        }
    }
    for ((b, p), (_, origins)) in &merged.ports {
        for o in origins {
            mark(&mut provenance, format!("port:{b}.{p}"), o);
        }
    }

    let behaviors: Vec<BoundProcess> = processes
        .iter()
        .map(|(vid, p)| {
            mark(&mut provenance, format!("process:{}", p.id), vid);
            for n in &p.nodes {
                mark(&mut provenance, format!("node:{}/{}", p.id, n.id), vid);
            }
            BoundProcess {
                variant: (*vid).clone(),
                fragment: (*p).clone(),
                lane_bindings: p
                    .lanes
                    .iter()
                    .map(|l| (l.clone(), merged.blocks.contains_key(l).then(|| l.clone())))
                    .collect(),
            }
        })
        .collect();

    let endpoints: Vec<Ident> = merged
        .blocks
        .iter()
        .filter(|(_, (b, _))| b.role == Some(BlockRole::Endpoint))
        .map(|(id, _)| id.clone())
        .collect();
    let path_ids: Vec<Ident> = merged
        .blocks
        .iter()
        .filter(|(_, (b, _))| b.role == Some(BlockRole::Path))
        .map(|(id, _)| id.clone())
        .collect();

    let mut paths: Vec<QuantumPath> = Vec::new();
    for pid in &path_ids {
        let members = merged.subtree(pid);
        let link = members
            .iter()
            .find(|b| *b != pid && merged.has_role(b, |r| matches!(r, BlockRole::Link { .. })))
            .cloned();
        let (medium, length_km) = match link.as_ref().and_then(|l| merged.blocks[l].0.role) {
            Some(BlockRole::Link { medium, length_km }) => (Some(medium), length_km),
            _ => (None, None),
        };
        let repeater = members
            .iter()
            .find(|b| merged.has_role(b, |r| *r == BlockRole::Repeater))
            .cloned();
        paths.push(QuantumPath {
            id: pid.clone(),
            label: merged.blocks[pid].0.label.clone(),
            medium,
            link,
            length_km,
            repeater,
            interactions: Vec::new(),
        });
    }

    let mut instances: Vec<InteractionInstance> = Vec::new();
    let implied = implied_direct_link();
    for path in paths.iter_mut() {
        let mut applicable: Vec<(Ident, &InteractionFragment, bool)> = interactions
            .iter()
            .filter(|(_, f)| f.applies_to(path.medium))
            .map(|(v, f)| ((*v).clone(), *f, false))
            .collect();
        if applicable.is_empty() {
            let owner = merged.blocks[&path.id]
                .1
                .iter()
                .next()
                .cloned()
                .expect("merged blocks have origins");
            applicable.push((owner, &implied, true));
        }
        for (vid, frag, is_implied) in applicable {
            let inst_id = format!("{}@{}", frag.id, path.id);
            let mut bindings = BTreeMap::new();
            for ll in &frag.lifelines {
                let bound = match ll.role {
                    Some(LifelineRole::Sender) => endpoints.first().cloned(),
                    Some(LifelineRole::Receiver) => endpoints.get(1).cloned(),
                    Some(LifelineRole::Medium) => {
                        Some(path.link.clone().unwrap_or_else(|| path.id.clone()))
                    }
                    Some(LifelineRole::Repeater) => Some(match &path.repeater {
                        Some(r) => r.clone(),
                        None => {
                            let rid = Ident::new(format!("{}-Repeater", path.id));
                            if let Some((existing, _)) = merged.blocks.get(&rid) {
                                if existing.role != Some(BlockRole::Repeater) {
                                    report.push(Diagnostic::error(
                                        Code::MergeConflict,
                                        [rid.as_str(), vid.as_str()],
                                        format!("block `{rid}` exists but is not a repeater"),
                                    ));
                                }
                            } else {
                                merged.blocks.insert(
                                    rid.clone(),
                                    (
                                        Block {
                                            id: rid.clone(),
                                            label: Some(String::from("Quantum repeater chain")),
                                            role: Some(BlockRole::Repeater),
                                        },
                                        Origins::from([vid.clone()]),
                                    ),
                                );
                                merged.containment.insert(Containment {
                                    parent: path.id.clone(),
                                    child: rid.clone(),
                                });
                                mark(&mut provenance, format!("block:{rid}"), &vid);
                            }
                            path.repeater = Some(rid.clone());
                            rid
                        }
                    }),
                    None => merged.blocks.contains_key(&ll.id).then(|| ll.id.clone()),
                };
                match bound {
                    Some(b) => {
                        bindings.insert(ll.id.clone(), b);
                    }
                    None => report.push(Diagnostic::error(
                        Code::UnboundLifeline,
                        [ll.id.as_str(), frag.id.as_str(), path.id.as_str()],
                        format!(
                            "lifeline `{}` of `{}` has no block to bind to on path `{}`",
                            ll.id, frag.id, path.id
                        ),
                    )),
                }
            }
            mark(&mut provenance, format!("interaction:{inst_id}"), &vid);
            path.interactions.push(inst_id.clone());
            instances.push(InteractionInstance {
                id: inst_id,
                variant: vid,
                path: Some(path.id.clone()),
                implied: is_implied,
                fragment: frag.clone(),
                bindings,
            });
        }
    }

    // Interactions that were never instantiated on a path.
    for (vid, frag) in &interactions {
        if instances
            .iter()
            .any(|i| !i.implied && i.fragment.id == frag.id)
        {
            continue;
        }
        let mut bindings = BTreeMap::new();
        if paths.is_empty() {
            for ll in &frag.lifelines {
                let bound = match ll.role {
                    Some(LifelineRole::Sender) => endpoints.first().cloned(),
                    Some(LifelineRole::Receiver) => endpoints.get(1).cloned(),
                    Some(_) => None,
                    None => merged.blocks.contains_key(&ll.id).then(|| ll.id.clone()),
                };
                if let Some(b) = bound {
                    bindings.insert(ll.id.clone(), b);
                }
            }
        }
        mark(&mut provenance, format!("interaction:{}", frag.id), vid);
        instances.push(InteractionInstance {
            id: String::from(frag.id.as_str()),
            variant: (*vid).clone(),
            path: None,
            implied: false,
            fragment: (*frag).clone(),
            bindings,
        });
    }
    instances.sort_by(|a, b| a.id.cmp(&b.id));

    if !report.is_valid() {
        return Err(ComposeError::Conflict(report));
    }

    let mut structure = StructureFragment {
        id: Ident::new(if model.name.is_empty() {
            "composed"
        } else {
            model.name.as_str()
        }),
        blocks: merged.blocks.values().map(|(b, _)| b.clone()).collect(),
        containment: merged.containment.iter().cloned().collect(),
        ports: merged.ports.values().map(|(p, _)| p.clone()).collect(),
    };

    let mut arch = ComposedArchitecture {
        model: model.name.clone(),
        selected: config.selected.iter().cloned().collect(),
        structure: structure.clone(),
        behaviors,
        interactions: instances,
        paths,
        interface: Default::default(),
        provenance,
    };

    let interface = derive_interfaces(&arch).map_err(ComposeError::Conflict)?;
    for port in &interface.created_ports {
        let carriers: Origins = interface
            .connectors
            .iter()
            .filter(|c| {
                (c.a.block == port.block && c.a.port == port.id)
                    || (c.b.block == port.block && c.b.port == port.id)
            })
            .flat_map(|c| c.carries.iter())
            .filter_map(|inst| arch.interactions.iter().find(|i| &i.id == inst))
            .map(|i| i.variant.clone())
            .collect();
        arch.provenance
            .insert(format!("port:{}.{}", port.block, port.id), carriers);
    }
    structure
        .ports
        .extend(interface.created_ports.iter().cloned());
    structure
        .ports
        .sort_by(|a, b| (&a.block, &a.id).cmp(&(&b.block, &b.id)));
    arch.structure = structure;
    arch.interface = interface;
    Ok(arch)
}

fn mark(provenance: &mut BTreeMap<String, Origins>, key: String, variant: &Ident) {
    provenance.entry(key).or_default().insert(variant.clone());
}
