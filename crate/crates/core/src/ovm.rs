//! The orthogonal variability metamodel.
//!
//! Variation points group variants; a variant may open child variation
//! points, forming a forest rooted at the VPs nobody opens. Every variant is
//! bound to exactly one view fragment, and all variants of one VP bind
//! fragments of that VP's view kind.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::compose::Configuration;
use crate::diag::{Code, Diagnostic, ValidationReport};
use crate::fragment::{validate_fragment, ViewFragment, ViewKind};
use crate::ident::Ident;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Presence {
    #[default]
    Mandatory,
    Optional,
}

impl Presence {
    pub fn as_str(self) -> &'static str {
        match self {
            Presence::Mandatory => "mandatory",
            Presence::Optional => "optional",
        }
    }
}

/// Inclusive selection range over a VP's child variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cardinality {
    pub min: u32,
    pub max: u32,
}

impl Cardinality {
    pub const fn new(min: u32, max: u32) -> Self {
        Cardinality { min, max }
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.min as usize..=self.max as usize).contains(&n)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub id: Ident,
    pub label: String,
    pub fragment: Ident,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub opens: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationPoint {
    pub id: Ident,
    pub label: String,
    pub presence: Presence,
    pub cardinality: Cardinality,
    pub view_kind: ViewKind,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Requires,
    Excludes,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Requires => "requires",
            ConstraintKind::Excludes => "excludes",
        }
    }
}

/// `from` is a variant; `to` is a variant or a variation point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDependency {
    pub kind: ConstraintKind,
    pub from: Ident,
    pub to: Ident,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OvmModel {
    pub name: String,
    pub variation_points: Vec<VariationPoint>,
    pub constraints: Vec<ConstraintDependency>,
    /// Fragment catalog in declaration order; ids are unique.
    pub fragments: Vec<ViewFragment>,
}

impl OvmModel {
    pub fn new(name: impl Into<String>) -> Self {
        OvmModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn vp(&self, id: &str) -> Option<&VariationPoint> {
        self.variation_points.iter().find(|vp| vp.id == id)
    }

    pub fn variants(&self) -> impl Iterator<Item = (&VariationPoint, &Variant)> {
        self.variation_points
            .iter()
            .flat_map(|vp| vp.variants.iter().map(move |v| (vp, v)))
    }

    pub fn variant(&self, id: &str) -> Option<&Variant> {
        self.variants().map(|(_, v)| v).find(|v| v.id == id)
    }

    /// The VP that owns variant `id`.
    pub fn owner_of(&self, id: &str) -> Option<&VariationPoint> {
        self.variants().find(|(_, v)| v.id == id).map(|(vp, _)| vp)
    }

    pub fn fragment(&self, id: &str) -> Option<&ViewFragment> {
        self.fragments.iter().find(|f| f.id() == id)
    }

    /// The variant that opens VP `id`, if any.
    pub fn opener_of(&self, id: &str) -> Option<&Variant> {
        self.variants()
            .map(|(_, v)| v)
            .find(|v| v.opens.iter().any(|o| o == id))
    }

    /// VPs not opened by any variant, in declaration order.
    pub fn root_vps(&self) -> Vec<&Ident> {
        let opened: BTreeSet<&str> = self
            .variants()
            .flat_map(|(_, v)| v.opens.iter().map(Ident::as_str))
            .collect();
        self.variation_points
            .iter()
            .filter(|vp| !opened.contains(vp.id.as_str()))
            .map(|vp| &vp.id)
            .collect()
    }

    pub fn variant_count(&self) -> usize {
        self.variation_points
            .iter()
            .map(|vp| vp.variants.len())
            .sum()
    }
}

/// Variant id that the caller referenced but the model does not define.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownVariant(pub Ident);

impl fmt::Display for UnknownVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown variant `{}`", self.0)
    }
}

pub fn validate_model(model: &OvmModel) -> ValidationReport {
    let mut report = ValidationReport::new();

    if !model.name.is_empty() && !crate::ident::is_valid_ident(&model.name) {
        report.push(Diagnostic::error(
            Code::InvalidIdentifier,
            [model.name.as_str()],
            format!("model name `{}` is not a valid identifier", model.name),
        ));
    }

    // VPs and variants share one namespace, fragments have their own.
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let ids = model
        .variation_points
        .iter()
        .map(|vp| &vp.id)
        .chain(model.variants().map(|(_, v)| &v.id));
    for id in ids {
        check_ident(id, &mut report);
        if !seen.insert(id.as_str()) {
            report.push(Diagnostic::error(
                Code::DuplicateId,
                [id.as_str()],
                format!("`{id}` is defined more than once"),
            ));
        }
    }
    let mut frag_ids: BTreeSet<&str> = BTreeSet::new();
    for f in &model.fragments {
        check_ident(f.id(), &mut report);
        if !frag_ids.insert(f.id().as_str()) {
            report.push(Diagnostic::error(
                Code::DuplicateId,
                [f.id().as_str()],
                format!("fragment `{}` is defined more than once", f.id()),
            ));
        }
    }

    for vp in &model.variation_points {
        let n = vp.variants.len();
        if n == 0 {
            report.push(Diagnostic::error(
                Code::EmptyVariationPoint,
                [vp.id.as_str()],
                format!("variation point `{}` has no variants", vp.id),
            ));
        }
        let c = vp.cardinality;
        if c.min < 1 || c.min > c.max || c.max as usize > n {
            report.push(Diagnostic::error(
                Code::CardinalityInvalid,
                [vp.id.as_str()],
                format!(
                    "cardinality {c} of `{}` must satisfy 1 <= min <= max <= {n}",
                    vp.id
                ),
            ));
        }
        for v in &vp.variants {
            match model.fragment(&v.fragment) {
                None => report.push(Diagnostic::error(
                    Code::DanglingReference,
                    [v.id.as_str(), v.fragment.as_str()],
                    format!("variant `{}` binds unknown fragment `{}`", v.id, v.fragment),
                )),
                Some(f) if f.kind() != vp.view_kind => report.push(Diagnostic::error(
                    Code::ViewKindMismatch,
                    [v.id.as_str(), v.fragment.as_str(), vp.id.as_str()],
                    format!(
                        "variant `{}` binds {} fragment `{}` but `{}` is documented with {} views",
                        v.id,
                        f.kind(),
                        v.fragment,
                        vp.id,
                        vp.view_kind
                    ),
                )),
                Some(_) => {}
            }
            for o in &v.opens {
                if model.vp(o).is_none() {
                    report.push(Diagnostic::error(
                        Code::DanglingReference,
                        [v.id.as_str(), o.as_str()],
                        format!("variant `{}` opens unknown variation point `{o}`", v.id),
                    ));
                }
            }
        }
    }

    // Each VP opened at most once.
    let mut openers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (_, v) in model.variants() {
        for o in &v.opens {
            openers.entry(o.as_str()).or_default().push(v.id.as_str());
        }
    }
    for (vp, by) in &openers {
        if by.len() > 1 && model.vp(vp).is_some() {
            report.push(Diagnostic::error(
                Code::MultipleOpeners,
                core::iter::once(*vp).chain(by.iter().copied()),
                format!("variation point `{vp}` is opened by {} variants", by.len()),
            ));
        }
    }

    for cycle in hierarchy_cycles(model) {
        report.push(Diagnostic::error(
            Code::HierarchyCycle,
            cycle.iter().map(|s| s.as_str()),
            format!(
                "variation points {} open each other in a cycle",
                cycle.join(" -> ")
            ),
        ));
    }

    for c in &model.constraints {
        if c.from == c.to {
            report.push(Diagnostic::error(
                Code::SelfConstraint,
                [c.from.as_str()],
                format!(
                    "constraint `{} {} {}` relates a variant to itself",
                    c.from,
                    c.kind.as_str(),
                    c.to
                ),
            ));
        }
        if model.variant(&c.from).is_none() {
            report.push(Diagnostic::error(
                Code::DanglingReference,
                [c.from.as_str()],
                format!("constraint source `{}` is not a variant", c.from),
            ));
        }
        if model.variant(&c.to).is_none() && model.vp(&c.to).is_none() {
            report.push(Diagnostic::error(
                Code::DanglingReference,
                [c.to.as_str()],
                format!(
                    "constraint target `{}` is neither a variant nor a variation point",
                    c.to
                ),
            ));
        }
    }

    for f in &model.fragments {
        report.extend(validate_fragment(f));
    }

    report
}

fn check_ident(id: &Ident, report: &mut ValidationReport) {
    if !id.is_valid() {
        report.push(Diagnostic::error(
            Code::InvalidIdentifier,
            [id.as_str()],
            format!("`{id}` is not a valid identifier (letters, digits, `_`, `-`)"),
        ));
    }
}

/// Cycles in the VP → child VP graph, each rotated to start at its smallest
/// member so the same cycle is reported once.
fn hierarchy_cycles(model: &OvmModel) -> Vec<Vec<String>> {
    fn children<'m>(model: &'m OvmModel, vp: &'m VariationPoint) -> Vec<&'m str> {
        vp.variants
            .iter()
            .flat_map(|v| v.opens.iter().map(Ident::as_str))
            .filter(|o| model.vp(o).is_some())
            .collect()
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark: BTreeMap<&str, Mark> = model
        .variation_points
        .iter()
        .map(|vp| (vp.id.as_str(), Mark::White))
        .collect();
    let mut found: BTreeSet<Vec<String>> = BTreeSet::new();

    fn visit<'a>(
        model: &'a OvmModel,
        id: &'a str,
        mark: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
        found: &mut BTreeSet<Vec<String>>,
    ) {
        mark.insert(id, Mark::Grey);
        stack.push(id);
        if let Some(vp) = model.vp(id) {
            for c in children(model, vp) {
                match mark.get(c).copied().unwrap_or(Mark::Black) {
                    Mark::White => visit(model, c, mark, stack, found),
                    Mark::Grey => {
                        let pos = stack.iter().position(|s| *s == c).unwrap_or(0);
                        let mut cyc: Vec<String> =
                            stack[pos..].iter().map(|s| String::from(*s)).collect();
                        let min = cyc
                            .iter()
                            .enumerate()
                            .min_by(|a, b| a.1.cmp(b.1))
                            .map(|(i, _)| i)
                            .unwrap_or(0);
                        cyc.rotate_left(min);
                        found.insert(cyc);
                    }
                    Mark::Black => {}
                }
            }
        }
        stack.pop();
        mark.insert(id, Mark::Black);
    }

    for vp in &model.variation_points {
        if mark.get(vp.id.as_str()) == Some(&Mark::White) {
            let mut stack = Vec::new();
            visit(model, vp.id.as_str(), &mut mark, &mut stack, &mut found);
        }
    }
    found.into_iter().collect()
}

/// VPs in scope for a selection: the roots plus every VP opened by a selected
/// variant whose own VP is in scope.
pub fn vp_scope(
    model: &OvmModel,
    selection: &Configuration,
) -> Result<BTreeSet<Ident>, UnknownVariant> {
    scope_of(model, selection.selected.iter().map(Ident::as_str))
}

pub(crate) fn scope_of<'a>(
    model: &OvmModel,
    selected: impl IntoIterator<Item = &'a str>,
) -> Result<BTreeSet<Ident>, UnknownVariant> {
    let mut chosen = BTreeSet::new();
    for s in selected {
        if model.variant(s).is_none() {
            return Err(UnknownVariant(Ident::new(s)));
        }
        chosen.insert(s);
    }
    let mut scope: BTreeSet<Ident> = BTreeSet::new();
    let mut queue: Vec<&Ident> = model.root_vps();
    while let Some(id) = queue.pop() {
        if !scope.insert(id.clone()) {
            continue;
        }
        if let Some(vp) = model.vp(id) {
            for v in vp
                .variants
                .iter()
                .filter(|v| chosen.contains(v.id.as_str()))
            {
                queue.extend(v.opens.iter().filter(|o| model.vp(o).is_some()));
            }
        }
    }
    Ok(scope)
}
