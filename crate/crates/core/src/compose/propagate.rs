use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::compose::Configuration;
use crate::ident::Ident;
use crate::ovm::{scope_of, ConstraintKind, OvmModel, Presence, UnknownVariant, VariationPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantDecision {
    Selected,
    /// Cannot appear in any valid completion of the current selection.
    Excluded,
    /// Selectable now.
    Open,
    /// Its variation point is not in scope yet but may still be opened.
    Dormant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VpDecision {
    Resolved,
    Unresolved,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecisionState {
    pub variants: BTreeMap<Ident, VariantDecision>,
    pub vps: BTreeMap<Ident, VpDecision>,
    /// Why each excluded variant was excluded.
    pub reasons: BTreeMap<Ident, String>,
}

impl DecisionState {
    pub fn variant(&self, id: &str) -> Option<VariantDecision> {
        self.variants.get(id).copied()
    }

    pub fn vp(&self, id: &str) -> Option<VpDecision> {
        self.vps.get(id).copied()
    }

    pub fn excluded(&self) -> impl Iterator<Item = &Ident> {
        self.variants
            .iter()
            .filter(|(_, d)| **d == VariantDecision::Excluded)
            .map(|(id, _)| id)
    }
}

struct Propagator<'m> {
    model: &'m OvmModel,
    forced: BTreeSet<&'m str>,
    excluded: BTreeMap<&'m str, String>,
}

impl<'m> Propagator<'m> {
    fn exclude(&mut self, id: &'m str, why: impl FnOnce() -> String) -> bool {
        if self.excluded.contains_key(id) {
            return false;
        }
        self.excluded.insert(id, why());
        true
    }

    fn vp_has_forced(&self, vp: &VariationPoint) -> bool {
        vp.variants
            .iter()
            .any(|v| self.forced.contains(v.id.as_str()))
    }

    /// Variants that every valid completion must contain: the selection, the
    /// openers of their variation points, and variant targets of requires.
    fn close_forced(&mut self) {
        loop {
            let mut add: Vec<&'m str> = Vec::new();
            for &v in &self.forced {
                if let Some(vp) = self.model.owner_of(v) {
                    if let Some(op) = self.model.opener_of(&vp.id) {
                        add.push(op.id.as_str());
                    }
                }
                for c in &self.model.constraints {
                    if c.kind == ConstraintKind::Requires
                        && c.from == v
                        && self.model.variant(&c.to).is_some()
                    {
                        add.push(c.to.as_str());
                    }
                }
            }
            let before = self.forced.len();
            self.forced.extend(add);
            if self.forced.len() == before {
                break;
            }
        }
    }

    /// VPs that could still be in scope: roots, or opened by a non-excluded
    /// variant of a reachable VP.
    fn reachable_vps(&self) -> BTreeSet<&'m str> {
        let mut out = BTreeSet::new();
        let mut queue: Vec<&'m Ident> = self.model.root_vps();
        while let Some(id) = queue.pop() {
            if !out.insert(id.as_str()) {
                continue;
            }
            if let Some(vp) = self.model.vp(id) {
                for v in &vp.variants {
                    if !self.excluded.contains_key(v.id.as_str()) {
                        queue.extend(v.opens.iter());
                    }
                }
            }
        }
        out
    }

    fn step(&mut self) -> bool {
        let m = self.model;
        let mut changed = false;

        for c in &m.constraints {
            let from = c.from.as_str();
            let to_vp = m.vp(&c.to);
            match c.kind {
                ConstraintKind::Excludes => {
                    if self.forced.contains(from) {
                        match to_vp {
                            Some(vp) => {
                                for v in &vp.variants {
                                    changed |= self.exclude(v.id.as_str(), || {
                                        format!("`{from}` excludes variation point `{}`", vp.id)
                                    });
                                }
                            }
                            None => {
                                changed |= self.exclude(c.to.as_str(), || {
                                    format!("`{from}` excludes `{}`", c.to)
                                })
                            }
                        }
                    }
                    let target_forced = match to_vp {
                        Some(vp) => self.vp_has_forced(vp),
                        None => self.forced.contains(c.to.as_str()),
                    };
                    if target_forced {
                        changed |= self.exclude(from, || {
                            format!("`{from}` excludes `{}`, which is required", c.to)
                        });
                    }
                }
                ConstraintKind::Requires => {
                    let impossible = match to_vp {
                        Some(vp) => vp
                            .variants
                            .iter()
                            .all(|v| self.excluded.contains_key(v.id.as_str())),
                        None => self.excluded.contains_key(c.to.as_str()),
                    };
                    if impossible {
                        changed |= self.exclude(from, || {
                            format!("`{from}` requires `{}`, which is excluded", c.to)
                        });
                    }
                }
            }
        }

        for vp in &m.variation_points {
            let forced_here = vp
                .variants
                .iter()
                .filter(|v| self.forced.contains(v.id.as_str()))
                .count();
            if forced_here >= vp.cardinality.max as usize {
                for v in &vp.variants {
                    if !self.forced.contains(v.id.as_str()) {
                        changed |= self.exclude(v.id.as_str(), || {
                            format!(
                                "`{}` already has {} selection(s)",
                                vp.id, vp.cardinality.max
                            )
                        });
                    }
                }
            }
            let available = vp
                .variants
                .iter()
                .filter(|v| !self.excluded.contains_key(v.id.as_str()))
                .count();
            if available < vp.cardinality.min as usize {
                match vp.presence {
                    // Being in scope would need at least `min` choices.
                    Presence::Mandatory => {
                        if let Some(op) = m.opener_of(&vp.id) {
                            changed |= self.exclude(op.id.as_str(), || {
                                format!("opening `{}` cannot be completed", vp.id)
                            });
                        }
                    }
                    Presence::Optional => {
                        for v in &vp.variants {
                            changed |= self.exclude(v.id.as_str(), || {
                                format!("`{}` cannot reach its minimum selection", vp.id)
                            });
                        }
                    }
                }
            }
        }

        let reachable = self.reachable_vps();
        for vp in &m.variation_points {
            if !reachable.contains(vp.id.as_str()) {
                for v in &vp.variants {
                    changed |= self.exclude(v.id.as_str(), || {
                        format!("`{}` can no longer be brought into scope", vp.id)
                    });
                }
            }
        }

        changed
    }
}

/// Derives per-variant and per-VP decision states for a partial selection.
///
/// Exclusion is sound: a variant is marked excluded only when no valid
/// superset of the selection contains it.
pub fn propagate(
    model: &OvmModel,
    partial: &Configuration,
) -> Result<DecisionState, UnknownVariant> {
    let scope = scope_of(model, partial.selected.iter().map(Ident::as_str))?;

    let mut p = Propagator {
        model,
        forced: partial
            .selected
            .iter()
            .filter_map(|id| model.variant(id).map(|v| v.id.as_str()))
            .collect(),
        excluded: BTreeMap::new(),
    };
    p.close_forced();
    while p.step() {}

    let mut state = DecisionState::default();
    for vp in &model.variation_points {
        let in_scope = scope.contains(&vp.id);
        let count = vp
            .variants
            .iter()
            .filter(|v| partial.contains(&v.id))
            .count();
        let vp_state = if !in_scope {
            VpDecision::OutOfScope
        } else if (count == 0 && vp.presence == Presence::Optional)
            || vp.cardinality.contains(count)
        {
            VpDecision::Resolved
        } else {
            VpDecision::Unresolved
        };
        state.vps.insert(vp.id.clone(), vp_state);

        for v in &vp.variants {
            let d = if partial.contains(&v.id) {
                VariantDecision::Selected
            } else if let Some(why) = p.excluded.get(v.id.as_str()) {
                state.reasons.insert(v.id.clone(), why.clone());
                VariantDecision::Excluded
            } else if in_scope {
                VariantDecision::Open
            } else {
                VariantDecision::Dormant
            };
            state.variants.insert(v.id.clone(), d);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn run(ids: &[&str]) -> DecisionState {
        let m = builtin::backbone();
        propagate(
            &m,
            &Configuration::new(builtin::MODEL_NAME, ids.iter().copied()),
        )
        .unwrap()
    }

    #[test]
    fn satellite_opens_free_space() {
        let s = run(&["Satellite-based"]);
        assert_eq!(s.vp("Free-Space"), Some(VpDecision::Unresolved));
        assert_eq!(s.variant("Single"), Some(VariantDecision::Open));
        assert_eq!(s.vp("Medium"), Some(VpDecision::Resolved));
        assert_eq!(s.variant("Terrestrial"), Some(VariantDecision::Open));
    }

    #[test]
    fn protocol_saturation() {
        let s = run(&["BB84"]);
        assert_eq!(s.variant("MDI"), Some(VariantDecision::Excluded));
        assert_eq!(s.variant("Ekert"), Some(VariantDecision::Excluded));
        assert!(s.reasons["MDI"].contains("QKD-Protocol"));
        assert_eq!(s.variant("BB84"), Some(VariantDecision::Selected));
    }

    #[test]
    fn empty_selection() {
        let s = run(&[]);
        let m = builtin::backbone();
        for root in m.root_vps() {
            for v in &m.vp(root).unwrap().variants {
                assert_eq!(s.variant(&v.id), Some(VariantDecision::Open), "{}", v.id);
            }
            assert_eq!(s.vp(root), Some(VpDecision::Unresolved));
        }
        assert_eq!(s.vp("Free-Space"), Some(VpDecision::OutOfScope));
        assert_eq!(s.variant("Single"), Some(VariantDecision::Dormant));
    }

    #[test]
    fn nested_selection_forces_its_opener() {
        // Picking the only Free-Space variant implies Satellite-based; with
        // Medium at [1..2] the terrestrial sibling stays open.
        let s = run(&["Single"]);
        assert_eq!(s.variant("Satellite-based"), Some(VariantDecision::Open));
        assert_eq!(s.variant("Terrestrial"), Some(VariantDecision::Open));
    }

    #[test]
    fn unknown_id_is_rejected() {
        let m = builtin::backbone();
        let err = propagate(&m, &Configuration::new(builtin::MODEL_NAME, ["B92"])).unwrap_err();
        assert_eq!(err.0, "B92");
    }
}
