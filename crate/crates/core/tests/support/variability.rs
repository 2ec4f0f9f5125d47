//! Brute-force validity for OVM selections.
//!
//! Re-derives validity straight from the metamodel rules (scope by opening,
//! cardinality per in-scope VP, constraint endpoints), sharing no code with
//! `check_configuration`.

use std::collections::BTreeSet;

use qkdvm_core::ovm::{ConstraintKind, Presence};
use qkdvm_core::OvmModel;

/// VPs in scope: roots plus whatever a selected, in-scope variant opens.
pub fn oracle_scope(m: &OvmModel, sel: &BTreeSet<String>) -> BTreeSet<String> {
    let opened: BTreeSet<&str> = m
        .variation_points
        .iter()
        .flat_map(|vp| vp.variants.iter())
        .flat_map(|v| v.opens.iter().map(|o| o.as_str()))
        .collect();
    let mut scope: BTreeSet<String> = m
        .variation_points
        .iter()
        .filter(|vp| !opened.contains(vp.id.as_str()))
        .map(|vp| vp.id.to_string())
        .collect();
    loop {
        let before = scope.len();
        for vp in &m.variation_points {
            if !scope.contains(vp.id.as_str()) {
                continue;
            }
            for v in vp.variants.iter().filter(|v| sel.contains(v.id.as_str())) {
                scope.extend(v.opens.iter().map(|o| o.to_string()));
            }
        }
        if scope.len() == before {
            return scope;
        }
    }
}

/// Validity straight from the metamodel rules.
pub fn oracle_valid(m: &OvmModel, sel: &BTreeSet<String>) -> bool {
    let scope = oracle_scope(m, sel);
    for vp in &m.variation_points {
        let n = vp
            .variants
            .iter()
            .filter(|v| sel.contains(v.id.as_str()))
            .count();
        if !scope.contains(vp.id.as_str()) {
            if n > 0 {
                return false;
            }
            continue;
        }
        let ok = (n as u32 >= vp.cardinality.min && n as u32 <= vp.cardinality.max)
            || (n == 0 && vp.presence == Presence::Optional);
        if !ok {
            return false;
        }
    }
    m.constraints.iter().all(|c| {
        if !sel.contains(c.from.as_str()) {
            return true;
        }
        let hit = match m.vp(&c.to) {
            Some(vp) => vp.variants.iter().any(|v| sel.contains(v.id.as_str())),
            None => sel.contains(c.to.as_str()),
        };
        match c.kind {
            ConstraintKind::Requires => hit,
            ConstraintKind::Excludes => !hit,
        }
    })
}

pub fn all_variants(m: &OvmModel) -> Vec<String> {
    m.variants().map(|(_, v)| v.id.to_string()).collect()
}

pub fn subsets(ids: &[String]) -> impl Iterator<Item = BTreeSet<String>> + '_ {
    (0u32..1 << ids.len()).map(move |mask| {
        ids.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect()
    })
}
