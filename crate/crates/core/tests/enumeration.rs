//! Brute force over every variant subset of the built-in model.

use std::collections::BTreeSet;

use qkdvm_core::builtin::{self, MODEL_NAME};
use qkdvm_core::compose::{compose, propagate, VariantDecision, VpDecision};
use qkdvm_core::{check_configuration, vp_scope, ChannelKind, Configuration, OvmModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "support/variability.rs"]
mod variability;
use variability::*;

fn config(sel: &BTreeSet<String>) -> Configuration {
    Configuration::new(MODEL_NAME, sel.iter().map(String::as_str))
}

fn valid_space(m: &OvmModel) -> Vec<BTreeSet<String>> {
    let ids = all_variants(m);
    subsets(&ids).filter(|s| oracle_valid(m, s)).collect()
}

#[test]
fn check_agrees_with_oracle_on_every_subset() {
    let m = builtin::backbone();
    let ids = all_variants(&m);
    assert_eq!(ids.len(), 9);
    let mut valid = 0;
    for s in subsets(&ids) {
        let expect = oracle_valid(&m, &s);
        let got = check_configuration(&m, &config(&s)).is_valid();
        assert_eq!(got, expect, "disagreement on {s:?}");
        valid += expect as usize;
    }
    // (T, S, T+S media choices) x 3 protocols x 2 links.
    assert_eq!(valid, 18);
}

#[test]
fn accepted_configurations_respect_cardinality_in_scope() {
    let m = builtin::backbone();
    for s in valid_space(&m) {
        let scope = vp_scope(&m, &config(&s)).unwrap();
        for vp in &m.variation_points {
            let n = vp
                .variants
                .iter()
                .filter(|v| s.contains(v.id.as_str()))
                .count() as u32;
            if scope.contains(&vp.id) {
                assert!(vp.cardinality.min <= n && n <= vp.cardinality.max);
            } else {
                assert_eq!(n, 0);
            }
        }
    }
}

#[test]
fn compose_is_total_over_the_valid_space() {
    let m = builtin::backbone();
    for s in valid_space(&m) {
        let arch = compose(&m, &config(&s)).unwrap_or_else(|e| panic!("{s:?}: {e}"));

        // Provenance covers every block and node and hits every selected variant.
        for b in &arch.structure.blocks {
            assert!(
                arch.provenance.contains_key(&format!("block:{}", b.id)),
                "{}",
                b.id
            );
        }
        for p in &arch.behaviors {
            for n in &p.fragment.nodes {
                assert!(arch
                    .provenance
                    .contains_key(&format!("node:{}/{}", p.fragment.id, n.id)));
            }
        }
        let contributors: BTreeSet<&str> = arch
            .provenance
            .values()
            .flat_map(|o| o.iter().map(|v| v.as_str()))
            .collect();
        for v in &s {
            assert!(
                contributors.contains(v.as_str()),
                "{v} contributes nothing in {s:?}"
            );
        }

        // Connector ends exist, match channel, and no port is used twice.
        let mut used = BTreeSet::new();
        for c in &arch.interface.connectors {
            for end in [&c.a, &c.b] {
                let port = arch
                    .structure
                    .ports
                    .iter()
                    .find(|p| p.block == end.block && p.id == end.port)
                    .unwrap_or_else(|| panic!("dangling {end:?}"));
                assert_eq!(port.channel, c.channel);
                assert!(
                    used.insert((end.block.clone(), end.port.clone())),
                    "{end:?} reused"
                );
            }
        }
        assert!(arch
            .interface
            .connectors
            .iter()
            .any(|c| c.channel == ChannelKind::Quantum));
    }
}

fn completions<'a>(
    space: &'a [BTreeSet<String>],
    partial: &'a BTreeSet<String>,
) -> impl Iterator<Item = &'a BTreeSet<String>> {
    space.iter().filter(move |s| partial.is_subset(s))
}

fn assert_sound_and_exact(m: &OvmModel, space: &[BTreeSet<String>], partial: &BTreeSet<String>) {
    let state = propagate(m, &config(partial)).unwrap();
    let reachable: BTreeSet<&str> = completions(space, partial)
        .flat_map(|s| s.iter().map(String::as_str))
        .collect();
    for (id, d) in &state.variants {
        match d {
            VariantDecision::Excluded => assert!(
                !reachable.contains(id.as_str()),
                "{id} excluded but appears in a completion of {partial:?}"
            ),
            VariantDecision::Selected => assert!(partial.contains(id.as_str())),
            _ => {}
        }
    }
    if !reachable.is_empty() {
        // On the built-in model propagation is also complete: whatever is not
        // excluded occurs in some completion.
        for (id, d) in &state.variants {
            if *d != VariantDecision::Excluded {
                assert!(
                    reachable.contains(id.as_str()),
                    "{id} {d:?} is unreachable from {partial:?}"
                );
            }
        }
    }
    let scope = vp_scope(m, &config(partial)).unwrap();
    for (vp, d) in &state.vps {
        if *d == VpDecision::OutOfScope {
            assert!(!scope.contains(vp));
            for v in &m.vp(vp).unwrap().variants {
                assert_ne!(state.variant(&v.id), Some(VariantDecision::Open));
            }
        }
    }
}

#[test]
fn propagation_is_sound_for_random_partials() {
    let m = builtin::backbone();
    let space = valid_space(&m);
    let ids = all_variants(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        // Half the draws are sub-selections of a valid configuration, half
        // arbitrary subsets (which may have no completion at all).
        let partial: BTreeSet<String> = if rng.random_bool(0.5) {
            let base = &space[rng.random_range(0..space.len())];
            base.iter()
                .filter(|_| rng.random_bool(0.5))
                .cloned()
                .collect()
        } else {
            ids.iter()
                .filter(|_| rng.random_bool(0.3))
                .cloned()
                .collect()
        };
        assert_sound_and_exact(&m, &space, &partial);
    }
}

#[test]
fn propagation_is_sound_for_every_partial() {
    let m = builtin::backbone();
    let space = valid_space(&m);
    let ids = all_variants(&m);
    for partial in subsets(&ids) {
        assert_sound_and_exact(&m, &space, &partial);
    }
}

#[test]
fn scope_is_monotone_and_total() {
    let m = builtin::backbone();
    let ids = all_variants(&m);
    let all: BTreeSet<String> = ids.iter().cloned().collect();
    let full = vp_scope(&m, &config(&all)).unwrap();
    assert_eq!(full.len(), m.variation_points.len());
    for s in subsets(&ids) {
        let base = vp_scope(&m, &config(&s)).unwrap();
        let oracle = oracle_scope(&m, &s);
        assert_eq!(
            base.iter().map(|v| v.to_string()).collect::<BTreeSet<_>>(),
            oracle
        );
        for extra in &ids {
            let mut bigger = s.clone();
            bigger.insert(extra.clone());
            let grown = vp_scope(&m, &config(&bigger)).unwrap();
            assert!(base.is_subset(&grown));
        }
    }
}
