use std::collections::BTreeSet;

use qkdvm_core::builtin::{self, CASE_STUDY, MODEL_NAME};
use qkdvm_core::compose::{ComposeError, ComposedArchitecture, ARCHITECTURE_SCHEMA};
use qkdvm_core::fragment::{LifelineRole, MediumKind, NodeKind};
use qkdvm_core::text::parse_model;
use qkdvm_core::*;

fn case_study() -> ComposedArchitecture {
    compose(&builtin::backbone(), &builtin::case_study()).unwrap()
}

fn quantum_connectors<'a>(a: &'a ComposedArchitecture, path: &'a str) -> usize {
    a.connectors_in_path(path)
        .filter(|c| c.channel == ChannelKind::Quantum)
        .count()
}

#[test]
fn case_study_has_two_quantum_paths() {
    let a = case_study();
    let paths: Vec<&str> = a.quantum_paths().map(|p| p.id.as_str()).collect();
    assert_eq!(paths, ["SatellitePath", "TerrestrialPath"]);

    let sat = &a.paths[0];
    assert_eq!(sat.medium, Some(MediumKind::FreeSpace));
    assert_eq!(sat.repeater, None);
    assert_eq!(sat.interactions, ["implied-direct-link@SatellitePath"]);

    let fibre = &a.paths[1];
    assert_eq!(fibre.medium, Some(MediumKind::Fiber));
    assert_eq!(fibre.length_km, Some(100.0));
    assert_eq!(fibre.repeater.as_deref(), Some("TerrestrialPath-Repeater"));
    assert_eq!(fibre.interactions, ["qlink-swapping@TerrestrialPath"]);
    assert_eq!(
        a.provenance["block:TerrestrialPath-Repeater"],
        BTreeSet::from([Ident::new("QR")])
    );

    let bb84 = &a.behaviors[0];
    assert_eq!(a.behaviors.len(), 1);
    assert_eq!(bb84.fragment.id, "bb84");
    assert_eq!(
        bb84.lane_bindings[&Ident::new("Alice")],
        Some(Ident::new("Alice"))
    );
    assert_eq!(
        bb84.lane_bindings[&Ident::new("Bob")],
        Some(Ident::new("Bob"))
    );
}

#[test]
fn case_study_interface_matches_the_figure() {
    let a = case_study();
    assert!(quantum_connectors(&a, "SatellitePath") >= 1);
    assert!(quantum_connectors(&a, "TerrestrialPath") >= 1);
    let has = |x: &str, y: &str, ch: ChannelKind| {
        a.interface.connectors.iter().any(|c| {
            c.channel == ch
                && ((c.a.block == x && c.b.block == y) || (c.a.block == y && c.b.block == x))
        })
    };
    assert!(has("Alice", "Satellite", ChannelKind::Quantum));
    assert!(has("Alice", "FibreLink", ChannelKind::Quantum));
    assert!(has("Alice", "Bob", ChannelKind::Classical));
    // Heralds from the repeater are classical.
    assert!(has(
        "Alice",
        "TerrestrialPath-Repeater",
        ChannelKind::Classical
    ));
    for c in &a.interface.connectors {
        assert!(c
            .carries
            .iter()
            .all(|i| a.interactions.iter().any(|x| &x.id == i)));
    }
}

#[test]
fn created_port_names_are_channel_counters() {
    let a = case_study();
    let alice: Vec<&str> = a
        .structure
        .ports_of("Alice")
        .map(|p| p.id.as_str())
        .collect();
    assert_eq!(
        alice,
        ["classical_1", "classical_2", "quantum_1", "quantum_2"]
    );
    assert_eq!(a.interface.created_ports.len(), a.structure.ports.len());
}

#[test]
fn exports_are_byte_stable() {
    let first = export_architecture(&case_study(), ExportFormat::Json);
    let dot = export_architecture(&case_study(), ExportFormat::Dot);
    for _ in 0..10 {
        assert_eq!(
            export_architecture(&case_study(), ExportFormat::Json),
            first
        );
        assert_eq!(export_architecture(&case_study(), ExportFormat::Dot), dot);
    }
    assert!(first.ends_with("}\n"));
}

#[test]
fn json_export_round_trips() {
    let a = case_study();
    let text = export_architecture(&a, ExportFormat::Json);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], ARCHITECTURE_SCHEMA);
    let back: ComposedArchitecture = serde_json::from_value(v).unwrap();
    assert_eq!(back, a);
    assert_eq!(export_architecture(&back, ExportFormat::Json), text);
}

#[test]
fn json_keys_are_sorted() {
    fn check(v: &serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                let keys: Vec<&String> = m.keys().collect();
                let mut sorted = keys.clone();
                sorted.sort();
                assert_eq!(keys, sorted);
                m.values().for_each(check);
            }
            serde_json::Value::Array(a) => a.iter().for_each(check),
            _ => {}
        }
    }
    let text = export_architecture(&case_study(), ExportFormat::Json);
    // Re-read preserving order as written.
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    check(&v);
}

#[test]
fn empty_architecture_exports_empty_collections() {
    let text = export_architecture(&ComposedArchitecture::default(), ExportFormat::Json);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["interface"]["connectors"], serde_json::json!([]));
    assert_eq!(v["structure"]["blocks"], serde_json::json!([]));
    assert_eq!(v["paths"], serde_json::json!([]));
    let dot = export_architecture(&ComposedArchitecture::default(), ExportFormat::Dot);
    assert!(dot.starts_with("digraph \"architecture\" {"));
}

#[test]
fn dot_has_clusters_and_channel_labels() {
    let dot = export_architecture(&case_study(), ExportFormat::Dot);
    assert!(dot.contains("subgraph \"cluster_TerrestrialPath\""));
    assert!(dot.contains("label=\"quantum\""));
    assert!(dot.contains("label=\"classical\""));
    assert_eq!(dot.matches('{').count(), dot.matches('}').count());
}

#[test]
fn invalid_configurations_do_not_compose() {
    let m = builtin::backbone();
    for sel in [
        &[][..],
        &["Satellite-based", "BB84", "QR"][..],
        &["Terrestrial", "Optical-fibre", "BB84", "MDI", "QR"][..],
    ] {
        let err = compose(&m, &Configuration::new(MODEL_NAME, sel.iter().copied())).unwrap_err();
        assert!(matches!(err, ComposeError::InvalidConfiguration(_)));
    }
}

const TINY: &str = r#"
model tiny {
  vp Shape "Shape" kind=structure cardinality=[1..1] {
    variant Only "Only" fragment=s
  }
  fragment structure s {
    block Root "Root"
    block Leaf role=endpoint
    part Root -> Leaf
    port Leaf q channel=quantum direction=out
  }
}
"#;

#[test]
fn single_variant_composition_is_its_fragment() {
    let m = parse_model(TINY).unwrap();
    let a = compose(&m, &Configuration::new("tiny", ["Only"])).unwrap();
    let ViewFragment::Structure(s) = &m.fragments[0] else {
        unreachable!()
    };
    let mut blocks = s.blocks.clone();
    blocks.sort_by(|x, y| x.id.cmp(&y.id));
    assert_eq!(a.structure.blocks, blocks);
    assert_eq!(a.structure.containment, s.containment);
    assert_eq!(a.structure.ports, s.ports);
    assert!(a.interface.connectors.is_empty());
    assert!(a.interactions.is_empty() && a.behaviors.is_empty() && a.paths.is_empty());
}

fn three_fragment_model(order: &[usize]) -> OvmModel {
    let vps = [
        "vp A \"A\" kind=structure cardinality=[1..1] { variant a \"a\" fragment=fa }",
        "vp B \"B\" kind=structure cardinality=[1..1] { variant b \"b\" fragment=fb }",
        "vp L \"L\" kind=interaction cardinality=[1..1] { variant l \"l\" fragment=fl }",
    ];
    let frags = [
        "fragment structure fa { block Net \"Network\"\n block X role=endpoint\n part Net -> X\n port X c0 channel=classical\n port X q0 channel=quantum }",
        "fragment structure fb { block Net\n block Y role=endpoint\n block P role=path\n block W role=link medium=fiber length=5\n part Net -> Y\n part Net -> P\n part P -> W }",
        "fragment interaction fl { lifeline S role=sender\n lifeline M role=medium\n lifeline R role=receiver\n message S -> M \"q\" channel=quantum\n message M -> R \"q\" channel=quantum\n message R -> S \"c\" channel=classical }",
    ];
    let mut text = String::from("model perm {\n");
    for &i in order {
        text.push_str(vps[i]);
        text.push('\n');
    }
    for &i in order.iter().rev() {
        text.push_str(frags[i]);
        text.push('\n');
    }
    text.push('}');
    parse_model(&text).unwrap()
}

#[test]
fn composition_ignores_declaration_order() {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let cfg = Configuration::new("perm", ["a", "b", "l"]);
    let reference = export_architecture(
        &compose(&three_fragment_model(&perms[0]), &cfg).unwrap(),
        ExportFormat::Json,
    );
    for p in &perms[1..] {
        let a = compose(&three_fragment_model(p), &cfg).unwrap();
        assert_eq!(
            export_architecture(&a, ExportFormat::Json),
            reference,
            "order {p:?}"
        );
    }
    let a = compose(&three_fragment_model(&perms[0]), &cfg).unwrap();
    // The declared classical port on X is reused; the rest are created.
    let x_ports: BTreeSet<&str> = a
        .interface
        .connectors
        .iter()
        .flat_map(|c| [&c.a, &c.b])
        .filter(|e| e.block == "X")
        .map(|e| e.port.as_str())
        .collect();
    assert_eq!(x_ports, BTreeSet::from(["c0", "q0"]));
    assert_eq!(
        a.provenance["block:Net"],
        BTreeSet::from([Ident::new("a"), Ident::new("b")])
    );
}

#[test]
fn two_disjoint_links_need_two_connectors() {
    let m = parse_model(
        r#"model pairs {
  vp S "S" kind=structure cardinality=[1..1] { variant s "s" fragment=blocks }
  vp I "I" kind=interaction cardinality=[1..1] { variant i "i" fragment=links }
  fragment structure blocks { block A
 block B
 block C
 block D }
  fragment interaction links { lifeline A
 lifeline B
 lifeline C
 lifeline D
 message A -> B "ab" channel=quantum
 message C -> D "cd" channel=quantum }
}"#,
    )
    .unwrap();
    let a = compose(&m, &Configuration::new("pairs", ["s", "i"])).unwrap();
    assert_eq!(a.interface.connectors.len(), 2);
    let ends: BTreeSet<(String, String)> = a
        .interface
        .connectors
        .iter()
        .flat_map(|c| [&c.a, &c.b])
        .map(|e| (e.block.to_string(), e.port.to_string()))
        .collect();
    assert_eq!(ends.len(), 4);
    // Ports created the first time round are reused.
    let again = derive_interfaces(&a).unwrap();
    assert_eq!(again.connectors, a.interface.connectors);
    assert!(again.created_ports.is_empty());
}

#[test]
fn no_interactions_no_connectors() {
    let m = parse_model(TINY).unwrap();
    let a = compose(&m, &Configuration::new("tiny", ["Only"])).unwrap();
    assert_eq!(derive_interfaces(&a).unwrap().connectors, vec![]);
}

#[test]
fn quantum_message_onto_classical_only_ports() {
    let m = parse_model(
        r#"model mismatch {
  vp S "S" kind=structure cardinality=[1..1] { variant s "s" fragment=blocks }
  vp I "I" kind=interaction cardinality=[1..1] { variant i "i" fragment=link }
  fragment structure blocks { block A
 block B
 port A c channel=classical }
  fragment interaction link { lifeline A
 lifeline B
 message A -> B "photons" channel=quantum }
}"#,
    )
    .unwrap();
    let err = compose(&m, &Configuration::new("mismatch", ["s", "i"])).unwrap_err();
    let ComposeError::Conflict(r) = err else {
        panic!("{err}")
    };
    assert!(r.has_code(Code::ChannelMismatch));
    assert!(r.find(Code::ChannelMismatch, "A").is_some());
}

#[test]
fn contradictory_ports_conflict_with_both_origins() {
    let m = parse_model(
        r#"model clash {
  vp P "P" kind=structure cardinality=[2..2] {
    variant one "one" fragment=f1
    variant two "two" fragment=f2
  }
  fragment structure f1 { block Box
 port Box p channel=quantum }
  fragment structure f2 { block Box
 port Box p channel=classical }
}"#,
    )
    .unwrap();
    let err = compose(&m, &Configuration::new("clash", ["one", "two"])).unwrap_err();
    let r = err.report();
    let d = r.find(Code::MergeConflict, "Box.p").expect("port conflict");
    assert!(d.subjects.contains(&"one".to_string()) && d.subjects.contains(&"two".to_string()));
}

#[test]
fn merged_containment_must_stay_a_forest() {
    let m = parse_model(
        r#"model tree {
  vp P "P" kind=structure cardinality=[2..2] {
    variant one "one" fragment=f1
    variant two "two" fragment=f2
  }
  fragment structure f1 { block X
 block Y
 part X -> Y }
  fragment structure f2 { block X
 block Y
 part Y -> X }
}"#,
    )
    .unwrap();
    let err = compose(&m, &Configuration::new("tree", ["one", "two"])).unwrap_err();
    assert!(err.report().has_code(Code::MergeConflict));
}

#[test]
fn built_in_fragment_catalog() {
    let m = builtin::backbone();
    for (vp, v) in m.variants() {
        let f = m.fragment(&v.fragment).unwrap();
        assert_eq!(fragment_kind(f), vp.view_kind, "{}", v.id);
        assert!(validate_fragment(f).is_empty(), "{}", f.id());
    }
    let kind =
        |variant: &str| fragment_kind(m.fragment(&m.variant(variant).unwrap().fragment).unwrap());
    assert_eq!(kind("BB84"), ViewKind::Process);
    assert_eq!(kind("Direct"), ViewKind::Interaction);
    assert_eq!(kind("Satellite-based"), ViewKind::Structure);

    let ViewFragment::Process(bb84) = m.fragment("bb84").unwrap() else {
        panic!()
    };
    assert_eq!(bb84.lanes, ["Alice", "Bob"]);
    let steps: Vec<&str> = bb84
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Action)
        .map(|n| n.id.as_str())
        .collect();
    assert_eq!(
        steps,
        ["prepare", "transmit", "measure", "sift", "correct", "amplify"]
    );

    let ViewFragment::Process(e91) = m.fragment("e91").unwrap() else {
        panic!()
    };
    assert!(e91.lanes.iter().any(|l| l == "Source"));
    assert!(e91
        .nodes
        .iter()
        .any(|n| n.kind == NodeKind::Decision && n.label.as_deref() == Some("CHSH test")));
    let ViewFragment::Process(mdi) = m.fragment("mdi").unwrap() else {
        panic!()
    };
    assert!(mdi.lanes.iter().any(|l| l == "Relay"));
}

#[test]
fn swapping_link_has_a_heralding_repeater() {
    let m = builtin::backbone();
    let ViewFragment::Interaction(q) = m.fragment("qlink-swapping").unwrap() else {
        panic!()
    };
    let role = |id: &str| q.lifeline(id).and_then(|l| l.role);
    let pos = |r: LifelineRole| q.lifelines.iter().position(|l| l.role == Some(r)).unwrap();
    let repeater = pos(LifelineRole::Repeater);
    assert!(pos(LifelineRole::Sender) < repeater && repeater < pos(LifelineRole::Receiver));
    for (i, msg) in q.messages.iter().enumerate() {
        if msg.channel == ChannelKind::Quantum {
            assert!(
                q.messages[i + 1..]
                    .iter()
                    .any(|n| n.channel == ChannelKind::Classical
                        && role(&n.from) == Some(LifelineRole::Repeater)),
                "no herald after message {i}"
            );
        }
    }
}

#[test]
fn fragment_validation_examples() {
    let m = parse_model(
        r#"model bad {
  fragment interaction i { lifeline Alice
 message Eve -> Alice "psst" channel=classical }
  fragment process p { initial a
 initial b }
}"#,
    )
    .unwrap();
    let i = validate_fragment(m.fragment("i").unwrap());
    assert!(i.has_code(Code::UnknownLifeline) && i.find(Code::UnknownLifeline, "i").is_some());
    let p = validate_fragment(m.fragment("p").unwrap());
    assert!(p.has_code(Code::MultipleInitial));
}

#[test]
fn case_study_selection_list_matches_constant() {
    let cfg = builtin::case_study();
    assert_eq!(cfg.selected.len(), CASE_STUDY.len());
}
