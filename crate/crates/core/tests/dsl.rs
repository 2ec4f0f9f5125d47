use std::collections::BTreeMap;

use proptest::prelude::*;
use qkdvm_core::builtin::{self, BACKBONE_SOURCE, CASE_STUDY_SOURCE};
use qkdvm_core::fragment::*;
use qkdvm_core::ovm::{Cardinality, Presence};
use qkdvm_core::text::{
    parse_configuration, parse_model, parse_model_with, serialize_configuration, serialize_model,
    MemoryIncludes, ParseCode, ParseDiagnostic,
};
use qkdvm_core::{validate_model, OvmModel, Severity, Variant, VariationPoint};

fn codes(d: &[ParseDiagnostic]) -> Vec<ParseCode> {
    d.iter().map(|d| d.code).collect()
}

#[test]
fn backbone_source_has_the_five_variation_points() {
    let m = parse_model(BACKBONE_SOURCE).unwrap();
    let labels: Vec<&str> = m
        .variation_points
        .iter()
        .map(|vp| vp.label.as_str())
        .collect();
    assert_eq!(
        labels,
        [
            "Medium",
            "Free-Space",
            "Terrestrial",
            "QKD Protocol",
            "Q-Link"
        ]
    );
    assert!(validate_model(&m).is_empty());
}

#[test]
fn empty_input_is_an_empty_model() {
    for text in ["", "  \n# nothing here\n"] {
        let p = parse_model_with("e.ovm", text, &qkdvm_core::text::NoIncludes).unwrap();
        assert_eq!(p.model, OvmModel::default());
        assert!(p.warnings.is_empty());
    }
    assert_eq!(serialize_model(&OvmModel::default()), "");
}

#[test]
fn duplicate_variant_is_reported_at_second_occurrence() {
    let text = "model m {\n  vp P \"P\" kind=process cardinality=[1..1] {\n    variant BB84 \"a\" fragment=f\n    variant BB84 \"b\" fragment=f\n  }\n  fragment process f {\n    initial s\n  }\n}\n";
    let d = parse_model(text).unwrap_err();
    assert_eq!(codes(&d), [ParseCode::DuplicateDefinition]);
    assert_eq!((d[0].span.line_start, d[0].span.col_start), (4, 13));
}

#[test]
fn distinct_error_codes() {
    let lex = parse_model("model m { vp $ }").unwrap_err();
    assert!(codes(&lex).contains(&ParseCode::LexicalError));
    let unexpected = parse_model("model m { vp P kind=process }").unwrap_err();
    assert!(codes(&unexpected).contains(&ParseCode::UnexpectedToken));
    let unknown = parse_model(
        "model m { vp P \"P\" kind=process cardinality=[1..1] { variant A \"A\" fragment=nope } }",
    )
    .unwrap_err();
    assert_eq!(codes(&unknown), [ParseCode::UnknownReference]);
    let attr =
        parse_model("model m { fragment structure s { block A role=sideways } }").unwrap_err();
    assert_eq!(codes(&attr), [ParseCode::InvalidAttribute]);
}

#[test]
fn recovery_reports_independent_later_errors() {
    let text = "model m {\n  vp A \"A\" kind=process cardinality=[1..1] {\n    variant x \"x\" fragment=f opens\n  }\n  vp B \"B\" kind=bogus cardinality=[1..1] {\n    variant y \"y\" fragment=f\n  }\n  fragment process f {\n    initial s\n    edge s\n    final t\n  }\n  fragment process f {\n    initial s\n  }\n}\n";
    let d = parse_model(text).unwrap_err();
    let lines: Vec<u32> = d.iter().map(|d| d.span.line_start).collect();
    assert!(lines.contains(&4), "opens list error: {d:#?}");
    assert!(lines.contains(&5), "bad kind: {d:#?}");
    assert!(lines.contains(&11), "edge error: {d:#?}");
    assert!(lines.contains(&13), "duplicate fragment: {d:#?}");
}

#[test]
fn includes_resolve_through_the_resolver_and_cycles_are_caught() {
    let mut files = BTreeMap::new();
    files.insert(
        "frags.ovm".to_string(),
        "fragment process f {\n  initial s\n}\n".to_string(),
    );
    files.insert("loop.ovm".to_string(), "include \"loop.ovm\"\n".to_string());
    let r = MemoryIncludes(files);
    let main = "model m {\n  vp P \"P\" kind=process cardinality=[1..1] {\n    variant A \"A\" fragment=f\n  }\n  include \"frags.ovm\"\n}\n";
    let p = parse_model_with("main.ovm", main, &r).unwrap();
    assert_eq!(p.model.fragments.len(), 1);
    assert_eq!(p.source_map.fragments["f"].file, "frags.ovm");

    let d = parse_model_with("main.ovm", "model m { include \"loop.ovm\" }", &r).unwrap_err();
    assert_eq!(codes(&d), [ParseCode::IncludeFailed]);
    assert_eq!(d[0].span.file, "loop.ovm");
    let d = parse_model_with("main.ovm", "model m { include \"missing.ovm\" }", &r).unwrap_err();
    assert_eq!(codes(&d), [ParseCode::IncludeFailed]);
}

#[test]
fn case_study_configuration_file() {
    let m = builtin::backbone();
    let c = parse_configuration(CASE_STUDY_SOURCE, &m).unwrap();
    assert_eq!(c.name, "case-study");
    assert_eq!(c.config.selected.len(), 6);
    assert_eq!(c.config, builtin::case_study());
    assert!(c.warnings.is_empty());
    let again = serialize_configuration(&c.name, &c.config);
    assert_eq!(parse_configuration(&again, &m).unwrap().config, c.config);
}

#[test]
fn duplicate_selection_collapses_with_warning() {
    let m = builtin::backbone();
    let c =
        parse_configuration("configuration c for qkd-backbone { select BB84, BB84 }", &m).unwrap();
    assert_eq!(c.config.selected.len(), 1);
    assert_eq!(codes(&c.warnings), [ParseCode::DuplicateSelection]);
    assert_eq!(c.warnings[0].severity, Severity::Warning);
}

#[test]
fn unknown_selection_and_wrong_model() {
    let m = builtin::backbone();
    let d = parse_configuration(
        "configuration c for qkd-backbone {\n  select BB84, B92\n}",
        &m,
    )
    .unwrap_err();
    assert_eq!(codes(&d), [ParseCode::UnknownVariant]);
    assert_eq!(
        (d[0].span.line_start, d[0].span.col_start, d[0].span.col_end),
        (2, 16, 18)
    );
    let d = parse_configuration("configuration c for other { select BB84 }", &m).unwrap_err();
    assert_eq!(codes(&d), [ParseCode::ModelMismatch]);
}

#[test]
fn backbone_round_trips_and_is_canonical() {
    let m = builtin::backbone();
    let a = serialize_model(&m);
    assert_eq!(a, serialize_model(&m));
    assert_eq!(parse_model(&a).unwrap(), m);
    assert_eq!(serialize_model(&parse_model(&a).unwrap()), a);
    assert!(!a.contains('\r'));
}

#[test]
fn one_vp_one_variant_document() {
    let mut m = OvmModel::new("tiny");
    m.fragments.push(ViewFragment::Structure(StructureFragment {
        id: "s".into(),
        ..Default::default()
    }));
    m.variation_points.push(VariationPoint {
        id: "P".into(),
        label: "P".into(),
        presence: Presence::Mandatory,
        cardinality: Cardinality::new(1, 1),
        view_kind: ViewKind::Structure,
        variants: vec![Variant {
            id: "A".into(),
            label: "A".into(),
            fragment: "s".into(),
            opens: vec![],
        }],
    });
    let text = serialize_model(&m);
    assert_eq!(
        text,
        "model tiny {\n  vp P \"P\" kind=structure cardinality=[1..1] {\n    variant A \"A\" fragment=s\n  }\n\n  fragment structure s {\n  }\n}\n"
    );
    assert_eq!(parse_model(&text).unwrap(), m);
}

// ---------------------------------------------------------------- generator
#[path = "support/model_gen.rs"]
mod model_gen;
use model_gen::random_model;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_serialize_round_trip(seed in any::<u64>()) {
        let m = random_model(seed);
        let report = validate_model(&m);
        prop_assert!(report.is_empty(), "generator produced an invalid model: {:?}", report);
        let text = serialize_model(&m);
        let back = parse_model(&text).map_err(|d| TestCaseError::fail(format!("{d:#?}\n{text}")))?;
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn diagnostics_stay_within_the_input(cut in 0usize..BACKBONE_SOURCE.len(), junk in "[ -~\n]{0,8}") {
        let mut text: String = BACKBONE_SOURCE.chars().take(cut).collect();
        text.push_str(&junk);
        text.extend(BACKBONE_SOURCE.chars().skip(cut + 3));
        let lines: Vec<&str> = text.split('\n').collect();
        if let Err(diags) = parse_model(&text) {
            prop_assert!(!diags.is_empty());
            for d in diags {
                let s = &d.span;
                prop_assert!((s.line_start, s.col_start) <= (s.line_end, s.col_end), "{:?}", d);
                prop_assert!(s.line_start >= 1 && s.col_start >= 1);
                prop_assert!((s.line_end as usize) <= lines.len(), "{:?}", d);
                let width = lines[s.line_end as usize - 1].chars().count() as u32;
                prop_assert!(s.col_end <= width + 1, "{:?} beyond width {}", d, width);
            }
        }
    }

    #[test]
    fn parsing_is_deterministic(seed in any::<u64>()) {
        let text = serialize_model(&random_model(seed));
        prop_assert_eq!(parse_model(&text).unwrap(), parse_model(&text).unwrap());
    }
}

#[test]
fn generator_exercises_the_whole_grammar() {
    let (mut vps, mut opens, mut constraints, mut lengths, mut decisions, mut optional) =
        (0, 0, 0, 0, 0, 0);
    for seed in 0..256 {
        let m = random_model(seed);
        vps += m.variation_points.len();
        optional += m
            .variation_points
            .iter()
            .filter(|v| v.presence == Presence::Optional)
            .count();
        opens += m.variants().filter(|(_, v)| !v.opens.is_empty()).count();
        constraints += m.constraints.len();
        for f in &m.fragments {
            match f {
                ViewFragment::Structure(s) => {
                    lengths += s
                        .blocks
                        .iter()
                        .filter(|b| {
                            matches!(
                                b.role,
                                Some(BlockRole::Link {
                                    length_km: Some(_),
                                    ..
                                })
                            )
                        })
                        .count()
                }
                ViewFragment::Process(p) => {
                    decisions += p
                        .nodes
                        .iter()
                        .filter(|n| n.kind == NodeKind::Decision)
                        .count()
                }
                ViewFragment::Interaction(_) => {}
            }
        }
    }
    for (what, n) in [
        ("vps", vps),
        ("opens", opens),
        ("constraints", constraints),
        ("lengths", lengths),
        ("decisions", decisions),
        ("optional", optional),
    ] {
        assert!(n > 50, "{what}: only {n}");
    }
}
