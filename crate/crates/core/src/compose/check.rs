use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::compose::Configuration;
use crate::diag::{Code, Diagnostic, ValidationReport};
use crate::ident::Ident;
use crate::ovm::{scope_of, ConstraintKind, OvmModel, Presence};

/// Checks a selection against cardinalities, scope and constraints.
/// The configuration is valid iff the report holds no errors.
pub fn check_configuration(model: &OvmModel, config: &Configuration) -> ValidationReport {
    let mut report = ValidationReport::new();

    if config.model != model.name {
        report.push(Diagnostic::error(
            Code::ModelMismatch,
            [config.model.as_str(), model.name.as_str()],
            format!(
                "configuration targets model `{}` but was checked against `{}`",
                config.model, model.name
            ),
        ));
    }

    let mut known: BTreeSet<&str> = BTreeSet::new();
    for id in &config.selected {
        if model.variant(id).is_some() {
            known.insert(id.as_str());
        } else {
            report.push(Diagnostic::error(
                Code::UnknownVariant,
                [id.as_str()],
                format!("`{id}` is not a variant of `{}`", model.name),
            ));
        }
    }

    let scope = match scope_of(model, known.iter().copied()) {
        Ok(s) => s,
        Err(_) => unreachable!("selection filtered to known variants"),
    };

    for vp in &model.variation_points {
        let chosen: Vec<&Ident> = vp
            .variants
            .iter()
            .map(|v| &v.id)
            .filter(|id| known.contains(id.as_str()))
            .collect();
        if !scope.contains(&vp.id) {
            for v in &chosen {
                report.push(Diagnostic::error(
                    Code::VariantOutOfScope,
                    [v.as_str(), vp.id.as_str()],
                    format!(
                        "`{v}` is selected but its variation point `{}` is not in scope",
                        vp.label
                    ),
                ));
            }
            continue;
        }
        let n = chosen.len();
        if n == 0 {
            if vp.presence == Presence::Mandatory {
                report.push(Diagnostic::error(
                    Code::UnresolvedVp,
                    [vp.id.as_str()],
                    format!("no variant selected for `{}`", vp.label),
                ));
            }
        } else if !vp.cardinality.contains(n) {
            report.push(Diagnostic::error(
                Code::CardinalityViolation,
                core::iter::once(vp.id.as_str()).chain(chosen.iter().map(|v| v.as_str())),
                format!(
                    "`{}` allows {} selections, found {n}",
                    vp.label, vp.cardinality
                ),
            ));
        }
    }

    for c in &model.constraints {
        if !known.contains(c.from.as_str()) {
            continue;
        }
        let target_hit = if model.vp(&c.to).is_some() {
            model
                .vp(&c.to)
                .into_iter()
                .flat_map(|vp| vp.variants.iter())
                .any(|v| known.contains(v.id.as_str()))
        } else {
            known.contains(c.to.as_str())
        };
        match c.kind {
            ConstraintKind::Requires if !target_hit => report.push(Diagnostic::error(
                Code::RequiresViolated,
                [c.from.as_str(), c.to.as_str()],
                format!("`{}` requires `{}`", c.from, c.to),
            )),
            ConstraintKind::Excludes if target_hit => report.push(Diagnostic::error(
                Code::ExcludesViolated,
                [c.from.as_str(), c.to.as_str()],
                format!("`{}` excludes `{}`", c.from, c.to),
            )),
            _ => {}
        }
    }

    report
}
