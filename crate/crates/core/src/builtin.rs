//! The shipped QKD backbone model and its case-study configuration.

use crate::compose::Configuration;
use crate::ovm::OvmModel;
use crate::text::parse_model_with;
use crate::text::NoIncludes;

pub const MODEL_NAME: &str = "qkd-backbone";

/// DSL source of the built-in model.
pub const BACKBONE_SOURCE: &str = include_str!("../data/backbone.ovm");

/// Case-study configuration source.
pub const CASE_STUDY_SOURCE: &str = include_str!("../data/case-study.cfg");

/// Both media, a single satellite, optical fibre, BB84 and a repeater link.
pub const CASE_STUDY: [&str; 6] = [
    "Satellite-based",
    "Terrestrial",
    "Single",
    "Optical-fibre",
    "BB84",
    "QR",
];

/// Names accepted by [`by_name`].
pub const BUILTINS: &[&str] = &[MODEL_NAME];

pub fn backbone() -> OvmModel {
    match parse_model_with("backbone.ovm", BACKBONE_SOURCE, &NoIncludes) {
        Ok(p) => p.model,
        Err(d) => panic!("built-in model does not parse: {d:?}"),
    }
}

pub fn case_study() -> Configuration {
    Configuration::new(MODEL_NAME, CASE_STUDY)
}

pub fn by_name(name: &str) -> Option<OvmModel> {
    (name == MODEL_NAME).then(backbone)
}
