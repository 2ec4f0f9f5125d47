//! Variability-driven modelling of QKD network architecture families.
//!
//! An [`OvmModel`] holds variation points and variants, each variant bound
//! to exactly one view fragment (a process, interaction or structure graph).
//! Selecting variants yields a [`Configuration`] that can be checked,
//! propagated, and composed into a [`ComposedArchitecture`] carrying a derived
//! quantum/classical interface definition. The [`sim`] module executes composed
//! architectures with Monte-Carlo BB84, MDI and E91 runs.
//!
//! The crate is `no_std` and only needs `alloc`. File access (for `include`
//! directives) is abstracted behind [`text::IncludeResolver`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod builtin;
pub mod compose;
pub mod diag;
pub mod fragment;
pub mod ident;
pub mod ovm;
pub mod sim;
pub mod text;

pub use compose::{
    check_configuration, compose, derive_interfaces, export_architecture, propagate,
    ComposedArchitecture, Configuration, DecisionState, ExportFormat, InterfaceDefinition,
};
pub use diag::{Code, Diagnostic, Severity, ValidationReport};
pub use fragment::{
    fragment_kind, validate_fragment, ChannelKind, InteractionFragment, ProcessFragment,
    StructureFragment, ViewFragment, ViewKind,
};
pub use ident::Ident;
pub use ovm::{validate_model, vp_scope, OvmModel, Variant, VariationPoint};
