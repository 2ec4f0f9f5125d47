//! Configuration checking, decision propagation, view composition and
//! interface derivation.

mod check;
mod export;
mod interfaces;
mod merge;
mod propagate;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fragment::{
    ChannelKind, InteractionFragment, MediumKind, Port, ProcessFragment, StructureFragment,
};
use crate::ident::Ident;

pub use check::check_configuration;
pub use export::{export_architecture, ExportFormat, ARCHITECTURE_SCHEMA};
pub use interfaces::derive_interfaces;
pub use merge::{compose, ComposeError};
pub use propagate::{propagate, DecisionState, VariantDecision, VpDecision};

/// A selection of variants against a named model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Configuration {
    pub model: String,
    pub selected: BTreeSet<Ident>,
}

impl Configuration {
    pub fn new<I, S>(model: &str, selected: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Ident>,
    {
        Configuration {
            model: String::from(model),
            selected: selected.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.selected.contains(id)
    }
}

/// A process view retained in the composition, with each lane bound to the
/// merged block of the same id when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundProcess {
    pub variant: Ident,
    pub fragment: ProcessFragment,
    pub lane_bindings: BTreeMap<Ident, Option<Ident>>,
}

/// One instantiation of an interaction view. `path` is `None` when the
/// interaction applies to none of the composed paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionInstance {
    pub id: String,
    pub variant: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Ident>,
    /// Set for direct links the composer adds to paths no selected
    /// interaction applies to.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub implied: bool,
    pub fragment: InteractionFragment,
    pub bindings: BTreeMap<Ident, Ident>,
}

/// A channel subsystem carrying quantum states between the endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumPath {
    pub id: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<Ident>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeater: Option<Ident>,
    pub interactions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub block: Ident,
    pub port: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connector {
    pub a: PortRef,
    pub b: PortRef,
    pub channel: ChannelKind,
    /// Interaction instances whose messages this connector carries.
    pub carries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InterfaceDefinition {
    pub connectors: Vec<Connector>,
    /// Ports introduced on demand for the connectors; already part of the
    /// composed structure.
    pub created_ports: Vec<Port>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComposedArchitecture {
    pub model: String,
    pub selected: Vec<Ident>,
    pub structure: StructureFragment,
    pub behaviors: Vec<BoundProcess>,
    pub interactions: Vec<InteractionInstance>,
    pub paths: Vec<QuantumPath>,
    pub interface: InterfaceDefinition,
    /// Element key (`block:<id>`, `node:<fragment>/<id>`, `interaction:<id>`,
    /// `port:<block>.<id>`) to originating variant ids.
    pub provenance: BTreeMap<String, BTreeSet<Ident>>,
}

impl ComposedArchitecture {
    pub fn connectors_in_path(&self, path: &str) -> impl Iterator<Item = &Connector> {
        let members = self.structure.subtree(path);
        self.interface.connectors.iter().filter(move |c| {
            members.contains(c.a.block.as_str()) || members.contains(c.b.block.as_str())
        })
    }

    /// Paths with at least one quantum connector touching them.
    pub fn quantum_paths(&self) -> impl Iterator<Item = &QuantumPath> {
        self.paths.iter().filter(move |p| {
            self.connectors_in_path(&p.id)
                .any(|c| c.channel == ChannelKind::Quantum)
        })
    }
}
