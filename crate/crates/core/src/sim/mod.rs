//! Desk-scale Monte-Carlo execution of composed architectures.
//!
//! Each run is a pure function of its [`SimulationSpec`]; draws come from a
//! ChaCha8 stream seeded with `seed_from_u64(seed)`.

mod arch;
mod bb84;
mod channel;
mod e91;
mod fidelity;
mod keyrate;
mod mdi;
mod rng;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::fragment::ProtocolKind;

pub use arch::{simulate_architecture, PathOverrides, PathResult, SimulationParams};
pub use bb84::simulate_bb84;
pub use channel::{
    channel_transmittance, transmittance_db, ChannelModel, Segment, DEFAULT_ATTENUATION_DB_PER_KM,
    DEFAULT_SATELLITE_LOSS_DB,
};
pub use e91::{simulate_e91, werner_correlation, ALICE_ANGLES, BOB_ANGLES};
pub use fidelity::{chain_fidelity, fidelity_from_werner, werner_error_rate, werner_parameter};
pub use keyrate::{h2, secret_fraction};
pub use mdi::simulate_mdi;
pub use rng::{fmix64, path_seed};

pub const DEFAULT_PHOTONS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SWAP_COUNT: u32 = 1;
/// Perfect elementary links; noise is opt-in.
pub const DEFAULT_LINK_FIDELITY: f64 = 1.0;
pub const DEFAULT_FIDELITY_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Adversary {
    #[default]
    None,
    /// Eve measures the given fraction of photons in a random basis and
    /// resends what she saw.
    InterceptResend { fraction: f64 },
}

impl Adversary {
    pub fn fraction(&self) -> f64 {
        match self {
            Adversary::None => 0.0,
            Adversary::InterceptResend { fraction } => *fraction,
        }
    }

    /// `none` or `intercept-resend:<fraction>`.
    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "none" {
            return Ok(Adversary::None);
        }
        let (kind, frac) = s.split_once(':').unwrap_or((s, "1"));
        if kind != "intercept-resend" {
            return Err(alloc::format!(
                "unknown adversary `{kind}` (expected none or intercept-resend)"
            ));
        }
        let fraction: f64 = frac
            .parse()
            .map_err(|_| alloc::format!("`{frac}` is not a number"))?;
        if !(0.0..=1.0).contains(&fraction) {
            return Err(String::from("intercept fraction must be within [0, 1]"));
        }
        Ok(Adversary::InterceptResend { fraction })
    }
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Adversary::None => f.write_str("none"),
            Adversary::InterceptResend { fraction } => write!(f, "intercept-resend:{fraction}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub protocol: ProtocolKind,
    pub path: ChannelModel,
    pub photon_count: u64,
    #[serde(default)]
    pub adversary: Adversary,
    pub seed: u64,
    /// Entanglement swaps on the path; 0 for a direct link.
    #[serde(default)]
    pub swap_count: u32,
    /// Werner fidelity of each elementary link (and of the E91 source).
    pub link_fidelity: f64,
}

impl SimulationSpec {
    /// Noiseless, lossless run with no adversary.
    pub fn ideal(protocol: ProtocolKind, photon_count: u64, seed: u64) -> Self {
        SimulationSpec {
            protocol,
            path: ChannelModel::ideal(crate::fragment::MediumKind::Fiber),
            photon_count,
            adversary: Adversary::None,
            seed,
            swap_count: 0,
            link_fidelity: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.photon_count == 0 {
            return Err(SimError::EmptyRun { path: None });
        }
        let invalid = |field: &str, message: &str| {
            Err(SimError::InvalidSpec {
                field: String::from(field),
                message: String::from(message),
            })
        };
        let f = self.adversary.fraction();
        if !(0.0..=1.0).contains(&f) {
            return invalid("adversary.fraction", "must be within [0, 1]");
        }
        if !(0.25..=1.0).contains(&self.link_fidelity) {
            return invalid("link_fidelity", "must be within [0.25, 1]");
        }
        if let Err(m) = self.path.check() {
            return invalid("path", m);
        }
        Ok(())
    }

    /// Fidelity of the distributed pair after all swaps.
    pub fn end_fidelity(&self) -> f64 {
        chain_fidelity(self.link_fidelity, self.swap_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub sent: u64,
    pub detected: u64,
    pub sifted: u64,
    pub errors_in_sifted: u64,
    pub qber: f64,
    pub sifted_fraction: f64,
    pub secret_fraction: f64,
    /// Per-photon survival probability the run used.
    pub transmittance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chsh_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_fidelity: Option<f64>,
    /// E91 only: the CHSH test failed to exceed 2 (or had no data), so no
    /// key is kept.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub aborted: bool,
}

impl SimulationResult {
    pub(crate) fn from_counts(
        spec: &SimulationSpec,
        transmittance: f64,
        detected: u64,
        sifted: u64,
        errors: u64,
    ) -> Self {
        let qber = if sifted == 0 {
            0.0
        } else {
            errors as f64 / sifted as f64
        };
        SimulationResult {
            protocol: spec.protocol,
            seed: spec.seed,
            sent: spec.photon_count,
            detected,
            sifted,
            errors_in_sifted: errors,
            qber,
            sifted_fraction: sifted as f64 / spec.photon_count as f64,
            secret_fraction: if sifted == 0 {
                0.0
            } else {
                secret_fraction(qber)
            },
            transmittance,
            chsh_s: None,
            end_fidelity: (spec.swap_count > 0).then(|| spec.end_fidelity()),
            aborted: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    EmptyRun { path: Option<String> },
    InvalidSpec { field: String, message: String },
    NoQuantumPath,
    NoProtocol,
    AmbiguousProtocol(Vec<String>),
    PathWithoutMedium(String),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::EmptyRun { .. } => "EMPTY_RUN",
            SimError::InvalidSpec { .. } => "INVALID_SPEC",
            SimError::NoQuantumPath => "NO_QUANTUM_PATH",
            SimError::NoProtocol => "NO_PROTOCOL",
            SimError::AmbiguousProtocol(_) => "AMBIGUOUS_PROTOCOL",
            SimError::PathWithoutMedium(_) => "PATH_WITHOUT_MEDIUM",
        }
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::EmptyRun { path: None } => f.write_str("photon count must be positive"),
            SimError::EmptyRun { path: Some(p) } => {
                write!(f, "photon count for path `{p}` must be positive")
            }
            SimError::InvalidSpec { field, message } => write!(f, "`{field}` {message}"),
            SimError::NoQuantumPath => f.write_str("architecture has no quantum connectors"),
            SimError::NoProtocol => f.write_str("no selected process view names a protocol"),
            SimError::AmbiguousProtocol(v) => {
                write!(f, "several protocols are selected: {}", v.join(", "))
            }
            SimError::PathWithoutMedium(p) => {
                write!(f, "path `{p}` contains no link block with a medium")
            }
        }
    }
}

impl core::error::Error for SimError {}

/// Runs `spec.protocol` over `spec.path`.
pub fn simulate(spec: &SimulationSpec) -> Result<SimulationResult, SimError> {
    match spec.protocol {
        ProtocolKind::Bb84 => simulate_bb84(spec),
        ProtocolKind::Mdi => simulate_mdi(spec),
        ProtocolKind::E91 => simulate_e91(spec),
    }
}
