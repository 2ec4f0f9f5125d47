use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    path_seed, simulate, Adversary, ChannelModel, SimError, SimulationResult, SimulationSpec,
    DEFAULT_ATTENUATION_DB_PER_KM, DEFAULT_FIDELITY_THRESHOLD, DEFAULT_LINK_FIDELITY,
    DEFAULT_PHOTONS, DEFAULT_SATELLITE_LOSS_DB, DEFAULT_SEED, DEFAULT_SWAP_COUNT,
};
use crate::compose::{ComposedArchitecture, QuantumPath};
use crate::fragment::{MediumKind, ProtocolKind};

/// Fibre length used when a link block does not declare one.
pub const DEFAULT_FIBRE_LENGTH_KM: f64 = 100.0;

/// Run-wide defaults plus per-path overrides keyed by path block id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationParams {
    pub photon_count: u64,
    pub seed: u64,
    pub adversary: Adversary,
    pub attenuation_db_per_km: f64,
    pub satellite_loss_db: f64,
    /// Swaps on paths that contain a repeater; direct paths always use 0.
    pub swap_count: u32,
    pub link_fidelity: f64,
    /// End-to-end fidelity at or above which a path is reported feasible.
    pub fidelity_threshold: f64,
    pub overrides: BTreeMap<String, PathOverrides>,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            photon_count: DEFAULT_PHOTONS,
            seed: DEFAULT_SEED,
            adversary: Adversary::None,
            attenuation_db_per_km: DEFAULT_ATTENUATION_DB_PER_KM,
            satellite_loss_db: DEFAULT_SATELLITE_LOSS_DB,
            swap_count: DEFAULT_SWAP_COUNT,
            link_fidelity: DEFAULT_LINK_FIDELITY,
            fidelity_threshold: DEFAULT_FIDELITY_THRESHOLD,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_count: Option<u64>,
    /// Used as-is, without per-path derivation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary: Option<Adversary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attenuation_db_per_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_loss_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub path: String,
    pub medium: MediumKind,
    pub spec: SimulationSpec,
    pub result: SimulationResult,
    /// `end_fidelity >= fidelity_threshold`; true for direct paths.
    pub feasible: bool,
}

fn protocol_of(arch: &ComposedArchitecture) -> Result<ProtocolKind, SimError> {
    let mut found: Vec<(ProtocolKind, String)> = arch
        .behaviors
        .iter()
        .filter_map(|b| {
            b.fragment
                .protocol
                .map(|p| (p, String::from(b.variant.as_str())))
        })
        .collect();
    found.dedup_by(|a, b| a.0 == b.0);
    match found.as_slice() {
        [] => Err(SimError::NoProtocol),
        [(p, _)] => Ok(*p),
        many => Err(SimError::AmbiguousProtocol(
            many.iter().map(|(_, v)| v.clone()).collect(),
        )),
    }
}

/// Builds the run spec for one path: medium defaults, then overrides.
fn path_spec(
    path: &QuantumPath,
    index: usize,
    protocol: ProtocolKind,
    params: &SimulationParams,
) -> Result<SimulationSpec, SimError> {
    let medium = path
        .medium
        .ok_or_else(|| SimError::PathWithoutMedium(String::from(path.id.as_str())))?;
    let o = params
        .overrides
        .get(path.id.as_str())
        .cloned()
        .unwrap_or_default();
    let mut channel = match medium {
        MediumKind::Fiber => ChannelModel::fiber(
            o.length_km
                .or(path.length_km)
                .unwrap_or(DEFAULT_FIBRE_LENGTH_KM),
            o.attenuation_db_per_km
                .unwrap_or(params.attenuation_db_per_km),
        ),
        MediumKind::FreeSpace => {
            let mut c = ChannelModel::free_space(params.satellite_loss_db);
            if let Some(len) = o.length_km.or(path.length_km) {
                c.length_km = len;
            }
            c.attenuation_db_per_km = o.attenuation_db_per_km.unwrap_or(0.0);
            c
        }
    };
    if let Some(loss) = o.fixed_loss_db {
        channel.fixed_loss_db = loss;
    }
    let swap_count = if path.repeater.is_some() {
        o.swap_count.unwrap_or(params.swap_count)
    } else {
        0
    };
    if swap_count > 0 {
        channel = channel.split(swap_count as usize + 1);
    }
    let spec = SimulationSpec {
        protocol,
        path: channel,
        photon_count: o.photon_count.unwrap_or(params.photon_count),
        adversary: o.adversary.unwrap_or(params.adversary),
        seed: o.seed.unwrap_or_else(|| path_seed(params.seed, index)),
        swap_count,
        link_fidelity: o.link_fidelity.unwrap_or(params.link_fidelity),
    };
    spec.validate().map_err(|e| match e {
        SimError::EmptyRun { .. } => SimError::EmptyRun {
            path: Some(String::from(path.id.as_str())),
        },
        e => e,
    })?;
    Ok(spec)
}

/// One run per quantum path, in path-id order. The protocol comes from the
/// selected process view; path `i` runs with seed `seed ^ fmix64(i)`.
/// Repeater paths split their length into `swap_count + 1` segments, report
/// the chain's end-to-end fidelity and fold its Werner noise into the QBER.
pub fn simulate_architecture(
    arch: &ComposedArchitecture,
    params: &SimulationParams,
) -> Result<Vec<PathResult>, SimError> {
    if !(0.0..=1.0).contains(&params.fidelity_threshold) {
        return Err(SimError::InvalidSpec {
            field: String::from("fidelity_threshold"),
            message: String::from("must be within [0, 1]"),
        });
    }
    let mut paths: Vec<&QuantumPath> = arch.quantum_paths().collect();
    if paths.is_empty() {
        return Err(SimError::NoQuantumPath);
    }
    paths.sort_by(|a, b| a.id.cmp(&b.id));
    for key in params.overrides.keys() {
        if !paths.iter().any(|p| p.id == key.as_str()) {
            return Err(SimError::InvalidSpec {
                field: alloc::format!("overrides.{key}"),
                message: String::from("does not name a quantum path"),
            });
        }
    }
    let protocol = protocol_of(arch)?;

    let mut out = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let spec = path_spec(path, i, protocol, params)?;
        let result = simulate(&spec)?;
        let feasible = result
            .end_fidelity
            .is_none_or(|f| f >= params.fidelity_threshold);
        out.push(PathResult {
            path: String::from(path.id.as_str()),
            medium: spec.path.kind,
            spec,
            result,
            feasible,
        });
    }
    Ok(out)
}
