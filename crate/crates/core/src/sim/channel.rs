use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fragment::MediumKind;

pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.2;
pub const DEFAULT_SATELLITE_LOSS_DB: f64 = 30.0;

/// A stretch of the channel between two nodes (endpoint or repeater).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length_km: f64,
    #[serde(default)]
    pub fixed_loss_db: f64,
}

/// Link budget of one quantum path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: MediumKind,
    #[serde(default)]
    pub length_km: f64,
    #[serde(default)]
    pub attenuation_db_per_km: f64,
    #[serde(default)]
    pub fixed_loss_db: f64,
    /// Segments between repeater nodes, in order. Empty for a direct path.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<Segment>,
}

impl ChannelModel {
    pub fn fiber(length_km: f64, attenuation_db_per_km: f64) -> Self {
        ChannelModel {
            kind: MediumKind::Fiber,
            length_km,
            attenuation_db_per_km,
            fixed_loss_db: 0.0,
            segments: Vec::new(),
        }
    }

    pub fn free_space(fixed_loss_db: f64) -> Self {
        ChannelModel {
            kind: MediumKind::FreeSpace,
            length_km: 0.0,
            attenuation_db_per_km: 0.0,
            fixed_loss_db,
            segments: Vec::new(),
        }
    }

    /// Lossless channel of the given kind.
    pub fn ideal(kind: MediumKind) -> Self {
        ChannelModel {
            kind,
            length_km: 0.0,
            attenuation_db_per_km: 0.0,
            fixed_loss_db: 0.0,
            segments: Vec::new(),
        }
    }

    /// Splits length and fixed loss evenly into `n` segments.
    pub fn split(mut self, n: usize) -> Self {
        let n = n.max(1);
        self.segments = (0..n)
            .map(|_| Segment {
                length_km: self.length_km / n as f64,
                fixed_loss_db: self.fixed_loss_db / n as f64,
            })
            .collect();
        self
    }

    pub fn total_loss_db(&self) -> f64 {
        self.attenuation_db_per_km * self.length_km + self.fixed_loss_db
    }

    pub fn segment_loss_db(&self, s: &Segment) -> f64 {
        self.attenuation_db_per_km * s.length_km + s.fixed_loss_db
    }

    /// Transmittance of each segment; a direct path is one segment.
    pub fn segment_transmittances(&self) -> Vec<f64> {
        if self.segments.is_empty() {
            alloc::vec![transmittance_db(self.total_loss_db())]
        } else {
            self.segments
                .iter()
                .map(|s| transmittance_db(self.segment_loss_db(s)))
                .collect()
        }
    }

    /// Survival probability used by the simulators. With repeaters each
    /// segment is attempted independently and the worst segment limits the
    /// rate, so this is the minimum over segments.
    pub fn effective_transmittance(&self) -> f64 {
        self.segment_transmittances()
            .into_iter()
            .fold(1.0, f64::min)
    }

    pub(crate) fn check(&self) -> Result<(), &'static str> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.length_km) {
            return Err("length_km must be a non-negative number");
        }
        if !ok(self.attenuation_db_per_km) {
            return Err("attenuation_db_per_km must be a non-negative number");
        }
        if !ok(self.fixed_loss_db) {
            return Err("fixed_loss_db must be a non-negative number");
        }
        if self
            .segments
            .iter()
            .any(|s| !ok(s.length_km) || !ok(s.fixed_loss_db))
        {
            return Err("segment lengths and losses must be non-negative numbers");
        }
        Ok(())
    }
}

pub fn transmittance_db(loss_db: f64) -> f64 {
    libm::pow(10.0, -loss_db / 10.0)
}

/// `10^(-(attenuation * length + fixed_loss) / 10)` over the whole channel.
pub fn channel_transmittance(channel: &ChannelModel) -> f64 {
    transmittance_db(channel.total_loss_db())
}
