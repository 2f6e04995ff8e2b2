//! Scenario configuration (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversary::AdversaryConfig;
use crate::agent::AgentCycleConfig;
use crate::detection::DetectorConfig;
use crate::kernel::{joules_to_nj, CostModel, RadioModel, SimTime};
use crate::protocol::WireFormat;
use crate::routing::RoutingConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_uavs: usize,
    pub sim_time_s: f64,
    pub seed: u64,
    pub arena_m: f64,
    pub defense: bool,
    /// Length of the deployment phase before the first agent cycle.
    pub deployment_s: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            n_uavs: 100,
            sim_time_s: 200.0,
            seed: 1,
            arena_m: 2000.0,
            defense: true,
            deployment_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub range_m: f64,
    pub per_hop_delay_ms: f64,
    pub tx_fixed_nj: u64,
    pub tx_per_byte_nj: u64,
    pub rx_fixed_nj: u64,
    pub rx_per_byte_nj: u64,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioModel::default();
        Self {
            range_m: r.range,
            per_hop_delay_ms: r.per_hop_delay.as_micros() as f64 / 1000.0,
            tx_fixed_nj: r.tx.fixed_nj,
            tx_per_byte_nj: r.tx.per_byte_nj,
            rx_fixed_nj: r.rx.fixed_nj,
            rx_per_byte_nj: r.rx.per_byte_nj,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilitySection {
    pub speed_mps: f64,
    pub tick_ms: f64,
}

impl Default for MobilitySection {
    fn default() -> Self {
        Self {
            speed_mps: 180.0,
            tick_ms: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub initial_j: f64,
    /// Death threshold as a fraction of the initial energy.
    pub death_fraction: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            initial_j: 100.0,
            death_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub hello_period_s: f64,
    /// Entries unheard for this many HELLO periods are dropped.
    pub entry_max_age_periods: f64,
    pub rss_threshold: f64,
    pub code_width: usize,
    pub data_width: u8,
    pub freshness_window_s: f64,
    /// Restore a previously verified neighbor's bits when it reappears.
    pub remember_trust: bool,
    pub authenticate_neighbors: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            hello_period_s: 1.0,
            entry_max_age_periods: 3.0,
            rss_threshold: 0.0,
            code_width: 32,
            data_width: 2,
            freshness_window_s: 2.0,
            remember_trust: true,
            authenticate_neighbors: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub flows: usize,
    /// Packets per second per flow.
    pub rate_pps: f64,
    pub packet_bytes: u32,
    pub start_s: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            flows: 10,
            rate_pps: 4.0,
            packet_bytes: 512,
            start_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub radio: RadioSection,
    pub mobility: MobilitySection,
    pub energy: EnergySection,
    pub protocol: ProtocolSection,
    pub agents: AgentCycleConfig,
    pub adversary: AdversaryConfig,
    pub detector: DetectorConfig,
    pub routing: RoutingConfig,
    pub traffic: TrafficSection,
}

impl ScenarioConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let p = path.as_ref();
        let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    // Negated comparisons so NaN fails as well.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scenario;
        if s.n_uavs < 2 {
            return Err(invalid("scenario.n_uavs", "need at least 2 UAVs"));
        }
        if !(s.sim_time_s > 0.0 && s.sim_time_s.is_finite()) {
            return Err(invalid("scenario.sim_time_s", "must be positive"));
        }
        if !(s.arena_m > 0.0) {
            return Err(invalid("scenario.arena_m", "must be positive"));
        }
        if s.deployment_s < 0.0 {
            return Err(invalid("scenario.deployment_s", "must be non-negative"));
        }
        self.radio_model()
            .validate()
            .map_err(|e| invalid("radio", e.to_string()))?;
        if self.mobility.speed_mps < 0.0 {
            return Err(invalid("mobility.speed_mps", "must be non-negative"));
        }
        if self.mobility.tick_ms <= 0.0 {
            return Err(invalid("mobility.tick_ms", "must be positive"));
        }
        if self.energy.initial_j <= 0.0 {
            return Err(invalid("energy.initial_j", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.energy.death_fraction) {
            return Err(invalid("energy.death_fraction", "must be in [0, 1)"));
        }
        let p = &self.protocol;
        if p.hello_period_s <= 0.0 || p.entry_max_age_periods <= 0.0 {
            return Err(invalid("protocol.hello_period_s", "periods must be positive"));
        }
        if p.code_width == 0 || p.code_width > 64 {
            return Err(invalid("protocol.code_width", "must be 1..=64 bytes"));
        }
        if !(2..=32).contains(&p.data_width) {
            return Err(invalid("protocol.data_width", "must be 2..=32 bits"));
        }
        if p.freshness_window_s <= 0.0 {
            return Err(invalid("protocol.freshness_window_s", "must be positive"));
        }
        self.agents.validate().map_err(|e| invalid("agents", e.to_string()))?;
        self.adversary
            .validate()
            .map_err(|e| invalid("adversary", e.to_string()))?;
        self.detector
            .validate()
            .map_err(|e| invalid("detector", e.to_string()))?;
        self.routing.validate().map_err(|e| invalid("routing", e))?;
        let t = &self.traffic;
        if t.rate_pps < 0.0 || t.start_s < 0.0 {
            return Err(invalid("traffic", "rate_pps and start_s must be non-negative"));
        }
        if t.flows > 0 && t.rate_pps == 0.0 {
            return Err(invalid("traffic.rate_pps", "must be positive when flows > 0"));
        }
        Ok(())
    }

    pub fn radio_model(&self) -> RadioModel {
        RadioModel {
            range: self.radio.range_m,
            per_hop_delay: SimTime::from_secs_f64(self.radio.per_hop_delay_ms / 1000.0),
            tx: CostModel {
                fixed_nj: self.radio.tx_fixed_nj,
                per_byte_nj: self.radio.tx_per_byte_nj,
            },
            rx: CostModel {
                fixed_nj: self.radio.rx_fixed_nj,
                per_byte_nj: self.radio.rx_per_byte_nj,
            },
        }
    }

    pub fn wire_format(&self) -> WireFormat {
        WireFormat {
            code_width: self.protocol.code_width,
            data_width: self.protocol.data_width,
        }
    }

    pub fn initial_nj(&self) -> u64 {
        joules_to_nj(self.energy.initial_j)
    }

    pub fn threshold_nj(&self) -> u64 {
        (self.initial_nj() as f64 * self.energy.death_fraction).round() as u64
    }

    pub fn malicious_count(&self) -> usize {
        (self.adversary.fraction * self.scenario.n_uavs as f64 + 1e-9).floor() as usize
    }
}
