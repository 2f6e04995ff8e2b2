#![allow(dead_code)]

use std::collections::BTreeMap;

use sauav_core::adversary::AdversaryKind;
use sauav_core::config::ScenarioConfig;
use sauav_core::kernel::{Position, SimTime};
use sauav_core::protocol::NodeId;
use sauav_core::sim::{Layout, World};

pub const A: NodeId = NodeId(0);
pub const B: NodeId = NodeId(1);
pub const C: NodeId = NodeId(2);
pub const D: NodeId = NodeId(3);
pub const E: NodeId = NodeId(4);
pub const F: NodeId = NodeId(5);
pub const G: NodeId = NodeId(6);
pub const H: NodeId = NodeId(7);

/// Eight static nodes: A and H host agents, E is an attacker, G is out of
/// everyone's range. With a 250 m radio the links are
/// A-B A-C A-D A-E B-C B-F B-H H-D H-F.
pub fn eight_node_world() -> World {
    let mut cfg = ScenarioConfig::default();
    cfg.mobility.speed_mps = 0.0;
    cfg.traffic.flows = 0;
    cfg.scenario.sim_time_s = 3.0;
    let positions = [
        (300.0, 400.0),
        (450.0, 590.0),
        (280.0, 580.0),
        (450.0, 210.0),
        (100.0, 350.0),
        (630.0, 600.0),
        (1000.0, 100.0),
        (600.0, 400.0),
    ]
    .into_iter()
    .map(|(x, y)| Position::new(x, y))
    .collect();
    let layout = Layout {
        positions,
        adversaries: BTreeMap::from([(E, AdversaryKind::Blackhole)]),
        agents: vec![(A, SimTime::from_millis(2_000)), (H, SimTime::from_millis(2_008))],
        flows: vec![],
    };
    World::with_layout(cfg, layout, true).unwrap()
}

/// `(valid, agent)` bits of every entry in `node`'s matrix.
pub fn bits(w: &World, node: NodeId) -> BTreeMap<NodeId, (bool, bool)> {
    w.node(node).matrix.bits()
}

pub fn small_config(seed: u64, n: usize, fraction: f64, sim_time_s: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.scenario.seed = seed;
    cfg.scenario.n_uavs = n;
    cfg.scenario.sim_time_s = sim_time_s;
    cfg.adversary.fraction = fraction;
    cfg.traffic.start_s = 3.0;
    cfg
}

pub struct StaticScenario {
    pub positions: Vec<(f64, f64)>,
    pub adversaries: Vec<(u32, AdversaryKind)>,
    pub agents: Vec<u32>,
    pub flows: Vec<(u32, u32)>,
    pub defense: bool,
    pub sim_time_s: f64,
}

impl StaticScenario {
    pub fn new(positions: Vec<(f64, f64)>, flows: Vec<(u32, u32)>) -> Self {
        Self {
            positions,
            adversaries: vec![],
            agents: vec![],
            flows,
            defense: false,
            sim_time_s: 60.0,
        }
    }

    pub fn config(&self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.mobility.speed_mps = 0.0;
        cfg.scenario.sim_time_s = self.sim_time_s;
        cfg.scenario.defense = self.defense;
        cfg
    }

    pub fn world_with(&self, cfg: ScenarioConfig) -> World {
        let layout = Layout {
            positions: self.positions.iter().map(|&(x, y)| Position::new(x, y)).collect(),
            adversaries: self.adversaries.iter().map(|(i, k)| (NodeId(*i), *k)).collect(),
            agents: self
                .agents
                .iter()
                .map(|i| (NodeId(*i), SimTime::from_millis(2_000 + 10 * *i as u64)))
                .collect(),
            flows: self.flows.iter().map(|&(s, d)| (NodeId(s), NodeId(d))).collect(),
        };
        World::with_layout(cfg, layout, true).unwrap()
    }

    pub fn world(&self) -> World {
        self.world_with(self.config())
    }
}

/// Five nodes 200 m apart: each hears only its immediate neighbours.
pub fn line5() -> Vec<(f64, f64)> {
    (0..5).map(|i| (100.0 + 200.0 * i as f64, 500.0)).collect()
}

/// Source 0 and destination 3 joined by two disjoint two-hop paths, via 1
/// and via 2.
pub fn diamond() -> Vec<(f64, f64)> {
    vec![(100.0, 500.0), (300.0, 400.0), (300.0, 600.0), (500.0, 500.0)]
}
