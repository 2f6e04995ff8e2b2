//! The simulated network: nodes, adversaries and agents driven by the event
//! kernel.

mod agents;
mod detect;
mod net;
mod node;
mod routing;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use node::{AgentBody, HomeAgent, Leg, Role, UavNode};

use crate::adversary::{assign_roles, AdversaryError, AdversaryKind, AdversaryProfile};
use crate::agent::{seed_agents, AgentError, AgentIdentity, HostCredentials, SmartAgent};
use crate::config::{ConfigError, ScenarioConfig};
use crate::crypto::{CryptoError, ForgeKit, ModElement, NetworkSecrets, NodeKeys, SchnorrGroup, TrustedAuthority};
use crate::detection::{classify_all, CounterWindow};
use crate::kernel::{stream_rng, EnergyState, EventQueue, Position, RadioModel, RandomWaypoint, RngStream, SimTime};
use crate::metrics::{compute_re, RunMetrics};
use crate::protocol::{Data, NeighborMatrix, NodeId, Packet, WireFormat};
use crate::routing::{QuarantineSet, RouteTable, RreqCache};
use crate::trace::{Trace, TraceRecord};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("layout: {0}")]
    Layout(String),
}

#[derive(Debug, Clone)]
pub(crate) enum Ev {
    Deliver {
        to: NodeId,
        from: NodeId,
        pkt: Packet,
        body: Option<Box<AgentBody>>,
    },
    /// The next hop refused or never received a data packet.
    LinkFail { node: NodeId, next: NodeId, data: Data },
    Hello { node: NodeId },
    Mobility,
    Traffic { flow: usize },
    AgentCycle { node: NodeId },
    MigrationTimeout { home: NodeId, neighbor: NodeId, attempt: u8, cycle: u64 },
    MigrationRetry { home: NodeId, neighbor: NodeId, attempt: u8, cycle: u64 },
    HandshakeDone { host: NodeId, hs: u64 },
    CycleEnd { home: NodeId, cycle: u64 },
    RouteWindow { node: NodeId, dst: NodeId, request_id: u32 },
    Judgement { node: NodeId, subject: NodeId },
    DetectorTick,
    FakeAgent { node: NodeId },
    End,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Stats {
    pub sent: u64,
    pub delivered: u64,
    pub comment_requests: u64,
    pub warnings: u64,
    pub handshakes: u64,
    pub agents_lost: u64,
    pub deaths: u64,
    pub route_violations: u64,
}

/// Fixed placement for small hand-built scenarios. Nodes do not move.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    pub positions: Vec<Position>,
    pub adversaries: BTreeMap<NodeId, AdversaryKind>,
    /// Agent homes and the time of each one's first cycle.
    pub agents: Vec<(NodeId, SimTime)>,
    pub flows: Vec<(NodeId, NodeId)>,
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub trace: Vec<TraceRecord>,
}

pub struct World {
    pub(crate) cfg: ScenarioConfig,
    pub(crate) q: EventQueue<Ev>,
    pub(crate) nodes: Vec<UavNode>,
    pub(crate) mobility: RandomWaypoint,
    pub(crate) radio: RadioModel,
    pub(crate) fmt: WireFormat,
    pub(crate) group: SchnorrGroup,
    pub(crate) ta_public: ModElement,
    pub(crate) signed_ids: Vec<u64>,
    pub(crate) secrets: NetworkSecrets,
    pub(crate) flows: Vec<(NodeId, NodeId)>,
    pub(crate) next_uid: u64,
    pub(crate) next_hs: u64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) trace: Trace,
    pub(crate) stats: Stats,
    pub(crate) detected: BTreeSet<NodeId>,
    pub(crate) malicious: BTreeSet<NodeId>,
    pub(crate) end: SimTime,
    finished: bool,
}

impl World {
    /// Random placement, roles and agents drawn from the scenario seed.
    pub fn new(cfg: ScenarioConfig, trace: bool) -> Result<Self, SimError> {
        cfg.validate()?;
        let seed = cfg.scenario.seed;
        let n = cfg.scenario.n_uavs;
        let mobility = RandomWaypoint::new(n, cfg.scenario.arena_m, cfg.mobility.speed_mps, stream_rng(seed, RngStream::Mobility));
        let roles = assign_roles(n, &cfg.adversary, &mut stream_rng(seed, RngStream::Roles))?;
        let homes: Vec<NodeId> = if cfg.scenario.defense {
            seed_agents(n, cfg.agents.agent_fraction, &mut stream_rng(seed, RngStream::Agents))?
        } else {
            Vec::new()
        };
        let mut w = Self::build(cfg, mobility, roles, trace)?;
        let mut jitter = stream_rng(seed, RngStream::Agents);
        let start = SimTime::from_secs_f64(w.cfg.scenario.deployment_s);
        for h in homes {
            let at = start + SimTime::from_secs_f64(jitter.gen_range(0.0..1.0));
            w.install_agent(h, Some(at));
        }
        w.pick_flows();
        w.schedule_common();
        Ok(w)
    }

    /// Hand-placed static scenario.
    pub fn with_layout(cfg: ScenarioConfig, layout: Layout, trace: bool) -> Result<Self, SimError> {
        let n = layout.positions.len();
        let mut cfg = cfg;
        cfg.scenario.n_uavs = n;
        cfg.validate()?;
        let side = cfg.scenario.arena_m;
        if layout
            .positions
            .iter()
            .any(|p| !(0.0..=side).contains(&p.x) || !(0.0..=side).contains(&p.y))
        {
            return Err(SimError::Layout("position outside the arena".into()));
        }
        let mobility = RandomWaypoint::fixed(layout.positions.clone(), side, stream_rng(cfg.scenario.seed, RngStream::Mobility));
        let mut roles = BTreeMap::new();
        for (id, kind) in &layout.adversaries {
            if id.index() >= n {
                return Err(SimError::Layout(format!("adversary {id} out of range")));
            }
            let mut p = AdversaryProfile::new(*kind)?;
            p.captures_agents = cfg.adversary.captures_agents;
            p.injects_fake_agents = cfg.adversary.injects_fake_agents;
            p.false_confidence = cfg.adversary.false_confidence;
            p.reply_probability = cfg.adversary.reply_probability;
            p.seq_bump = cfg.adversary.seq_bump;
            roles.insert(*id, p);
        }
        let mut w = Self::build(cfg, mobility, roles, trace)?;
        for (h, at) in &layout.agents {
            if h.index() >= n {
                return Err(SimError::Layout(format!("agent home {h} out of range")));
            }
            if w.cfg.scenario.defense {
                w.install_agent(*h, Some(*at));
            }
        }
        w.flows = layout.flows.clone();
        w.schedule_common();
        Ok(w)
    }

    fn build(
        cfg: ScenarioConfig,
        mobility: RandomWaypoint,
        roles: BTreeMap<NodeId, AdversaryProfile>,
        trace_on: bool,
    ) -> Result<Self, SimError> {
        let seed = cfg.scenario.seed;
        let n = cfg.scenario.n_uavs;
        let fmt = cfg.wire_format();
        let group = SchnorrGroup::standard();
        let mut keys_rng = stream_rng(seed, RngStream::Keys);
        let mut ta = TrustedAuthority::generate(group, &mut keys_rng);
        let secrets = NetworkSecrets::provision(&mut keys_rng, fmt.code_width, fmt.data_width);
        // One forging kit for the whole attacker population.
        let enemy_kit = ForgeKit::generate(&mut keys_rng, fmt.code_width);
        let mut nodes = Vec::with_capacity(n);
        let mut signed_ids = Vec::with_capacity(n);
        for i in 0..n {
            let id = NodeId::from_index(i);
            let keys = NodeKeys::enroll(&mut ta, id, i as u64 + 1, &mut keys_rng)?;
            signed_ids.push(keys.signed_id);
            let rng = stream_rng(seed, RngStream::Node(i as u32));
            let role = roles.get(&id).map_or(Role::Honest, |p| Role::Adversary(*p));
            let creds = match role {
                Role::Honest => HostCredentials::Provisioned(secrets.node_codes()),
                Role::Adversary(_) => HostCredentials::Enemy(enemy_kit.clone()),
            };
            nodes.push(UavNode {
                id,
                role,
                keys,
                creds,
                matrix: NeighborMatrix::new(),
                trust_memory: BTreeMap::new(),
                last_hello: BTreeMap::new(),
                last_hello_sent: None,
                energy: EnergyState::new(cfg.initial_nj(), cfg.threshold_nj()),
                routes: RouteTable::new(),
                rreq_cache: RreqCache::default(),
                seq_no: 0,
                next_request: 0,
                known_seq: BTreeMap::new(),
                discoveries: BTreeMap::new(),
                buffer: BTreeMap::new(),
                reroutes: BTreeMap::new(),
                agent: None,
                hosting: None,
                window: CounterWindow::new(cfg.detector.buckets()),
                watch: BTreeMap::new(),
                quarantine: QuarantineSet::default(),
                judgements: BTreeMap::new(),
                delivered: BTreeSet::new(),
                rng,
            });
        }
        let mut trace = Trace::new(trace_on);
        trace.push(|| TraceRecord::RunStart {
            seed,
            n_uavs: n,
            defense: cfg.scenario.defense,
            sim_time_us: SimTime::from_secs_f64(cfg.scenario.sim_time_s).as_micros(),
        });
        let malicious = roles.keys().copied().collect();
        Ok(Self {
            radio: cfg.radio_model(),
            end: SimTime::from_secs_f64(cfg.scenario.sim_time_s),
            q: EventQueue::new(),
            nodes,
            mobility,
            fmt,
            group,
            ta_public: ta.public_key(),
            signed_ids,
            secrets,
            flows: Vec::new(),
            next_uid: 0,
            next_hs: 0,
            rng: stream_rng(seed, RngStream::Protocol),
            trace,
            stats: Stats::default(),
            detected: BTreeSet::new(),
            malicious,
            cfg,
            finished: false,
        })
    }

    fn install_agent(&mut self, home: NodeId, first_cycle: Option<SimTime>) {
        let node = &mut self.nodes[home.index()];
        let dormant = match node.role {
            Role::Honest => false,
            Role::Adversary(p) => !p.false_confidence,
        };
        node.agent = Some(HomeAgent {
            state: SmartAgent::new(home),
            identity: AgentIdentity::Genuine(self.secrets.agent_kit()),
            first_departure: SimTime::ZERO,
            pending_warnings: Vec::new(),
        });
        if let (Some(at), false) = (first_cycle, dormant) {
            self.at(at, Ev::AgentCycle { node: home });
        }
    }

    fn pick_flows(&mut self) {
        let honest: Vec<NodeId> = self.nodes.iter().filter(|n| n.role.is_honest()).map(|n| n.id).collect();
        if honest.len() < 2 {
            return;
        }
        let mut rng = stream_rng(self.cfg.scenario.seed, RngStream::Traffic);
        for _ in 0..self.cfg.traffic.flows {
            let s = honest[rng.gen_range(0..honest.len())];
            let mut d = s;
            while d == s {
                d = honest[rng.gen_range(0..honest.len())];
            }
            self.flows.push((s, d));
        }
    }

    fn schedule_common(&mut self) {
        for n in &self.nodes {
            self.trace.push(|| TraceRecord::Role {
                node: n.id,
                role: n.role.name().to_string(),
                agent: n.agent.is_some(),
            });
        }
        let hello = self.cfg.protocol.hello_period_s;
        for i in 0..self.nodes.len() {
            let at = SimTime::from_secs_f64(self.rng.gen_range(0.0..hello));
            self.at(at, Ev::Hello { node: NodeId::from_index(i) });
        }
        if self.cfg.mobility.speed_mps > 0.0 {
            self.at(self.tick(), Ev::Mobility);
        }
        if self.cfg.traffic.rate_pps > 0.0 {
            let period = 1.0 / self.cfg.traffic.rate_pps;
            for f in 0..self.flows.len() {
                let at = self.cfg.traffic.start_s + self.rng.gen_range(0.0..period);
                self.at(SimTime::from_secs_f64(at), Ev::Traffic { flow: f });
            }
        }
        if self.cfg.scenario.defense {
            let at = self.cfg.scenario.deployment_s + self.cfg.detector.bucket_s;
            self.at(SimTime::from_secs_f64(at), Ev::DetectorTick);
        }
        // Without the defense there is no agent platform to impersonate.
        let fake: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| self.cfg.scenario.defense && matches!(n.role, Role::Adversary(p) if p.injects_fake_agents))
            .map(|n| n.id)
            .collect();
        for id in fake {
            let at = self.cfg.scenario.deployment_s + self.rng.gen_range(0.0..self.cfg.adversary.fake_agent_interval_s);
            self.at(SimTime::from_secs_f64(at), Ev::FakeAgent { node: id });
        }
        self.at(self.end, Ev::End);
    }

    fn tick(&self) -> SimTime {
        SimTime::from_secs_f64(self.cfg.mobility.tick_ms / 1000.0)
    }

    pub(crate) fn at(&mut self, t: SimTime, ev: Ev) {
        let t = t.max(self.q.now());
        self.q.schedule(t, ev).expect("clamped to now");
    }

    pub(crate) fn after(&mut self, d: SimTime, ev: Ev) {
        self.q.schedule_in(d, ev);
    }

    pub(crate) fn now(&self) -> SimTime {
        self.q.now()
    }

    pub(crate) fn t(&self) -> u64 {
        self.q.now().as_micros()
    }

    pub fn clock(&self) -> SimTime {
        self.q.now()
    }

    pub fn node(&self, id: NodeId) -> &UavNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[UavNode] {
        &self.nodes
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn positions(&self) -> &[Position] {
        self.mobility.positions()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn detected(&self) -> &BTreeSet<NodeId> {
        &self.detected
    }

    pub fn malicious(&self) -> &BTreeSet<NodeId> {
        &self.malicious
    }

    pub fn flows(&self) -> &[(NodeId, NodeId)] {
        &self.flows
    }

    /// Processes one event. Returns its time, or None once the run is over.
    pub fn step(&mut self) -> Option<SimTime> {
        if self.finished {
            return None;
        }
        let Some(s) = self.q.pop() else {
            self.finished = true;
            return None;
        };
        self.dispatch(s.event);
        Some(s.time)
    }

    /// Processes every event scheduled at or before `t`.
    pub fn run_until(&mut self, t: SimTime) {
        while !self.finished && self.q.peek_time().is_some_and(|next| next <= t) {
            self.step();
        }
    }

    pub fn run(mut self) -> RunOutput {
        while self.step().is_some() {}
        self.finish()
    }

    fn dispatch(&mut self, ev: Ev) {
        match ev {
            Ev::Deliver { to, from, pkt, body } => self.on_deliver(to, from, pkt, body),
            Ev::LinkFail { node, next, data } => self.on_link_fail(node, next, data),
            Ev::Hello { node } => self.on_hello_timer(node),
            Ev::Mobility => {
                let dt = self.cfg.mobility.tick_ms / 1000.0;
                let alive: Vec<bool> = self.nodes.iter().map(|n| n.alive()).collect();
                self.mobility.move_nodes(dt, &alive);
                self.after(self.tick(), Ev::Mobility);
            }
            Ev::Traffic { flow } => self.on_traffic(flow),
            Ev::AgentCycle { node } => self.on_agent_cycle(node),
            Ev::MigrationTimeout { home, neighbor, attempt, cycle } => {
                self.on_migration_timeout(home, neighbor, attempt, cycle)
            }
            Ev::MigrationRetry { home, neighbor, attempt, cycle } => self.on_migration_retry(home, neighbor, attempt, cycle),
            Ev::HandshakeDone { host, hs } => self.on_handshake_done(host, hs),
            Ev::CycleEnd { home, cycle } => self.on_cycle_end(home, cycle),
            Ev::RouteWindow { node, dst, request_id } => self.on_route_window(node, dst, request_id),
            Ev::Judgement { node, subject } => self.on_judgement(node, subject),
            Ev::DetectorTick => self.on_detector_tick(),
            Ev::FakeAgent { node } => self.on_fake_agent(node),
            Ev::End => self.finished = true,
        }
    }

    /// Current metrics. Valid at any time; final once the run is over.
    pub fn metrics(&self) -> RunMetrics {
        let n = self.nodes.len();
        let fractions: Vec<f64> = self.nodes.iter().map(|n| n.energy.fraction_remaining()).collect();
        RunMetrics {
            seed: self.cfg.scenario.seed,
            n_uavs: n,
            malicious: self.malicious.len(),
            sent: self.stats.sent,
            delivered: self.stats.delivered,
            confusion: classify_all(n, &self.malicious, &self.detected),
            re: compute_re(&fractions),
            comment_requests: self.stats.comment_requests,
            warnings: self.stats.warnings,
            agent_handshakes: self.stats.handshakes,
            agents_lost: self.stats.agents_lost,
            deaths: self.stats.deaths,
            route_violations: self.stats.route_violations,
            events: self.q.processed(),
        }
    }

    pub fn finish(mut self) -> RunOutput {
        let metrics = self.metrics();
        let t = self.t();
        for n in &self.nodes {
            self.trace.push(|| TraceRecord::Energy {
                node: n.id,
                initial_nj: n.energy.initial_nj(),
                remaining_nj: n.energy.remaining_nj(),
            });
        }
        let m = metrics.clone();
        self.trace.push(|| TraceRecord::RunEnd { t, metrics: m });
        RunOutput {
            metrics,
            trace: self.trace.into_records(),
        }
    }
}

/// Builds and runs one scenario.
pub fn run_scenario(cfg: &ScenarioConfig, trace: bool) -> Result<RunOutput, SimError> {
    Ok(World::new(cfg.clone(), trace)?.run())
}
