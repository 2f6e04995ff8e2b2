use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand_chacha::ChaCha8Rng;

use crate::adversary::AdversaryProfile;
use crate::agent::{AgentIdentity, HostCredentials, SmartAgent, TrustOutcome};
use crate::crypto::{NodeKeys, SchnorrGroup};
use crate::detection::CounterWindow;
use crate::kernel::{EnergyState, SimTime};
use crate::protocol::{AgentPacket, BehaviorCounters, Data, NeighborMatrix, NodeId};
use crate::routing::{QuarantineSet, ReplyCandidate, RouteTable, RreqCache};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Role {
    Honest,
    Adversary(AdversaryProfile),
}

impl Role {
    pub fn is_honest(&self) -> bool {
        matches!(self, Role::Honest)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Role::Honest => "honest",
            Role::Adversary(p) => p.kind.name(),
        }
    }
}

/// The agent a node owns as an agent node.
#[derive(Debug, Clone)]
pub struct HomeAgent {
    pub state: SmartAgent,
    pub identity: AgentIdentity,
    /// Departure time of the first attempt to the current target.
    pub first_departure: SimTime,
    /// Neighbors to quarantine when the cycle ends.
    pub pending_warnings: Vec<(NodeId, &'static str)>,
}

/// Executable part of an agent frame; travels beside the wire packet.
#[derive(Debug, Clone)]
pub struct AgentBody {
    pub identity: AgentIdentity,
    pub home: NodeId,
    pub cycle: u64,
    pub leg: Leg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    Outbound,
    Return(TrustOutcome),
}

/// An agent currently running the exchange at this node.
#[derive(Debug, Clone)]
pub struct HostVisit {
    pub from: NodeId,
    pub arrival: SimTime,
    pub pkt: AgentPacket,
    pub body: AgentBody,
    pub hs: u64,
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub request_id: u32,
    pub attempt: u8,
    /// Replies from trusted senders, eligible for selection.
    pub cands: Vec<ReplyCandidate>,
    /// Every reply heard, for the reply-signature rules.
    pub observed: Vec<ReplyCandidate>,
}

#[derive(Debug, Clone)]
pub struct PendingJudgement {
    pub own: BehaviorCounters,
    pub replies: Vec<BehaviorCounters>,
}

/// Full protocol state of one UAV.
#[derive(Debug, Clone)]
pub struct UavNode {
    pub id: NodeId,
    pub role: Role,
    pub keys: NodeKeys<SchnorrGroup>,
    pub creds: HostCredentials,
    pub matrix: NeighborMatrix,
    /// Last verified bits per node, restored when a node comes back in range.
    pub trust_memory: BTreeMap<NodeId, (bool, bool)>,
    pub last_hello: BTreeMap<NodeId, SimTime>,
    pub last_hello_sent: Option<SimTime>,
    pub energy: EnergyState,
    pub routes: RouteTable,
    pub rreq_cache: RreqCache,
    pub seq_no: u32,
    pub next_request: u32,
    pub known_seq: BTreeMap<NodeId, u32>,
    pub discoveries: BTreeMap<NodeId, Discovery>,
    pub buffer: BTreeMap<NodeId, VecDeque<Data>>,
    pub reroutes: BTreeMap<u64, u8>,
    pub agent: Option<HomeAgent>,
    pub hosting: Option<HostVisit>,
    pub window: CounterWindow,
    /// Packets handed to a neighbor for forwarding, keyed by neighbor.
    pub watch: BTreeMap<NodeId, BTreeMap<u64, SimTime>>,
    pub quarantine: QuarantineSet,
    pub judgements: BTreeMap<NodeId, PendingJudgement>,
    pub delivered: BTreeSet<u64>,
    pub rng: ChaCha8Rng,
}

impl UavNode {
    pub fn alive(&self) -> bool {
        self.energy.alive()
    }

    pub fn is_agent_node(&self) -> bool {
        self.agent.is_some()
    }

    /// Sets a neighbor's bits and remembers them.
    pub fn set_bits(&mut self, n: NodeId, valid: bool, agent: bool) {
        if self.matrix.set_trust(n, valid, agent).is_ok() {
            self.trust_memory.insert(n, (valid, agent));
        }
    }
}
