use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::handshake::TrustOutcome;
use super::AgentError;
use crate::kernel::SimTime;
use crate::protocol::{NeighborMatrix, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentCycleConfig {
    /// Seconds between cycles, drawn uniformly from `[period_min, period_max]`.
    pub period_min: f64,
    pub period_max: f64,
    pub migration_timeout_ms: f64,
    pub backoff_min_ms: f64,
    pub backoff_max_ms: f64,
    /// Initial send plus retries.
    pub max_attempts: u8,
    pub agent_fraction: f64,
    /// Time an agent spends at a host running the exchange.
    pub handshake_ms: f64,
}

impl Default for AgentCycleConfig {
    fn default() -> Self {
        Self {
            period_min: 5.0,
            period_max: 10.0,
            migration_timeout_ms: 500.0,
            backoff_min_ms: 100.0,
            backoff_max_ms: 400.0,
            max_attempts: 3,
            agent_fraction: 0.2,
            handshake_ms: 1.0,
        }
    }
}

impl AgentCycleConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |s: &str| Err(AgentError::InvalidConfig(s.to_string()));
        if !(self.period_min > 0.0 && self.period_min <= self.period_max) {
            return bad("need 0 < period_min <= period_max");
        }
        if !(self.agent_fraction > 0.0 && self.agent_fraction <= 1.0) {
            return bad("agent_fraction must be in (0, 1]");
        }
        if self.migration_timeout_ms <= 0.0 {
            return bad("migration_timeout_ms must be positive");
        }
        if !(self.backoff_min_ms >= 0.0 && self.backoff_min_ms <= self.backoff_max_ms) {
            return bad("need 0 <= backoff_min_ms <= backoff_max_ms");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        if self.handshake_ms < 0.0 {
            return bad("handshake_ms must be non-negative");
        }
        Ok(())
    }

    pub fn next_period<R: Rng + ?Sized>(&self, rng: &mut R) -> SimTime {
        SimTime::from_secs_f64(uniform(rng, self.period_min, self.period_max))
    }

    pub fn backoff<R: Rng + ?Sized>(&self, rng: &mut R) -> SimTime {
        SimTime::from_secs_f64(uniform(rng, self.backoff_min_ms, self.backoff_max_ms) / 1000.0)
    }

    pub fn timeout(&self) -> SimTime {
        SimTime::from_secs_f64(self.migration_timeout_ms / 1000.0)
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Picks `ceil(fraction * n)` distinct nodes uniformly, returned in
/// ascending order. Roles are not consulted.
pub fn seed_agents<R: Rng + ?Sized>(n: usize, fraction: f64, rng: &mut R) -> Result<Vec<NodeId>, AgentError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AgentError::InvalidConfig("agent_fraction must be in (0, 1]".into()));
    }
    let k = ((fraction * n as f64).ceil() as usize).min(n);
    let mut picked: Vec<NodeId> = sample(rng, n, k).into_iter().map(NodeId::from_index).collect();
    picked.sort();
    Ok(picked)
}

/// Lowest-id neighbor that is valid and has no agent.
pub fn select_handoff(matrix: &NeighborMatrix) -> Option<NodeId> {
    matrix.iter().find(|e| e.valid && !e.agent).map(|e| e.neighbor)
}

/// Of several agents reaching one host close together, keeps the latest
/// arrival; equal times go to the lower home id.
pub fn resolve_arrivals(arrivals: &[(SimTime, NodeId)]) -> Option<NodeId> {
    arrivals
        .iter()
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|a| a.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentState {
    Idle,
    Visiting {
        neighbor: NodeId,
        departure: SimTime,
        attempt: u8,
    },
}

/// What the home should do after a migration timeout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeoutAction {
    /// Re-send after a random backoff; `attempt` is the upcoming attempt.
    Retry { attempt: u8 },
    /// Attempts exhausted.
    GiveUp,
    /// The timeout no longer matches the agent's state.
    Stale,
}

/// Per-visit record kept for the end-of-cycle update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VisitResult {
    Returned(TrustOutcome),
    Lost,
}

/// Protocol state of one smart agent. The agent program itself (hash and
/// codes) stays with the node that hosts it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmartAgent {
    pub home: NodeId,
    pub state: AgentState,
    pub cycle: u64,
    queue: Vec<NodeId>,
    results: BTreeMap<NodeId, VisitResult>,
}

impl SmartAgent {
    pub fn new(home: NodeId) -> Self {
        Self {
            home,
            state: AgentState::Idle,
            cycle: 0,
            queue: Vec::new(),
            results: BTreeMap::new(),
        }
    }

    pub fn is_idle(&self) -> bool {
        self.state == AgentState::Idle
    }

    pub fn in_cycle(&self) -> bool {
        !self.is_idle() || !self.queue.is_empty()
    }

    pub fn results(&self) -> &BTreeMap<NodeId, VisitResult> {
        &self.results
    }

    /// Starts a cycle over `neighbors` (visited in ascending order). Returns
    /// the first target, or None for an empty neighborhood.
    pub fn begin_cycle(&mut self, mut neighbors: Vec<NodeId>) -> Option<NodeId> {
        neighbors.sort();
        neighbors.dedup();
        neighbors.retain(|n| *n != self.home);
        neighbors.reverse();
        self.queue = neighbors;
        self.results.clear();
        self.cycle += 1;
        self.state = AgentState::Idle;
        self.queue.pop()
    }

    pub fn depart(&mut self, neighbor: NodeId, now: SimTime, attempt: u8) {
        self.state = AgentState::Visiting {
            neighbor,
            departure: now,
            attempt,
        };
    }

    pub fn visiting(&self) -> Option<(NodeId, u8)> {
        match self.state {
            AgentState::Visiting { neighbor, attempt, .. } => Some((neighbor, attempt)),
            AgentState::Idle => None,
        }
    }

    /// Records a result for the current target and returns the next one.
    pub fn finish_visit(&mut self, neighbor: NodeId, result: VisitResult) -> Option<NodeId> {
        self.results.insert(neighbor, result);
        self.state = AgentState::Idle;
        self.queue.pop()
    }

    /// Drops a pending target (it left the neighborhood before its turn).
    pub fn skip(&mut self, neighbor: NodeId) {
        self.queue.retain(|n| *n != neighbor);
    }

    pub fn on_timeout(&self, neighbor: NodeId, attempt: u8, max_attempts: u8) -> TimeoutAction {
        match self.state {
            AgentState::Visiting {
                neighbor: n,
                attempt: a,
                ..
            } if n == neighbor && a == attempt => {
                if a < max_attempts {
                    TimeoutAction::Retry { attempt: a + 1 }
                } else {
                    TimeoutAction::GiveUp
                }
            }
            _ => TimeoutAction::Stale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{stream_rng, RngStream};

    #[test]
    fn seeding_counts() {
        let mut rng = stream_rng(1, RngStream::Agents);
        assert_eq!(seed_agents(10, 0.2, &mut rng).unwrap().len(), 2);
        assert_eq!(seed_agents(10, 1.0, &mut rng).unwrap().len(), 10);
        assert_eq!(seed_agents(7, 0.2, &mut rng).unwrap().len(), 2);
        assert!(seed_agents(10, 0.0, &mut rng).is_err());
        let a = seed_agents(100, 0.2, &mut stream_rng(9, RngStream::Agents)).unwrap();
        let b = seed_agents(100, 0.2, &mut stream_rng(9, RngStream::Agents)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn visit_order_and_retry() {
        let mut a = SmartAgent::new(NodeId(0));
        let first = a.begin_cycle(vec![NodeId(5), NodeId(2), NodeId(9)]);
        assert_eq!(first, Some(NodeId(2)));
        a.depart(NodeId(2), SimTime::ZERO, 1);
        assert_eq!(a.on_timeout(NodeId(2), 1, 3), TimeoutAction::Retry { attempt: 2 });
        assert_eq!(a.on_timeout(NodeId(2), 2, 3), TimeoutAction::Stale);
        a.depart(NodeId(2), SimTime::from_millis(700), 2);
        let next = a.finish_visit(NodeId(2), VisitResult::Returned(TrustOutcome::MutualTrust));
        assert_eq!(next, Some(NodeId(5)));
        a.depart(NodeId(5), SimTime::from_millis(800), 3);
        assert_eq!(a.on_timeout(NodeId(5), 3, 3), TimeoutAction::GiveUp);
        assert_eq!(a.finish_visit(NodeId(5), VisitResult::Lost), Some(NodeId(9)));
        assert_eq!(a.finish_visit(NodeId(9), VisitResult::Lost), None);
        assert!(!a.in_cycle());
    }

    #[test]
    fn empty_neighborhood() {
        let mut a = SmartAgent::new(NodeId(0));
        assert_eq!(a.begin_cycle(vec![]), None);
        assert!(!a.in_cycle());
    }

    #[test]
    fn handoff_picks_lowest_valid_agent_free() {
        let mut m = NeighborMatrix::new();
        for i in [3, 4, 6] {
            m.process_hello(NodeId(i), 1.0, SimTime::ZERO);
        }
        m.set_trust(NodeId(3), true, true).unwrap();
        m.set_trust(NodeId(4), false, false).unwrap();
        m.set_trust(NodeId(6), true, false).unwrap();
        assert_eq!(select_handoff(&m), Some(NodeId(6)));
        m.set_trust(NodeId(6), true, true).unwrap();
        assert_eq!(select_handoff(&m), None);
    }

    #[test]
    fn later_arrival_wins() {
        let t = SimTime::from_millis;
        assert_eq!(resolve_arrivals(&[(t(1), NodeId(4)), (t(2), NodeId(9))]), Some(NodeId(9)));
        assert_eq!(resolve_arrivals(&[(t(2), NodeId(4)), (t(2), NodeId(1))]), Some(NodeId(1)));
    }

    #[test]
    fn config_validation() {
        assert!(AgentCycleConfig::default().validate().is_ok());
        let c = AgentCycleConfig { period_min: 11.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
