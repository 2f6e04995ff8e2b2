use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ids::NodeId;
use super::packet::{Confidence, TrustTuple};
use super::ProtocolError;
use crate::kernel::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    pub valid: bool,
    pub agent: bool,
    pub last_rss: f64,
    pub last_seen: SimTime,
}

/// What happened to a weak neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eviction {
    Retained,
    Evicted,
    /// Evicted, and the owner should broadcast a rediscovery control packet.
    EvictedWithControl,
}

/// One-hop neighbor table with valid and agent bits.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NeighborMatrix {
    entries: BTreeMap<NodeId, NeighborEntry>,
    banned: BTreeSet<NodeId>,
}

impl NeighborMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: NodeId) -> Option<&NeighborEntry> {
        self.entries.get(&n)
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.entries.contains_key(&n)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &NeighborEntry> {
        self.entries.values()
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.entries.keys().copied().collect()
    }

    pub fn is_valid(&self, n: NodeId) -> bool {
        self.entries.get(&n).is_some_and(|e| e.valid)
    }

    pub fn is_banned(&self, n: NodeId) -> bool {
        self.banned.contains(&n)
    }

    pub fn valid_neighbors(&self) -> Vec<NodeId> {
        self.iter().filter(|e| e.valid).map(|e| e.neighbor).collect()
    }

    /// Records a HELLO. New entries start with both bits clear; an existing
    /// entry keeps its bits and refreshes `last_seen`. Quarantined senders are
    /// ignored. Returns true if a new entry was created.
    pub fn process_hello(&mut self, src: NodeId, rss: f64, now: SimTime) -> bool {
        if self.banned.contains(&src) {
            return false;
        }
        match self.entries.get_mut(&src) {
            Some(e) => {
                e.last_seen = now;
                e.last_rss = rss;
                false
            }
            None => {
                self.entries.insert(
                    src,
                    NeighborEntry {
                        neighbor: src,
                        valid: false,
                        agent: false,
                        last_rss: rss,
                        last_seen: now,
                    },
                );
                true
            }
        }
    }

    /// Applies a Confidence packet from a trusted source. Tuples naming nodes
    /// outside the matrix are skipped. Returns how many entries changed.
    pub fn apply_confidence(&mut self, c: &Confidence) -> Result<usize, ProtocolError> {
        if !self.is_valid(c.src) {
            return Err(ProtocolError::UntrustedSource(c.src));
        }
        let mut changed = 0;
        for t in &c.trusted {
            if let Some(e) = self.entries.get_mut(&t.node) {
                if e.valid != t.valid || e.agent != t.agent {
                    e.valid = t.valid;
                    e.agent = t.agent;
                    changed += 1;
                }
            }
        }
        Ok(changed)
    }

    pub fn set_trust(&mut self, n: NodeId, valid: bool, agent: bool) -> Result<(), ProtocolError> {
        let e = self
            .entries
            .get_mut(&n)
            .ok_or(ProtocolError::UnknownNeighbor(n))?;
        e.valid = valid;
        e.agent = agent;
        Ok(())
    }

    pub fn set_agent(&mut self, n: NodeId, agent: bool) -> Result<(), ProtocolError> {
        let e = self
            .entries
            .get_mut(&n)
            .ok_or(ProtocolError::UnknownNeighbor(n))?;
        e.agent = agent;
        Ok(())
    }

    /// Drops `n` if its signal proxy fell below `threshold`. The control flag
    /// is raised when the evicted node did not host an agent and the owner
    /// does.
    pub fn evict_weak(&mut self, n: NodeId, rss: f64, threshold: f64, owner_hosts_agent: bool) -> Eviction {
        let Some(e) = self.entries.get_mut(&n) else {
            return Eviction::Retained;
        };
        if rss >= threshold {
            e.last_rss = rss;
            return Eviction::Retained;
        }
        let had_agent = e.agent;
        self.entries.remove(&n);
        if !had_agent && owner_hosts_agent {
            Eviction::EvictedWithControl
        } else {
            Eviction::Evicted
        }
    }

    /// Removes entries not refreshed within `max_age`.
    pub fn expire(&mut self, now: SimTime, max_age: SimTime) -> Vec<NodeId> {
        let stale: Vec<NodeId> = self
            .entries
            .values()
            .filter(|e| now.saturating_sub(e.last_seen) > max_age)
            .map(|e| e.neighbor)
            .collect();
        for n in &stale {
            self.entries.remove(n);
        }
        stale
    }

    pub fn remove(&mut self, n: NodeId) -> Option<NeighborEntry> {
        self.entries.remove(&n)
    }

    /// Removes `n` and refuses it from now on.
    pub fn quarantine(&mut self, n: NodeId) {
        self.entries.remove(&n);
        self.banned.insert(n);
    }

    /// The tuples an agent node advertises: itself plus every valid entry.
    pub fn confidence_tuples(&self, me: NodeId) -> Vec<TrustTuple> {
        let mut out = vec![TrustTuple {
            node: me,
            valid: true,
            agent: true,
        }];
        out.extend(self.iter().filter(|e| e.valid).map(|e| TrustTuple {
            node: e.neighbor,
            valid: e.valid,
            agent: e.agent,
        }));
        out
    }

    /// (valid, agent) bits per neighbor, for table comparisons.
    pub fn bits(&self) -> BTreeMap<NodeId, (bool, bool)> {
        self.iter().map(|e| (e.neighbor, (e.valid, e.agent))).collect()
    }
}
