use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RoutingError;
use crate::kernel::SimTime;
use crate::protocol::{NeighborMatrix, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteEntry {
    pub dst: NodeId,
    pub next_hop: NodeId,
    pub seq_no: u32,
    pub hop_count: u8,
    pub expiry: SimTime,
}

#[derive(Debug, Clone, Default)]
pub struct RouteTable {
    entries: BTreeMap<NodeId, RouteEntry>,
}

impl RouteTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, dst: NodeId, now: SimTime) -> Option<&RouteEntry> {
        self.entries.get(&dst).filter(|e| e.expiry > now)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RouteEntry> {
        self.entries.values()
    }

    /// Installs `e` if it is fresher (higher sequence number) or equally fresh
    /// and shorter than the live entry. Returns true when the table changed.
    pub fn offer(&mut self, e: RouteEntry, now: SimTime) -> bool {
        let replace = match self.lookup(e.dst, now) {
            None => true,
            Some(cur) => {
                e.seq_no > cur.seq_no
                    || (e.seq_no == cur.seq_no && e.hop_count < cur.hop_count)
                    || (e.seq_no == cur.seq_no && e.hop_count == cur.hop_count && e.next_hop == cur.next_hop)
            }
        };
        if replace {
            self.entries.insert(e.dst, e);
        }
        replace
    }

    /// Like [`RouteTable::offer`] but refuses next hops that are not valid in
    /// `matrix`.
    pub fn offer_trusted(&mut self, e: RouteEntry, matrix: &NeighborMatrix, now: SimTime) -> Result<bool, RoutingError> {
        if !matrix.is_valid(e.next_hop) {
            return Err(RoutingError::UntrustedNextHop(e.next_hop));
        }
        Ok(self.offer(e, now))
    }

    /// Unconditional install.
    pub fn install(&mut self, e: RouteEntry) {
        self.entries.insert(e.dst, e);
    }

    pub fn invalidate(&mut self, dst: NodeId) -> Option<RouteEntry> {
        self.entries.remove(&dst)
    }

    /// Removes every entry that leads to or through `n`.
    pub fn purge_node(&mut self, n: NodeId) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.dst != n && e.next_hop != n);
        before - self.entries.len()
    }

    /// Removes entries whose next hop is `n`, returning their destinations.
    pub fn drop_next_hop(&mut self, n: NodeId) -> Vec<NodeId> {
        let gone: Vec<NodeId> = self.entries.values().filter(|e| e.next_hop == n).map(|e| e.dst).collect();
        for d in &gone {
            self.entries.remove(d);
        }
        gone
    }

    pub fn expire(&mut self, now: SimTime) {
        self.entries.retain(|_, e| e.expiry > now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(dst: u32, next: u32, seq: u32, hops: u8) -> RouteEntry {
        RouteEntry {
            dst: NodeId(dst),
            next_hop: NodeId(next),
            seq_no: seq,
            hop_count: hops,
            expiry: SimTime::from_secs_f64(10.0),
        }
    }

    #[test]
    fn fresher_or_shorter_wins() {
        let now = SimTime::ZERO;
        let mut t = RouteTable::new();
        assert!(t.offer(entry(9, 1, 5, 3), now));
        assert!(!t.offer(entry(9, 2, 4, 1), now));
        assert!(t.offer(entry(9, 2, 5, 2), now));
        assert!(t.offer(entry(9, 3, 6, 4), now));
        assert_eq!(t.lookup(NodeId(9), now).unwrap().next_hop, NodeId(3));
        assert!(t.lookup(NodeId(9), SimTime::from_secs_f64(10.0)).is_none());
    }

    #[test]
    fn purge_and_trust_gate() {
        let now = SimTime::ZERO;
        let mut t = RouteTable::new();
        t.install(entry(9, 1, 1, 2));
        t.install(entry(1, 1, 1, 1));
        t.install(entry(7, 2, 1, 2));
        assert_eq!(t.purge_node(NodeId(1)), 2);
        assert_eq!(t.len(), 1);
        let mut m = NeighborMatrix::new();
        m.process_hello(NodeId(4), 1.0, now);
        assert_eq!(
            t.offer_trusted(entry(8, 4, 1, 1), &m, now),
            Err(RoutingError::UntrustedNextHop(NodeId(4)))
        );
        m.set_trust(NodeId(4), true, false).unwrap();
        assert_eq!(t.offer_trusted(entry(8, 4, 1, 1), &m, now), Ok(true));
    }
}
