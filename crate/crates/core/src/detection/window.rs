use std::collections::{BTreeMap, VecDeque};

use crate::protocol::{BehaviorCounters, NodeId};

/// Sliding window of per-subject counters made of fixed-length buckets.
#[derive(Debug, Clone)]
pub struct CounterWindow {
    buckets: VecDeque<BTreeMap<NodeId, BehaviorCounters>>,
    capacity: usize,
}

impl CounterWindow {
    pub fn new(buckets: usize) -> Self {
        let capacity = buckets.max(1);
        let mut b = VecDeque::with_capacity(capacity);
        b.push_back(BTreeMap::new());
        Self { buckets: b, capacity }
    }

    /// Updates the current bucket's counters for `subject`.
    pub fn record(&mut self, subject: NodeId, f: impl FnOnce(&mut BehaviorCounters)) {
        let cur = self.buckets.back_mut().expect("never empty");
        f(cur.entry(subject).or_default());
    }

    /// Starts a new bucket, dropping the oldest once full.
    pub fn rotate(&mut self) {
        self.buckets.push_back(BTreeMap::new());
        while self.buckets.len() > self.capacity {
            self.buckets.pop_front();
        }
    }

    pub fn total(&self, subject: NodeId) -> BehaviorCounters {
        let mut out = BehaviorCounters::default();
        for b in &self.buckets {
            if let Some(c) = b.get(&subject) {
                out.merge(c);
            }
        }
        out
    }

    pub fn totals(&self) -> BTreeMap<NodeId, BehaviorCounters> {
        let mut out: BTreeMap<NodeId, BehaviorCounters> = BTreeMap::new();
        for b in &self.buckets {
            for (k, c) in b {
                out.entry(*k).or_default().merge(c);
            }
        }
        out
    }

    pub fn forget(&mut self, subject: NodeId) {
        for b in &mut self.buckets {
            b.remove(&subject);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn old_buckets_fall_out() {
        let mut w = CounterWindow::new(3);
        w.record(NodeId(1), |c| c.data_received += 5);
        w.rotate();
        w.record(NodeId(1), |c| c.data_received += 2);
        w.rotate();
        assert_eq!(w.total(NodeId(1)).data_received, 7);
        w.rotate();
        assert_eq!(w.total(NodeId(1)).data_received, 2);
        w.rotate();
        assert!(w.total(NodeId(1)).is_empty());
        assert!(w.totals().is_empty());
    }
}
