use serde::{Deserialize, Serialize};

/// Behaviour a node has observed about one neighbor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorCounters {
    /// Data transmissions by the subject that the observer overheard.
    pub data_sent: u32,
    /// Data packets handed to the subject for forwarding.
    pub data_received: u32,
    /// Of those, how many the subject was overheard passing on.
    pub data_forwarded: u32,
    /// Route replies originated by the subject.
    pub rrep_sent: u32,
    /// The subject answered an RREQ ahead of every other replier.
    pub earliest_rrep_flag: bool,
    /// The subject's reply carried both the highest sequence number and the
    /// lowest hop count among replies to the same RREQ.
    pub max_seq_min_hop_flag: bool,
    pub last_rrep_seq: u32,
    pub last_rrep_hops: u8,
}

impl BehaviorCounters {
    /// Forwarded over received; 1.0 when nothing was handed over.
    pub fn forward_ratio(&self) -> f64 {
        if self.data_received == 0 {
            1.0
        } else {
            self.data_forwarded as f64 / self.data_received as f64
        }
    }

    /// Adds `other` in: counts sum, flags OR, the reply fields follow the
    /// most recent non-empty contribution.
    pub fn merge(&mut self, other: &BehaviorCounters) {
        self.data_sent = self.data_sent.saturating_add(other.data_sent);
        self.data_received = self.data_received.saturating_add(other.data_received);
        self.data_forwarded = self.data_forwarded.saturating_add(other.data_forwarded);
        self.rrep_sent = self.rrep_sent.saturating_add(other.rrep_sent);
        self.earliest_rrep_flag |= other.earliest_rrep_flag;
        self.max_seq_min_hop_flag |= other.max_seq_min_hop_flag;
        if other.rrep_sent > 0 {
            self.last_rrep_seq = other.last_rrep_seq;
            self.last_rrep_hops = other.last_rrep_hops;
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == BehaviorCounters::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_sums_and_ors() {
        let mut a = BehaviorCounters {
            data_received: 4,
            data_forwarded: 1,
            rrep_sent: 1,
            last_rrep_seq: 3,
            last_rrep_hops: 2,
            ..Default::default()
        };
        let b = BehaviorCounters {
            data_received: 6,
            earliest_rrep_flag: true,
            ..Default::default()
        };
        a.merge(&b);
        assert_eq!(a.data_received, 10);
        assert_eq!(a.data_forwarded, 1);
        assert!(a.earliest_rrep_flag);
        assert_eq!(a.last_rrep_seq, 3);
        assert!((a.forward_ratio() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn ratio_without_traffic_is_one() {
        assert_eq!(BehaviorCounters::default().forward_ratio(), 1.0);
    }
}
