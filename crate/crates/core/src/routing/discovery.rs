use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::protocol::NodeId;

/// A route reply as seen by the RREQ originator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyCandidate {
    pub replier: NodeId,
    /// Neighbor that delivered the reply.
    pub next_hop: NodeId,
    pub seq_no: u32,
    /// Hops from the originator to the advertised destination.
    pub hop_count: u8,
    pub arrival: SimTime,
}

/// Highest sequence number, then fewest hops, then earliest arrival, then
/// lowest replier id.
pub fn select_reply(cands: &[ReplyCandidate]) -> Option<&ReplyCandidate> {
    cands.iter().min_by(|a, b| {
        b.seq_no
            .cmp(&a.seq_no)
            .then(a.hop_count.cmp(&b.hop_count))
            .then(a.arrival.cmp(&b.arrival))
            .then(a.replier.cmp(&b.replier))
    })
}

/// Reply signatures per replier for one request.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplyFlags {
    /// First reply arrived at least `margin` before every other replier's.
    pub earliest: bool,
    /// Carried both the maximum sequence number and the minimum hop count.
    pub max_seq_min_hop: bool,
}

/// Computes the flags over replies to one request. Both need at least two
/// distinct repliers.
pub fn reply_flags(cands: &[ReplyCandidate], margin: SimTime) -> BTreeMap<NodeId, ReplyFlags> {
    let mut first: BTreeMap<NodeId, ReplyCandidate> = BTreeMap::new();
    for c in cands {
        first
            .entry(c.replier)
            .and_modify(|cur| {
                if c.arrival < cur.arrival {
                    *cur = *c
                }
            })
            .or_insert(*c);
    }
    let mut out: BTreeMap<NodeId, ReplyFlags> = first.keys().map(|k| (*k, ReplyFlags::default())).collect();
    if first.len() < 2 {
        return out;
    }
    let max_seq = cands.iter().map(|c| c.seq_no).max().unwrap_or(0);
    let min_hops = cands.iter().map(|c| c.hop_count).min().unwrap_or(0);
    for c in cands {
        if c.seq_no == max_seq && c.hop_count == min_hops {
            out.get_mut(&c.replier).unwrap().max_seq_min_hop = true;
        }
    }
    for (r, c) in &first {
        let ahead = first
            .iter()
            .filter(|(o, _)| *o != r)
            .all(|(_, o)| o.arrival.as_micros() >= c.arrival.as_micros() + margin.as_micros());
        if ahead {
            out.get_mut(r).unwrap().earliest = true;
        }
    }
    out
}

/// Duplicate suppression for flooded requests.
#[derive(Debug, Clone, Default)]
pub struct RreqCache {
    seen: BTreeSet<(NodeId, u32)>,
}

impl RreqCache {
    /// True the first time `(origin, request_id)` is offered.
    pub fn first_time(&mut self, origin: NodeId, request_id: u32) -> bool {
        self.seen.insert((origin, request_id))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}
