use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DetectionError, DetectorConfig};
use crate::protocol::{BehaviorCounters, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Clear,
    Suspect,
    Confirmed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suspicion {
    pub subject: NodeId,
    pub level: Level,
    pub evidence: BTreeSet<Rule>,
    pub votes_for: u32,
    pub votes_against: u32,
}

/// Applies the six rules to one subject's counters.
///
/// R4 (drops plus a route reply) confirms outright. Otherwise an R1
/// exoneration clears, and any of R2, R5, R6 makes the subject a suspect.
/// R3 on its own only enables the neighbor comment round.
pub fn evaluate_rules(subject: NodeId, c: &BehaviorCounters, cfg: &DetectorConfig) -> Suspicion {
    let ratio = c.forward_ratio();
    let mut ev = BTreeSet::new();
    if c.data_sent > 0 && ratio >= cfg.forward_ratio_threshold {
        ev.insert(Rule::R1);
    }
    let r2 = c.data_received >= cfg.n_min && ratio < cfg.forward_ratio_threshold;
    if r2 {
        ev.insert(Rule::R2);
    }
    let r3 = c.rrep_sent >= 1;
    if r3 {
        ev.insert(Rule::R3);
    }
    if r2 && r3 {
        ev.insert(Rule::R4);
    }
    if c.earliest_rrep_flag {
        ev.insert(Rule::R5);
    }
    if c.max_seq_min_hop_flag {
        ev.insert(Rule::R6);
    }
    let level = if ev.contains(&Rule::R4) {
        Level::Confirmed
    } else if ev.contains(&Rule::R1) {
        Level::Clear
    } else if r2 || ev.contains(&Rule::R5) || ev.contains(&Rule::R6) {
        Level::Suspect
    } else {
        Level::Clear
    };
    Suspicion {
        subject,
        level,
        evidence: ev,
        votes_for: 0,
        votes_against: 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// Rules evaluated over the summed counters, with the votes filled in.
    pub suspicion: Suspicion,
    pub malicious: bool,
}

/// Judges a subject from the initiator's own counters and the neighbors'
/// replies. Counters are summed; each reply also votes with its own level.
pub fn judge(
    subject: NodeId,
    own: &BehaviorCounters,
    replies: &[BehaviorCounters],
    cfg: &DetectorConfig,
) -> Result<Verdict, DetectionError> {
    if replies.is_empty() {
        return Err(DetectionError::NoResponders(subject));
    }
    let mut merged = *own;
    let mut votes_for = 0u32;
    for r in replies {
        merged.merge(r);
        if evaluate_rules(subject, r, cfg).level >= Level::Suspect {
            votes_for += 1;
        }
    }
    let mut s = evaluate_rules(subject, &merged, cfg);
    s.votes_for = votes_for;
    s.votes_against = replies.len() as u32 - votes_for;
    let share = votes_for as f64 / replies.len() as f64;
    let malicious = s.level == Level::Confirmed || (s.level == Level::Suspect && share >= cfg.vote_quorum);
    Ok(Verdict { suspicion: s, malicious })
}
