//! Behavioural detector: rules over observed counters, the neighbor
//! comment round and scoring against ground truth.

mod confusion;
mod rules;
mod window;

pub use confusion::{classify_all, ConfusionMatrix};
pub use rules::{evaluate_rules, judge, Level, Rule, Suspicion, Verdict};
pub use window::CounterWindow;

use serde::{Deserialize, Serialize};

use crate::protocol::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectionError {
    #[error("no neighbor answered the comment request about {0}")]
    NoResponders(NodeId),
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub window_s: f64,
    /// Evaluation period and bucket length.
    pub bucket_s: f64,
    /// Received-packet count that counts as "many".
    pub n_min: u32,
    pub forward_ratio_threshold: f64,
    pub vote_quorum: f64,
    pub earliest_margin_ms: f64,
    /// How long the initiator waits for comment replies.
    pub judgement_ms: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window_s: 30.0,
            bucket_s: 5.0,
            n_min: 10,
            forward_ratio_threshold: 0.2,
            vote_quorum: 0.5,
            earliest_margin_ms: 10.0,
            judgement_ms: 200.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectionError> {
        let bad = |s: &str| Err(DetectionError::InvalidConfig(s.into()));
        if !(self.forward_ratio_threshold > 0.0 && self.forward_ratio_threshold < 1.0) {
            return bad("forward_ratio_threshold must be in (0, 1)");
        }
        if !(self.vote_quorum > 0.0 && self.vote_quorum <= 1.0) {
            return bad("vote_quorum must be in (0, 1]");
        }
        if !(self.bucket_s > 0.0 && self.window_s >= self.bucket_s) {
            return bad("need 0 < bucket_s <= window_s");
        }
        if self.earliest_margin_ms < 0.0 || self.judgement_ms <= 0.0 {
            return bad("earliest_margin_ms must be >= 0 and judgement_ms > 0");
        }
        Ok(())
    }

    pub fn buckets(&self) -> usize {
        (self.window_s / self.bucket_s).round().max(1.0) as usize
    }
}
