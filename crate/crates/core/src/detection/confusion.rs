use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::protocol::NodeId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, o: &ConfusionMatrix) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

/// Scores `detected` against the malicious ground truth over nodes `0..n`.
pub fn classify_all(n: usize, malicious: &BTreeSet<NodeId>, detected: &BTreeSet<NodeId>) -> ConfusionMatrix {
    let mut c = ConfusionMatrix::default();
    for i in 0..n {
        let id = NodeId::from_index(i);
        match (malicious.contains(&id), detected.contains(&id)) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}
