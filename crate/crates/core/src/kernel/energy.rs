use serde::{Deserialize, Serialize};

pub const NJ_PER_J: f64 = 1e9;

pub fn joules_to_nj(j: f64) -> u64 {
    (j * NJ_PER_J).round().max(0.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeKind {
    Tx,
    Rx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeOutcome {
    Charged,
    /// This charge took the node to or below its death threshold.
    Died,
    /// The node was already dead; nothing changed.
    AlreadyDead,
}

/// Battery state of one node, kept in integer nanojoules so that
/// `initial - remaining` equals the sum of charged costs exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyState {
    initial_nj: u64,
    remaining_nj: u64,
    threshold_nj: u64,
    alive: bool,
}

impl EnergyState {
    pub fn new(initial_nj: u64, threshold_nj: u64) -> Self {
        Self {
            initial_nj,
            remaining_nj: initial_nj,
            threshold_nj,
            alive: initial_nj > threshold_nj,
        }
    }

    pub fn with_remaining(mut self, remaining_nj: u64) -> Self {
        self.remaining_nj = remaining_nj.min(self.initial_nj);
        self.alive = self.remaining_nj > self.threshold_nj;
        self
    }

    pub fn initial_nj(&self) -> u64 {
        self.initial_nj
    }

    pub fn remaining_nj(&self) -> u64 {
        self.remaining_nj
    }

    pub fn consumed_nj(&self) -> u64 {
        self.initial_nj - self.remaining_nj
    }

    pub fn remaining_j(&self) -> f64 {
        self.remaining_nj as f64 / NJ_PER_J
    }

    pub fn fraction_remaining(&self) -> f64 {
        if self.initial_nj == 0 {
            return 0.0;
        }
        self.remaining_nj as f64 / self.initial_nj as f64
    }

    pub fn alive(&self) -> bool {
        self.alive
    }

    /// Marks the node dead without consuming energy (used after a dying
    /// node has sent its last packets).
    pub fn kill(&mut self) {
        self.alive = false;
    }

    pub fn charge(&mut self, cost_nj: u64) -> ChargeOutcome {
        if !self.alive {
            return ChargeOutcome::AlreadyDead;
        }
        self.remaining_nj = self.remaining_nj.saturating_sub(cost_nj);
        if self.remaining_nj <= self.threshold_nj {
            self.alive = false;
            ChargeOutcome::Died
        } else {
            ChargeOutcome::Charged
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RadioModel;

    #[test]
    fn tx_charge_matches_hand_arithmetic() {
        let radio = RadioModel::default();
        let mut e = EnergyState::new(joules_to_nj(1.0), 0);
        assert_eq!(e.charge(radio.tx.cost(512)), ChargeOutcome::Charged);
        assert_eq!(e.remaining_nj(), 1_000_000_000 - 712_000);
        assert!((e.remaining_j() - (1.0 - 0.000712)).abs() < 1e-15);
    }

    #[test]
    fn hitting_threshold_exactly_kills() {
        let mut e = EnergyState::new(1_000, 500);
        assert_eq!(e.charge(499), ChargeOutcome::Charged);
        assert!(e.alive());
        assert_eq!(e.charge(1), ChargeOutcome::Died);
        assert!(!e.alive());
        assert_eq!(e.remaining_nj(), 500);
    }

    #[test]
    fn charging_dead_node_is_noop() {
        let mut e = EnergyState::new(1_000, 500);
        e.charge(600);
        let snapshot = e.clone();
        assert_eq!(e.charge(100), ChargeOutcome::AlreadyDead);
        assert_eq!(e, snapshot);
    }

    #[test]
    fn conservation() {
        let mut e = EnergyState::new(10_000_000, 0);
        let mut total = 0;
        for c in [3, 700, 12_000, 5] {
            e.charge(c);
            total += c;
        }
        assert_eq!(e.consumed_nj(), total);
    }
}
