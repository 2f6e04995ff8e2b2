use serde::{Deserialize, Serialize};

use super::mobility::Position;
use super::time::SimTime;
use super::KernelError;
use crate::protocol::NodeId;

/// Affine per-packet energy cost, in nanojoules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub fixed_nj: u64,
    pub per_byte_nj: u64,
}

impl CostModel {
    pub fn cost(&self, bytes: usize) -> u64 {
        self.fixed_nj + self.per_byte_nj * bytes as u64
    }
}

/// Unit-disk radio: every node within `range` meters hears a transmission
/// after a fixed per-hop delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioModel {
    pub range: f64,
    pub per_hop_delay: SimTime,
    pub tx: CostModel,
    pub rx: CostModel,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self {
            range: 250.0,
            per_hop_delay: SimTime::from_millis(2),
            tx: CostModel {
                fixed_nj: 200_000,
                per_byte_nj: 1_000,
            },
            rx: CostModel {
                fixed_nj: 100_000,
                per_byte_nj: 500,
            },
        }
    }
}

impl RadioModel {
    // Negated comparisons so NaN fails as well.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.range > 0.0) {
            return Err(KernelError::InvalidRadio("range must be positive".into()));
        }
        if self.per_hop_delay == SimTime::ZERO {
            return Err(KernelError::InvalidRadio("per-hop delay must be positive".into()));
        }
        Ok(())
    }

    pub fn in_range(&self, a: &Position, b: &Position) -> bool {
        a.distance(b) <= self.range
    }

    /// Received-signal proxy: positive inside the disk, zero on the edge.
    pub fn rss(&self, a: &Position, b: &Position) -> f64 {
        self.range - a.distance(b)
    }
}

/// All nodes other than `node` whose distance from it is at most `radio.range`,
/// in ascending id order.
pub fn neighbors_in_range(
    node: NodeId,
    positions: &[Position],
    radio: &RadioModel,
) -> Result<Vec<NodeId>, KernelError> {
    let me = positions
        .get(node.index())
        .ok_or(KernelError::UnknownNode(node))?;
    Ok(positions
        .iter()
        .enumerate()
        .filter(|&(i, p)| i != node.index() && radio.in_range(me, p))
        .map(|(i, _)| NodeId::from_index(i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radio(range: f64) -> RadioModel {
        RadioModel {
            range,
            ..RadioModel::default()
        }
    }

    #[test]
    fn inside_range() {
        let pos = [Position::new(0.0, 0.0), Position::new(0.0, 20.0)];
        let n = neighbors_in_range(NodeId(0), &pos, &radio(30.0)).unwrap();
        assert_eq!(n, vec![NodeId(1)]);
    }

    #[test]
    fn outside_range() {
        let pos = [Position::new(0.0, 0.0), Position::new(0.0, 31.0)];
        assert!(neighbors_in_range(NodeId(0), &pos, &radio(30.0)).unwrap().is_empty());
    }

    #[test]
    fn edge_of_disk_is_included() {
        let pos = [Position::new(0.0, 0.0), Position::new(30.0, 0.0)];
        assert_eq!(neighbors_in_range(NodeId(1), &pos, &radio(30.0)).unwrap(), vec![NodeId(0)]);
    }

    #[test]
    fn unknown_node() {
        let pos = [Position::new(0.0, 0.0)];
        assert!(matches!(
            neighbors_in_range(NodeId(4), &pos, &radio(30.0)),
            Err(KernelError::UnknownNode(NodeId(4)))
        ));
    }

    #[test]
    fn cost_is_affine() {
        let r = RadioModel::default();
        assert_eq!(r.tx.cost(512), 712_000);
        assert_eq!(r.rx.cost(0), 100_000);
    }
}
