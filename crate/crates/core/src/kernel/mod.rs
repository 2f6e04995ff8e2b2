//! Discrete-event kernel: virtual clock and event queue, random-waypoint
//! mobility, unit-disk radio and per-node energy accounting.

mod energy;
mod mobility;
mod queue;
mod radio;
mod rng;
mod time;

pub use energy::{joules_to_nj, ChargeKind, ChargeOutcome, EnergyState, NJ_PER_J};
pub use mobility::{Position, RandomWaypoint};
pub use queue::{EventQueue, Scheduled};
pub use radio::{neighbors_in_range, CostModel, RadioModel};
pub use rng::{stream_rng, RngStream};
pub use time::SimTime;

use crate::protocol::NodeId;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("event scheduled at {at} but the clock is already at {now}")]
    PastEvent { at: SimTime, now: SimTime },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid radio model: {0}")]
    InvalidRadio(String),
}
