//! Node identity, packet taxonomy, wire codec and the neighbor matrix.

mod codec;
mod counters;
mod ids;
mod matrix;
mod packet;

pub use codec::{decode, decode_agent_packet, encode, encode_agent_packet, wire_len, CodecError, WireFormat};
pub use counters::BehaviorCounters;
pub use ids::NodeId;
pub use matrix::{Eviction, NeighborEntry, NeighborMatrix};
pub use packet::{AgentPacket, Confidence, ControlKind, Data, Packet, Rrep, Rreq, TrustTuple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("confidence packet from untrusted source {0}")]
    UntrustedSource(NodeId),
    #[error("{0} is not a neighbor")]
    UnknownNeighbor(NodeId),
    #[error(transparent)]
    Codec(#[from] CodecError),
}
