use serde::{Deserialize, Serialize};

use super::counters::BehaviorCounters;
use super::ids::NodeId;
use crate::crypto::{digest_word, CodeWord, DataBits};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rreq {
    pub src: NodeId,
    pub dst: NodeId,
    pub request_id: u32,
    /// Latest destination sequence number known to the originator.
    pub seq_no: u32,
    pub hop_count: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rrep {
    /// The node that generated the reply.
    pub src: NodeId,
    /// The RREQ originator the reply travels back to.
    pub dst: NodeId,
    /// Destination the advertised route leads to.
    pub target: NodeId,
    pub request_id: u32,
    pub seq_no: u32,
    pub hop_count: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Data {
    pub uid: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub payload_bytes: u32,
    /// Nodes that have transmitted this packet so far, source first.
    pub route: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustTuple {
    pub node: NodeId,
    pub valid: bool,
    pub agent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confidence {
    pub src: NodeId,
    pub trusted: Vec<TrustTuple>,
}

/// Migrating agent on the wire. Field order is fixed: source, destination,
/// code 3, hash output, data code, data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPacket {
    pub src_uav: NodeId,
    pub dst_uav: NodeId,
    pub code3: CodeWord,
    pub hash_output: CodeWord,
    pub data_code: DataBits,
    /// Always masked by the data code.
    pub data: DataBits,
}

impl AgentPacket {
    fn integrity_digest(&self) -> CodeWord {
        digest_word(
            &[
                &self.src_uav.0.to_be_bytes(),
                &self.dst_uav.0.to_be_bytes(),
                self.code3.as_bytes(),
                &self.data_code.value().to_be_bytes(),
                &self.data.value().to_be_bytes(),
            ],
            self.code3.width(),
        )
    }

    /// Fills `hash_output` with a digest of the other fields.
    pub fn sealed(mut self) -> Self {
        self.hash_output = self.integrity_digest();
        self
    }

    pub fn integrity_ok(&self) -> bool {
        self.hash_output == self.integrity_digest()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlKind {
    RediscoverNeighbors,
}

/// Every message that crosses the radio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Packet {
    Hello { src: NodeId },
    Rreq(Rreq),
    Rrep(Rrep),
    Data(Data),
    Agent(AgentPacket),
    Confidence(Confidence),
    CommentRequest { src: NodeId, subject: NodeId },
    CommentReply { src: NodeId, subject: NodeId, counters: BehaviorCounters },
    /// Quarantine broadcast. `tag` authenticates the originator.
    Warning { src: NodeId, subject: NodeId, tag: CodeWord },
    Death { src: NodeId },
    Control { src: NodeId, kind: ControlKind },
}

impl Packet {
    pub fn src(&self) -> NodeId {
        match self {
            Packet::Hello { src }
            | Packet::CommentRequest { src, .. }
            | Packet::CommentReply { src, .. }
            | Packet::Warning { src, .. }
            | Packet::Death { src }
            | Packet::Control { src, .. } => *src,
            Packet::Rreq(p) => p.src,
            Packet::Rrep(p) => p.src,
            Packet::Data(p) => p.src,
            Packet::Agent(p) => p.src_uav,
            Packet::Confidence(p) => p.src,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Packet::Hello { .. } => "hello",
            Packet::Rreq(_) => "rreq",
            Packet::Rrep(_) => "rrep",
            Packet::Data(_) => "data",
            Packet::Agent(_) => "agent",
            Packet::Confidence(_) => "confidence",
            Packet::CommentRequest { .. } => "comment_request",
            Packet::CommentReply { .. } => "comment_reply",
            Packet::Warning { .. } => "warning",
            Packet::Death { .. } => "death",
            Packet::Control { .. } => "control",
        }
    }
}
