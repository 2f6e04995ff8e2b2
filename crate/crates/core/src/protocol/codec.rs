//! Big-endian wire encoding for every packet kind.
//!
//! Agent packets have a tag-free fixed layout (see [`encode_agent_packet`]);
//! the general [`encode`] prefixes each packet with a one-byte kind tag.

use super::counters::BehaviorCounters;
use super::ids::NodeId;
use super::packet::*;
use crate::crypto::{CodeWord, DataBits};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireFormat {
    /// Bytes per code word (code 3, hash output, warning tags).
    pub code_width: usize,
    /// Bits in the agent data section and data code.
    pub data_width: u8,
}

impl Default for WireFormat {
    fn default() -> Self {
        Self {
            code_width: 32,
            data_width: DataBits::DEFAULT_WIDTH,
        }
    }
}

impl WireFormat {
    fn data_bytes(&self) -> usize {
        (self.data_width as usize).div_ceil(8)
    }

    pub fn agent_packet_len(&self) -> usize {
        4 + 4 + 2 * self.code_width + 2 * self.data_bytes()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("{field}: expected width {expected}, got {got}")]
    WidthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("buffer truncated")]
    Truncated,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("unknown packet tag {0:#04x}")]
    UnknownTag(u8),
    #[error("invalid value for {0}")]
    InvalidField(&'static str),
}

mod tag {
    pub const HELLO: u8 = 0x01;
    pub const RREQ: u8 = 0x02;
    pub const RREP: u8 = 0x03;
    pub const DATA: u8 = 0x04;
    pub const AGENT: u8 = 0x05;
    pub const CONFIDENCE: u8 = 0x06;
    pub const COMMENT_REQUEST: u8 = 0x07;
    pub const COMMENT_REPLY: u8 = 0x08;
    pub const WARNING: u8 = 0x09;
    pub const DEATH: u8 = 0x0a;
    pub const CONTROL: u8 = 0x0b;
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn node(&mut self) -> Result<NodeId, CodecError> {
        self.u32().map(NodeId)
    }

    fn word(&mut self, width: usize) -> Result<CodeWord, CodecError> {
        Ok(CodeWord::from_bytes(self.take(width)?.to_vec()))
    }

    fn bits(&mut self, width: u8, field: &'static str) -> Result<DataBits, CodecError> {
        let n = (width as usize).div_ceil(8);
        let mut v: u32 = 0;
        for b in self.take(n)? {
            v = (v << 8) | *b as u32;
        }
        DataBits::new(width, v).map_err(|_| CodecError::InvalidField(field))
    }

    fn finish(self) -> Result<(), CodecError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes(self.buf.len()))
        }
    }
}

fn put_node(out: &mut Vec<u8>, n: NodeId) {
    out.extend_from_slice(&n.0.to_be_bytes());
}

fn put_bits(out: &mut Vec<u8>, d: &DataBits) {
    let n = d.byte_len();
    let bytes = d.value().to_be_bytes();
    out.extend_from_slice(&bytes[4 - n..]);
}

fn check_word(field: &'static str, w: &CodeWord, fmt: &WireFormat) -> Result<(), CodecError> {
    if w.width() != fmt.code_width {
        return Err(CodecError::WidthMismatch {
            field,
            expected: fmt.code_width,
            got: w.width(),
        });
    }
    Ok(())
}

fn check_bits(field: &'static str, d: &DataBits, fmt: &WireFormat) -> Result<(), CodecError> {
    if d.width() != fmt.data_width {
        return Err(CodecError::WidthMismatch {
            field,
            expected: fmt.data_width as usize,
            got: d.width() as usize,
        });
    }
    Ok(())
}

/// Encodes an agent packet as
/// `src u32 | dst u32 | code3 [W] | hash_output [W] | data_code [D] | data [D]`
/// where `W` is the code width and `D` is the data width rounded up to bytes.
pub fn encode_agent_packet(p: &AgentPacket, fmt: &WireFormat) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(fmt.agent_packet_len());
    write_agent(&mut out, p, fmt)?;
    Ok(out)
}

pub fn decode_agent_packet(bytes: &[u8], fmt: &WireFormat) -> Result<AgentPacket, CodecError> {
    let mut r = Reader { buf: bytes };
    let p = read_agent(&mut r, fmt)?;
    r.finish()?;
    Ok(p)
}

fn write_agent(out: &mut Vec<u8>, p: &AgentPacket, fmt: &WireFormat) -> Result<(), CodecError> {
    check_word("code3", &p.code3, fmt)?;
    check_word("hash_output", &p.hash_output, fmt)?;
    check_bits("data_code", &p.data_code, fmt)?;
    check_bits("data", &p.data, fmt)?;
    put_node(out, p.src_uav);
    put_node(out, p.dst_uav);
    out.extend_from_slice(p.code3.as_bytes());
    out.extend_from_slice(p.hash_output.as_bytes());
    put_bits(out, &p.data_code);
    put_bits(out, &p.data);
    Ok(())
}

fn read_agent(r: &mut Reader<'_>, fmt: &WireFormat) -> Result<AgentPacket, CodecError> {
    Ok(AgentPacket {
        src_uav: r.node()?,
        dst_uav: r.node()?,
        code3: r.word(fmt.code_width)?,
        hash_output: r.word(fmt.code_width)?,
        data_code: r.bits(fmt.data_width, "data_code")?,
        data: r.bits(fmt.data_width, "data")?,
    })
}

const COUNTERS_LEN: usize = 4 * 4 + 1 + 4 + 1;

fn put_counters(out: &mut Vec<u8>, c: &BehaviorCounters) {
    out.extend_from_slice(&c.data_sent.to_be_bytes());
    out.extend_from_slice(&c.data_received.to_be_bytes());
    out.extend_from_slice(&c.data_forwarded.to_be_bytes());
    out.extend_from_slice(&c.rrep_sent.to_be_bytes());
    out.push((c.earliest_rrep_flag as u8) | (c.max_seq_min_hop_flag as u8) << 1);
    out.extend_from_slice(&c.last_rrep_seq.to_be_bytes());
    out.push(c.last_rrep_hops);
}

fn read_counters(r: &mut Reader<'_>) -> Result<BehaviorCounters, CodecError> {
    let data_sent = r.u32()?;
    let data_received = r.u32()?;
    let data_forwarded = r.u32()?;
    let rrep_sent = r.u32()?;
    let flags = r.u8()?;
    if flags > 0b11 {
        return Err(CodecError::InvalidField("counter flags"));
    }
    Ok(BehaviorCounters {
        data_sent,
        data_received,
        data_forwarded,
        rrep_sent,
        earliest_rrep_flag: flags & 1 == 1,
        max_seq_min_hop_flag: flags & 2 == 2,
        last_rrep_seq: r.u32()?,
        last_rrep_hops: r.u8()?,
    })
}

/// Encoded size of `p` without building the buffer.
pub fn wire_len(p: &Packet, fmt: &WireFormat) -> usize {
    1 + match p {
        Packet::Hello { .. } | Packet::Death { .. } => 4,
        Packet::Rreq(_) => 4 * 4 + 1,
        Packet::Rrep(_) => 5 * 4 + 1,
        Packet::Data(d) => 8 + 4 + 4 + 4 + 1 + 4 * d.route.len() + d.payload_bytes as usize,
        Packet::Agent(_) => fmt.agent_packet_len(),
        Packet::Confidence(c) => 4 + 2 + 5 * c.trusted.len(),
        Packet::CommentRequest { .. } => 8,
        Packet::CommentReply { .. } => 8 + COUNTERS_LEN,
        Packet::Warning { .. } => 8 + fmt.code_width,
        Packet::Control { .. } => 5,
    }
}

pub fn encode(p: &Packet, fmt: &WireFormat) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(wire_len(p, fmt));
    match p {
        Packet::Hello { src } => {
            out.push(tag::HELLO);
            put_node(&mut out, *src);
        }
        Packet::Rreq(q) => {
            out.push(tag::RREQ);
            put_node(&mut out, q.src);
            put_node(&mut out, q.dst);
            out.extend_from_slice(&q.request_id.to_be_bytes());
            out.extend_from_slice(&q.seq_no.to_be_bytes());
            out.push(q.hop_count);
        }
        Packet::Rrep(r) => {
            out.push(tag::RREP);
            put_node(&mut out, r.src);
            put_node(&mut out, r.dst);
            put_node(&mut out, r.target);
            out.extend_from_slice(&r.request_id.to_be_bytes());
            out.extend_from_slice(&r.seq_no.to_be_bytes());
            out.push(r.hop_count);
        }
        Packet::Data(d) => {
            if d.route.len() > u8::MAX as usize {
                return Err(CodecError::InvalidField("route length"));
            }
            out.push(tag::DATA);
            out.extend_from_slice(&d.uid.to_be_bytes());
            put_node(&mut out, d.src);
            put_node(&mut out, d.dst);
            out.extend_from_slice(&d.payload_bytes.to_be_bytes());
            out.push(d.route.len() as u8);
            for n in &d.route {
                put_node(&mut out, *n);
            }
            out.resize(out.len() + d.payload_bytes as usize, 0);
        }
        Packet::Agent(a) => {
            out.push(tag::AGENT);
            write_agent(&mut out, a, fmt)?;
        }
        Packet::Confidence(c) => {
            if c.trusted.len() > u16::MAX as usize {
                return Err(CodecError::InvalidField("trusted list length"));
            }
            out.push(tag::CONFIDENCE);
            put_node(&mut out, c.src);
            out.extend_from_slice(&(c.trusted.len() as u16).to_be_bytes());
            for t in &c.trusted {
                put_node(&mut out, t.node);
                out.push((t.valid as u8) << 1 | t.agent as u8);
            }
        }
        Packet::CommentRequest { src, subject } => {
            out.push(tag::COMMENT_REQUEST);
            put_node(&mut out, *src);
            put_node(&mut out, *subject);
        }
        Packet::CommentReply { src, subject, counters } => {
            out.push(tag::COMMENT_REPLY);
            put_node(&mut out, *src);
            put_node(&mut out, *subject);
            put_counters(&mut out, counters);
        }
        Packet::Warning { src, subject, tag: t } => {
            check_word("warning tag", t, fmt)?;
            out.push(tag::WARNING);
            put_node(&mut out, *src);
            put_node(&mut out, *subject);
            out.extend_from_slice(t.as_bytes());
        }
        Packet::Death { src } => {
            out.push(tag::DEATH);
            put_node(&mut out, *src);
        }
        Packet::Control { src, kind } => {
            out.push(tag::CONTROL);
            put_node(&mut out, *src);
            out.push(match kind {
                ControlKind::RediscoverNeighbors => 1,
            });
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8], fmt: &WireFormat) -> Result<Packet, CodecError> {
    let mut r = Reader { buf: bytes };
    let p = match r.u8()? {
        tag::HELLO => Packet::Hello { src: r.node()? },
        tag::RREQ => Packet::Rreq(Rreq {
            src: r.node()?,
            dst: r.node()?,
            request_id: r.u32()?,
            seq_no: r.u32()?,
            hop_count: r.u8()?,
        }),
        tag::RREP => Packet::Rrep(Rrep {
            src: r.node()?,
            dst: r.node()?,
            target: r.node()?,
            request_id: r.u32()?,
            seq_no: r.u32()?,
            hop_count: r.u8()?,
        }),
        tag::DATA => {
            let uid = r.u64()?;
            let src = r.node()?;
            let dst = r.node()?;
            let payload_bytes = r.u32()?;
            let hops = r.u8()? as usize;
            let route = (0..hops).map(|_| r.node()).collect::<Result<Vec<_>, _>>()?;
            r.take(payload_bytes as usize)?;
            Packet::Data(Data {
                uid,
                src,
                dst,
                payload_bytes,
                route,
            })
        }
        tag::AGENT => Packet::Agent(read_agent(&mut r, fmt)?),
        tag::CONFIDENCE => {
            let src = r.node()?;
            let n = r.u16()? as usize;
            let mut trusted = Vec::with_capacity(n);
            for _ in 0..n {
                let node = r.node()?;
                let flags = r.u8()?;
                if flags > 0b11 {
                    return Err(CodecError::InvalidField("trust flags"));
                }
                trusted.push(TrustTuple {
                    node,
                    valid: flags & 2 == 2,
                    agent: flags & 1 == 1,
                });
            }
            Packet::Confidence(Confidence { src, trusted })
        }
        tag::COMMENT_REQUEST => Packet::CommentRequest {
            src: r.node()?,
            subject: r.node()?,
        },
        tag::COMMENT_REPLY => Packet::CommentReply {
            src: r.node()?,
            subject: r.node()?,
            counters: read_counters(&mut r)?,
        },
        tag::WARNING => Packet::Warning {
            src: r.node()?,
            subject: r.node()?,
            tag: r.word(fmt.code_width)?,
        },
        tag::DEATH => Packet::Death { src: r.node()? },
        tag::CONTROL => {
            let src = r.node()?;
            let kind = match r.u8()? {
                1 => ControlKind::RediscoverNeighbors,
                _ => return Err(CodecError::InvalidField("control kind")),
            };
            Packet::Control { src, kind }
        }
        other => return Err(CodecError::UnknownTag(other)),
    };
    r.finish()?;
    Ok(p)
}
