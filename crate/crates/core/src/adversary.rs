//! Malicious node behaviours. Adversaries act only through what they send
//! and what they drop.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crypto::{CodeWord, DataBits, ForgeKit};
use crate::protocol::{AgentPacket, NodeId, Rrep, Rreq, WireFormat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryKind {
    Blackhole,
    Grayhole { drop_ratio: f64 },
    Sinkhole,
}

impl AdversaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::Blackhole => "blackhole",
            AdversaryKind::Grayhole { .. } => "grayhole",
            AdversaryKind::Sinkhole => "sinkhole",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryProfile {
    pub kind: AdversaryKind,
    pub captures_agents: bool,
    pub injects_fake_agents: bool,
    /// Spread false Confidence packets when hosting a genuine agent.
    pub false_confidence: bool,
    /// Probability of answering a given RREQ.
    pub reply_probability: f64,
    /// Sequence-number advance claimed by blackhole and grayhole replies.
    pub seq_bump: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardDecision {
    Forward,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdversaryError {
    #[error("grayhole drop ratio {0} must lie strictly between 0 and 1")]
    DropRatio(String),
    #[error("invalid adversary configuration: {0}")]
    InvalidConfig(String),
}

impl AdversaryProfile {
    pub fn new(kind: AdversaryKind) -> Result<Self, AdversaryError> {
        if let AdversaryKind::Grayhole { drop_ratio } = kind {
            if !(drop_ratio > 0.0 && drop_ratio < 1.0) {
                return Err(AdversaryError::DropRatio(drop_ratio.to_string()));
            }
        }
        Ok(Self {
            kind,
            captures_agents: false,
            injects_fake_agents: false,
            false_confidence: false,
            reply_probability: 1.0,
            seq_bump: 100,
        })
    }

    /// What to do with a data packet handed over for forwarding.
    pub fn forward<R: Rng + ?Sized>(&self, rng: &mut R) -> ForwardDecision {
        match self.kind {
            AdversaryKind::Blackhole | AdversaryKind::Sinkhole => blackhole_forward(),
            AdversaryKind::Grayhole { drop_ratio } => grayhole_forward(drop_ratio, rng),
        }
    }

    /// Fake route reply, if this RREQ gets one.
    pub fn reply<R: Rng + ?Sized>(&self, me: NodeId, rreq: &Rreq, rng: &mut R) -> Option<Rrep> {
        if rreq.dst == me || rreq.src == me {
            return None;
        }
        if self.reply_probability < 1.0 && !rng.gen_bool(self.reply_probability.max(0.0)) {
            return None;
        }
        Some(match self.kind {
            AdversaryKind::Sinkhole => sinkhole_reply(me, rreq),
            _ => attract_reply(me, rreq, self.seq_bump),
        })
    }
}

pub fn blackhole_forward() -> ForwardDecision {
    ForwardDecision::Drop
}

/// Independent Bernoulli(`drop_ratio`) drop.
pub fn grayhole_forward<R: Rng + ?Sized>(drop_ratio: f64, rng: &mut R) -> ForwardDecision {
    if rng.gen_bool(drop_ratio) {
        ForwardDecision::Drop
    } else {
        ForwardDecision::Forward
    }
}

/// Maximal sequence number, one hop.
pub fn sinkhole_reply(me: NodeId, rreq: &Rreq) -> Rrep {
    Rrep {
        src: me,
        dst: rreq.src,
        target: rreq.dst,
        request_id: rreq.request_id,
        seq_no: u32::MAX,
        hop_count: 1,
    }
}

/// A plausible-looking fresher route: the requested sequence number plus
/// `bump`, two hops.
pub fn attract_reply(me: NodeId, rreq: &Rreq, bump: u32) -> Rrep {
    Rrep {
        src: me,
        dst: rreq.src,
        target: rreq.dst,
        request_id: rreq.request_id,
        seq_no: rreq.seq_no.saturating_add(bump),
        hop_count: 2,
    }
}

/// An agent packet with made-up code fields.
pub fn inject_fake_agent<R: Rng + ?Sized>(me: NodeId, target: NodeId, fmt: &WireFormat, rng: &mut R) -> AgentPacket {
    AgentPacket {
        src_uav: me,
        dst_uav: target,
        code3: CodeWord::random(rng, fmt.code_width),
        hash_output: CodeWord::zero(fmt.code_width),
        data_code: DataBits::new(fmt.data_width, 0).expect("width validated"),
        data: DataBits::random(rng, fmt.data_width),
    }
    .sealed()
}

/// Per-node forging material for the adversary side.
pub fn forge_kit<R: Rng + ?Sized>(rng: &mut R, width: usize) -> ForgeKit {
    ForgeKit::generate(rng, width)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackerMix {
    pub blackhole: f64,
    pub grayhole: f64,
    pub sinkhole: f64,
}

impl Default for AttackerMix {
    fn default() -> Self {
        Self {
            blackhole: 1.0,
            grayhole: 1.0,
            sinkhole: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryConfig {
    pub fraction: f64,
    pub mix: AttackerMix,
    pub grayhole_drop_ratio: f64,
    pub seq_bump: u32,
    pub reply_probability: f64,
    pub captures_agents: bool,
    pub injects_fake_agents: bool,
    /// Seconds between fake-agent injections per adversary.
    pub fake_agent_interval_s: f64,
    pub false_confidence: bool,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        Self {
            fraction: 0.0,
            mix: AttackerMix::default(),
            grayhole_drop_ratio: 0.5,
            seq_bump: 100,
            reply_probability: 1.0,
            captures_agents: false,
            injects_fake_agents: false,
            fake_agent_interval_s: 10.0,
            false_confidence: false,
        }
    }
}

impl AdversaryConfig {
    pub fn validate(&self) -> Result<(), AdversaryError> {
        let bad = |s: &str| Err(AdversaryError::InvalidConfig(s.into()));
        if !(0.0..1.0).contains(&self.fraction) {
            return bad("adversary.fraction must be 0 or in (0, 1)");
        }
        let w = [self.mix.blackhole, self.mix.grayhole, self.mix.sinkhole];
        if w.iter().any(|x| *x < 0.0 || !x.is_finite()) || w.iter().sum::<f64>() <= 0.0 {
            return bad("adversary.mix weights must be non-negative with a positive sum");
        }
        if !(self.grayhole_drop_ratio > 0.0 && self.grayhole_drop_ratio < 1.0) {
            return Err(AdversaryError::DropRatio(self.grayhole_drop_ratio.to_string()));
        }
        if !(0.0..=1.0).contains(&self.reply_probability) {
            return bad("adversary.reply_probability must be in [0, 1]");
        }
        if self.fake_agent_interval_s <= 0.0 {
            return bad("adversary.fake_agent_interval_s must be positive");
        }
        Ok(())
    }

    fn profile(&self, kind: AdversaryKind) -> Result<AdversaryProfile, AdversaryError> {
        let mut p = AdversaryProfile::new(kind)?;
        p.captures_agents = self.captures_agents;
        p.injects_fake_agents = self.injects_fake_agents;
        p.false_confidence = self.false_confidence;
        p.reply_probability = self.reply_probability;
        p.seq_bump = self.seq_bump;
        Ok(p)
    }
}

/// Splits `total` by weight with the largest-remainder method.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|a, b| {
        let ra = exact[*a] - counts[*a] as f64;
        let rb = exact[*b] - counts[*b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(b))
    });
    let mut left = total - counts.iter().sum::<usize>();
    for i in order {
        if left == 0 {
            break;
        }
        if weights[i] > 0.0 {
            counts[i] += 1;
            left -= 1;
        }
    }
    counts
}

/// Picks `floor(fraction * n)` adversaries uniformly and assigns kinds in
/// proportion to the mix. This is the ground truth for the run.
pub fn assign_roles<R: Rng + ?Sized>(
    n: usize,
    cfg: &AdversaryConfig,
    rng: &mut R,
) -> Result<BTreeMap<NodeId, AdversaryProfile>, AdversaryError> {
    cfg.validate()?;
    let k = (cfg.fraction * n as f64 + 1e-9).floor() as usize;
    let mut ids: Vec<NodeId> = rand::seq::index::sample(rng, n, k)
        .into_iter()
        .map(NodeId::from_index)
        .collect();
    ids.shuffle(rng);
    let counts = apportion(k, &[cfg.mix.blackhole, cfg.mix.grayhole, cfg.mix.sinkhole]);
    let kinds = [
        AdversaryKind::Blackhole,
        AdversaryKind::Grayhole {
            drop_ratio: cfg.grayhole_drop_ratio,
        },
        AdversaryKind::Sinkhole,
    ];
    let mut out = BTreeMap::new();
    let mut it = ids.into_iter();
    for (kind, count) in kinds.iter().zip(counts) {
        for id in it.by_ref().take(count) {
            out.insert(id, cfg.profile(*kind)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{stream_rng, RngStream};

    fn rreq() -> Rreq {
        Rreq {
            src: NodeId(1),
            dst: NodeId(9),
            request_id: 4,
            seq_no: 7,
            hop_count: 2,
        }
    }

    #[test]
    fn sinkhole_advertises_max_seq_one_hop() {
        let r = sinkhole_reply(NodeId(5), &rreq());
        assert_eq!((r.seq_no, r.hop_count, r.dst, r.target), (u32::MAX, 1, NodeId(1), NodeId(9)));
    }

    #[test]
    fn blackhole_drops_and_replies() {
        let p = AdversaryProfile::new(AdversaryKind::Blackhole).unwrap();
        let mut rng = stream_rng(1, RngStream::Node(0));
        assert!((0..100).all(|_| p.forward(&mut rng) == ForwardDecision::Drop));
        let r = p.reply(NodeId(5), &rreq(), &mut rng).unwrap();
        assert_eq!(r.seq_no, 107);
        assert!(p.reply(NodeId(9), &rreq(), &mut rng).is_none());
    }

    #[test]
    fn grayhole_ratio_must_be_open_interval() {
        for bad in [0.0, 1.0, -0.1, 1.5] {
            assert!(AdversaryProfile::new(AdversaryKind::Grayhole { drop_ratio: bad }).is_err());
        }
        let cfg = AdversaryConfig {
            grayhole_drop_ratio: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grayhole_is_deterministic() {
        let run = || {
            let mut rng = stream_rng(3, RngStream::Node(2));
            (0..200).map(|_| grayhole_forward(0.5, &mut rng) == ForwardDecision::Drop).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn role_counts() {
        let cfg = AdversaryConfig {
            fraction: 0.3,
            ..Default::default()
        };
        let roles = assign_roles(100, &cfg, &mut stream_rng(1, RngStream::Roles)).unwrap();
        assert_eq!(roles.len(), 30);
        let bh = roles.values().filter(|p| p.kind == AdversaryKind::Blackhole).count();
        assert_eq!(bh, 10);
        let cfg = AdversaryConfig {
            fraction: 0.1,
            ..Default::default()
        };
        assert_eq!(assign_roles(55, &cfg, &mut stream_rng(1, RngStream::Roles)).unwrap().len(), 5);
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(5, &[0.0, 1.0, 0.0]), vec![0, 5, 0]);
    }

    #[test]
    fn fake_agent_is_well_formed() {
        let fmt = WireFormat::default();
        let p = inject_fake_agent(NodeId(1), NodeId(2), &fmt, &mut stream_rng(1, RngStream::Node(1)));
        assert!(p.integrity_ok());
        assert_eq!(p.code3.width(), 32);
    }
}
