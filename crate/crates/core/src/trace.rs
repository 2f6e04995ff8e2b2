//! Newline-delimited JSON event trace. Times are integer microseconds.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::agent::{HandshakeStep, TrustOutcome};
use crate::detection::{Level, Rule};
use crate::metrics::RunMetrics;
use crate::protocol::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "snake_case")]
pub enum TraceRecord {
    RunStart {
        seed: u64,
        n_uavs: usize,
        defense: bool,
        sim_time_us: u64,
    },
    /// Ground truth, one per node.
    Role {
        node: NodeId,
        role: String,
        agent: bool,
    },
    Gen {
        t: u64,
        uid: u64,
        src: NodeId,
        dst: NodeId,
    },
    Deliver {
        t: u64,
        uid: u64,
        dst: NodeId,
        hops: u32,
    },
    Drop {
        t: u64,
        uid: u64,
        node: NodeId,
        reason: String,
    },
    RouteInstall {
        t: u64,
        node: NodeId,
        dst: NodeId,
        next_hop: NodeId,
        seq: u32,
        hops: u8,
    },
    /// One line per exchange step, in order. `hs` identifies the exchange.
    Handshake {
        t: u64,
        hs: u64,
        home: NodeId,
        host: NodeId,
        step: HandshakeStep,
        ok: bool,
    },
    HandshakeResult {
        t: u64,
        hs: u64,
        home: NodeId,
        host: NodeId,
        outcome: TrustOutcome,
    },
    AgentReturn {
        t: u64,
        home: NodeId,
        host: NodeId,
        outcome: TrustOutcome,
    },
    AgentTimeout {
        t: u64,
        home: NodeId,
        neighbor: NodeId,
        attempt: u8,
        action: String,
    },
    AgentIgnored {
        t: u64,
        host: NodeId,
        home: NodeId,
    },
    CycleEnd {
        t: u64,
        home: NodeId,
        cycle: u64,
    },
    Detector {
        t: u64,
        node: NodeId,
        subject: NodeId,
        phase: String,
        level: Level,
        rules: Vec<Rule>,
        votes_for: u32,
        votes_against: u32,
    },
    CommentRequest {
        t: u64,
        node: NodeId,
        subject: NodeId,
    },
    Warning {
        t: u64,
        origin: NodeId,
        subject: NodeId,
        reason: String,
    },
    Quarantine {
        t: u64,
        node: NodeId,
        subject: NodeId,
    },
    Death {
        t: u64,
        node: NodeId,
    },
    Handoff {
        t: u64,
        from: NodeId,
        to: Option<NodeId>,
    },
    Energy {
        node: NodeId,
        initial_nj: u64,
        remaining_nj: u64,
    },
    RunEnd {
        t: u64,
        metrics: RunMetrics,
    },
}

/// In-memory collector; disabled traces cost one branch per record.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    enabled: bool,
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            records: Vec::new(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    #[inline]
    pub fn push(&mut self, r: impl FnOnce() -> TraceRecord) {
        if self.enabled {
            self.records.push(r());
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TraceRecord> {
        self.records
    }
}

pub fn write_ndjson<W: Write>(mut w: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn to_ndjson(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_ndjson(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn read_ndjson<R: BufRead>(r: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| TraceError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}
