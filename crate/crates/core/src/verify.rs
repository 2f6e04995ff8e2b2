//! Recomputes a run's report from its trace alone and audits the trace for
//! route exclusion and handshake ordering.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::agent::{audit_steps, StepRecord, TrustOutcome};
use crate::detection::ConfusionMatrix;
use crate::metrics::RunMetrics;
use crate::protocol::NodeId;
use crate::trace::TraceRecord;

/// Metrics rebuilt from trace lines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Recomputed {
    pub n_uavs: usize,
    pub malicious: usize,
    pub sent: u64,
    pub delivered: u64,
    pub confusion: ConfusionMatrix,
    pub pdr: Option<f64>,
    pub dr: Option<f64>,
    pub fp_rate: Option<f64>,
    pub fn_rate: Option<f64>,
    pub re: Option<f64>,
    pub comment_requests: u64,
    pub warnings: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteViolation {
    pub t: u64,
    pub node: NodeId,
    pub dst: NodeId,
    pub next_hop: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandshakeIssue {
    pub hs: u64,
    pub problem: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub records: usize,
    pub recomputed: Recomputed,
    /// Field-level disagreements with the run's own final metrics.
    pub mismatches: Vec<String>,
    pub route_violations: Vec<RouteViolation>,
    pub handshakes_checked: usize,
    pub handshake_issues: Vec<HandshakeIssue>,
    pub clock_regressions: usize,
    pub ok: bool,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 * 100.0 / den as f64)
    }
}

fn time_of(r: &TraceRecord) -> Option<u64> {
    use TraceRecord::*;
    match r {
        Gen { t, .. }
        | Deliver { t, .. }
        | Drop { t, .. }
        | RouteInstall { t, .. }
        | Handshake { t, .. }
        | HandshakeResult { t, .. }
        | AgentReturn { t, .. }
        | AgentTimeout { t, .. }
        | AgentIgnored { t, .. }
        | CycleEnd { t, .. }
        | Detector { t, .. }
        | CommentRequest { t, .. }
        | Warning { t, .. }
        | Quarantine { t, .. }
        | Death { t, .. }
        | Handoff { t, .. }
        | RunEnd { t, .. } => Some(*t),
        RunStart { .. } | Role { .. } | Energy { .. } => None,
    }
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(1.0),
        _ => false,
    }
}

pub fn verify(records: &[TraceRecord]) -> VerifyReport {
    let mut roles: BTreeMap<NodeId, bool> = BTreeMap::new();
    let mut gen = BTreeSet::new();
    let mut got = BTreeSet::new();
    let mut detected = BTreeSet::new();
    let mut quarantined: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    let mut route_violations = Vec::new();
    let mut steps: BTreeMap<u64, Vec<StepRecord>> = BTreeMap::new();
    let mut results: BTreeMap<u64, TrustOutcome> = BTreeMap::new();
    let mut energy: Vec<f64> = Vec::new();
    let mut comment_requests = 0;
    let mut warnings = 0;
    let mut final_metrics: Option<RunMetrics> = None;
    let mut last_t = 0u64;
    let mut clock_regressions = 0;

    for r in records {
        if let Some(t) = time_of(r) {
            if t < last_t {
                clock_regressions += 1;
            }
            last_t = last_t.max(t);
        }
        match r {
            TraceRecord::Role { node, role, .. } => {
                roles.insert(*node, role != "honest");
            }
            TraceRecord::Gen { uid, .. } => {
                gen.insert(*uid);
            }
            TraceRecord::Deliver { uid, .. } => {
                got.insert(*uid);
            }
            TraceRecord::Warning { subject, .. } => {
                warnings += 1;
                detected.insert(*subject);
            }
            TraceRecord::CommentRequest { .. } => comment_requests += 1,
            TraceRecord::Quarantine { t: _, node, subject } => {
                quarantined.entry(*node).or_default().insert(*subject);
            }
            TraceRecord::RouteInstall {
                t, node, dst, next_hop, ..
            } => {
                if let Some(q) = quarantined.get(node) {
                    if q.contains(dst) || q.contains(next_hop) {
                        route_violations.push(RouteViolation {
                            t: *t,
                            node: *node,
                            dst: *dst,
                            next_hop: *next_hop,
                        });
                    }
                }
            }
            TraceRecord::Handshake { hs, step, ok, .. } => {
                steps.entry(*hs).or_default().push(StepRecord { step: *step, ok: *ok });
            }
            TraceRecord::HandshakeResult { hs, outcome, .. } => {
                results.insert(*hs, *outcome);
            }
            TraceRecord::Energy {
                initial_nj, remaining_nj, ..
            } => {
                if *initial_nj > 0 {
                    energy.push(*remaining_nj as f64 / *initial_nj as f64);
                }
            }
            TraceRecord::RunEnd { metrics, .. } => final_metrics = Some(metrics.clone()),
            _ => {}
        }
    }

    let mut confusion = ConfusionMatrix::default();
    for (node, bad) in &roles {
        match (*bad, detected.contains(node)) {
            (true, true) => confusion.tp += 1,
            (false, true) => confusion.fp += 1,
            (true, false) => confusion.fn_ += 1,
            (false, false) => confusion.tn += 1,
        }
    }
    let delivered = got.intersection(&gen).count() as u64;
    let dr = ratio(confusion.tp, confusion.tp + confusion.fn_);
    let rec = Recomputed {
        n_uavs: roles.len(),
        malicious: roles.values().filter(|b| **b).count(),
        sent: gen.len() as u64,
        delivered,
        confusion,
        pdr: ratio(delivered, gen.len() as u64),
        dr,
        fp_rate: ratio(confusion.fp, confusion.fp + confusion.tn),
        fn_rate: ratio(confusion.fn_, confusion.fn_ + confusion.tp),
        re: (!energy.is_empty()).then(|| energy.iter().sum::<f64>() * 100.0 / energy.len() as f64),
        comment_requests,
        warnings,
    };

    let mut mismatches = Vec::new();
    match &final_metrics {
        None => mismatches.push("trace has no run_end record".to_string()),
        Some(m) => {
            let mut check = |name: &str, ok: bool| {
                if !ok {
                    mismatches.push(name.to_string());
                }
            };
            check("n_uavs", m.n_uavs == rec.n_uavs);
            check("malicious", m.malicious == rec.malicious);
            check("sent", m.sent == rec.sent);
            check("delivered", m.delivered == rec.delivered);
            check("confusion", m.confusion == rec.confusion);
            check("pdr", same(m.pdr(), rec.pdr));
            check("re", same(Some(m.re), rec.re));
            check("comment_requests", m.comment_requests == rec.comment_requests);
            check("warnings", m.warnings == rec.warnings);
            check("route_violations", m.route_violations == route_violations.len() as u64);
        }
    }

    let mut handshake_issues = Vec::new();
    for (hs, s) in &steps {
        if let Err(e) = audit_steps(s) {
            handshake_issues.push(HandshakeIssue {
                hs: *hs,
                problem: e.to_string(),
            });
            continue;
        }
        let released = s.iter().any(|r| r.step == crate::agent::HandshakeStep::DataCodeReleased);
        match results.get(hs) {
            None => handshake_issues.push(HandshakeIssue {
                hs: *hs,
                problem: "no result line".into(),
            }),
            Some(o) if (*o == TrustOutcome::MutualTrust) != released => handshake_issues.push(HandshakeIssue {
                hs: *hs,
                problem: format!("outcome {o:?} disagrees with data code release"),
            }),
            Some(_) => {}
        }
    }

    let ok = mismatches.is_empty() && route_violations.is_empty() && handshake_issues.is_empty() && clock_regressions == 0;
    VerifyReport {
        records: records.len(),
        recomputed: rec,
        mismatches,
        route_violations,
        handshakes_checked: steps.len(),
        handshake_issues,
        clock_regressions,
        ok,
    }
}
