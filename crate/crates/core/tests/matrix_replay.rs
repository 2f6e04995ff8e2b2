mod common;

use std::collections::BTreeMap;

use common::*;
use sauav_core::agent::TrustOutcome;
use sauav_core::kernel::SimTime;
use sauav_core::protocol::NodeId;
use sauav_core::trace::TraceRecord;

fn expect(entries: &[(NodeId, u8, u8)]) -> BTreeMap<NodeId, (bool, bool)> {
    entries.iter().map(|&(n, v, a)| (n, (v == 1, a == 1))).collect()
}

#[test]
fn deployment_leaves_every_bit_clear() {
    let mut w = eight_node_world();
    w.run_until(SimTime::from_micros(1_999_999));
    assert_eq!(bits(&w, A), expect(&[(B, 0, 0), (C, 0, 0), (D, 0, 0), (E, 0, 0)]));
    assert_eq!(bits(&w, B), expect(&[(A, 0, 0), (C, 0, 0), (F, 0, 0), (H, 0, 0)]));
    assert_eq!(bits(&w, H), expect(&[(B, 0, 0), (D, 0, 0), (F, 0, 0)]));
    assert!(bits(&w, G).is_empty());
}

#[test]
fn agent_visits_set_home_and_host_bits() {
    let mut w = eight_node_world();
    // A's last visit (to E) has returned; its cycle has not closed yet.
    w.run_until(SimTime::from_micros(2_020_500));
    assert_eq!(bits(&w, A), expect(&[(B, 1, 0), (C, 1, 0), (D, 1, 0), (E, 0, 0)]));
    assert_eq!(bits(&w, B), expect(&[(A, 1, 1), (C, 0, 0), (F, 0, 0), (H, 1, 1)]));
    w.run_until(SimTime::from_micros(2_023_500));
    assert_eq!(bits(&w, H), expect(&[(B, 1, 0), (D, 1, 0), (F, 1, 0)]));
}

#[test]
fn confidence_packets_fill_in_second_hand_trust() {
    let mut w = eight_node_world();
    w.run_until(SimTime::from_millis(2_030));
    assert_eq!(bits(&w, B), expect(&[(A, 1, 1), (C, 1, 0), (F, 1, 0), (H, 1, 1)]));
    // E was warned about and is gone from its neighbours' matrices.
    assert_eq!(bits(&w, A), expect(&[(B, 1, 0), (C, 1, 0), (D, 1, 0)]));
    for n in [A, B, C, D, F, H] {
        assert!(w.node(n).quarantine.contains(E), "{n} did not quarantine E");
    }
}

#[test]
fn attacker_fails_the_agent_check() {
    let out = eight_node_world().run();
    let verdicts: Vec<_> = out
        .trace
        .iter()
        .filter_map(|r| match r {
            TraceRecord::HandshakeResult { home, host, outcome, .. } => Some((*home, *host, *outcome)),
            _ => None,
        })
        .collect();
    assert!(verdicts.contains(&(A, E, TrustOutcome::AgentRejectsNode)));
    assert!(verdicts
        .iter()
        .filter(|(_, host, _)| *host != E)
        .all(|(_, _, o)| *o == TrustOutcome::MutualTrust));
    assert!(out.metrics.confusion.tp == 1 && out.metrics.confusion.fp == 0);
}
