mod common;

use std::collections::BTreeSet;

use common::small_config;
use proptest::prelude::*;
use sauav_core::config::ScenarioConfig;
use sauav_core::kernel::{neighbors_in_range, SimTime};
use sauav_core::protocol::NodeId;
use sauav_core::sim::{run_scenario, World};
use sauav_core::trace::{read_ndjson, to_ndjson, TraceRecord};
use sauav_core::verify::verify;

fn static_all_agents(seed: u64, fraction: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.scenario.seed = seed;
    cfg.scenario.n_uavs = 30;
    cfg.scenario.arena_m = 800.0;
    cfg.scenario.sim_time_s = 10.0;
    cfg.mobility.speed_mps = 0.0;
    cfg.agents.agent_fraction = 1.0;
    cfg.traffic.flows = 0;
    cfg.adversary.fraction = fraction;
    cfg
}

#[test]
fn one_cycle_validates_exactly_the_honest_neighbours() {
    for seed in 1..6 {
        let cfg = static_all_agents(seed, 0.2);
        let radio = cfg.radio_model();
        let mut w = World::new(cfg, false).unwrap();
        w.run_until(SimTime::from_millis(4_500));
        let bad = w.malicious().clone();
        for n in w.nodes().iter().filter(|n| !bad.contains(&n.id)) {
            for m in neighbors_in_range(n.id, w.positions(), &radio).unwrap() {
                assert_eq!(n.matrix.is_valid(m), !bad.contains(&m), "seed {seed}: {} about {m}", n.id);
            }
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    let cfg = small_config(7, 40, 0.2, 40.0);
    let a = run_scenario(&cfg, true).unwrap();
    let b = run_scenario(&cfg, true).unwrap();
    assert_eq!(to_ndjson(&a.trace), to_ndjson(&b.trace));
    assert_eq!(serde_json::to_string(&a.metrics).unwrap(), serde_json::to_string(&b.metrics).unwrap());
    let c = run_scenario(&small_config(8, 40, 0.2, 40.0), true).unwrap();
    assert_ne!(to_ndjson(&a.trace), to_ndjson(&c.trace));
}

#[test]
fn trace_survives_a_file_round_trip() {
    let out = run_scenario(&small_config(3, 30, 0.3, 30.0), true).unwrap();
    let text = to_ndjson(&out.trace);
    let back = read_ndjson(text.as_bytes()).unwrap();
    assert_eq!(back, out.trace);
    assert!(verify(&back).ok);
}

#[test]
fn tracing_does_not_change_the_run() {
    let cfg = small_config(5, 40, 0.2, 40.0);
    assert_eq!(run_scenario(&cfg, true).unwrap().metrics, run_scenario(&cfg, false).unwrap().metrics);
}

/// Stepping through a mobile run: live agents never exceed the seeded
/// count and the attacker set never changes.
#[test]
fn agent_population_and_ground_truth_stable() {
    let mut cfg = small_config(11, 40, 0.2, 60.0);
    // small batteries so that deaths and handoffs happen
    cfg.energy.initial_j = 0.08;
    let mut w = World::new(cfg, true).unwrap();
    let truth = w.malicious().clone();
    let seeded = w.nodes().iter().filter(|n| n.agent.is_some()).count();
    let mut steps = 0u64;
    while w.step().is_some() {
        steps += 1;
        if steps.is_multiple_of(500) {
            let live = w.nodes().iter().filter(|n| n.alive() && n.agent.is_some()).count();
            assert!(live <= seeded);
            assert_eq!(w.malicious(), &truth);
        }
    }
    let out = w.finish();
    assert!(out.metrics.deaths > 0, "scenario should exercise deaths");
    let roles: BTreeSet<NodeId> = out
        .trace
        .iter()
        .filter_map(|r| match r {
            TraceRecord::Role { node, role, .. } if role != "honest" => Some(*node),
            _ => None,
        })
        .collect();
    assert_eq!(roles, truth);
    assert!(verify(&out.trace).ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Whatever the scenario, the trace recomputes to the reported metrics,
    /// the clock never runs backwards, every handshake is in order and no
    /// route goes through a node its installer had quarantined.
    #[test]
    fn random_runs_verify(
        seed in any::<u64>(),
        n in 10usize..40,
        pct in 0u32..=40,
        speed in prop::sample::select(vec![0.0, 20.0, 180.0]),
        defense in any::<bool>(),
        capture in any::<bool>(),
        fake in any::<bool>(),
        liar in any::<bool>(),
    ) {
        let mut cfg = small_config(seed, n, pct as f64 / 100.0, 25.0);
        cfg.scenario.arena_m = 900.0;
        cfg.mobility.speed_mps = speed;
        cfg.scenario.defense = defense;
        cfg.adversary.captures_agents = capture;
        cfg.adversary.injects_fake_agents = fake;
        cfg.adversary.fake_agent_interval_s = 3.0;
        cfg.adversary.false_confidence = liar;
        let out = run_scenario(&cfg, true).unwrap();
        let r = verify(&out.trace);
        prop_assert!(r.ok, "{:?}", r.mismatches);
        prop_assert_eq!(r.clock_regressions, 0);
        prop_assert!(r.handshake_issues.is_empty(), "{:?}", r.handshake_issues);
        prop_assert!(r.route_violations.is_empty());
        prop_assert_eq!(out.metrics.route_violations, 0);
        if !defense {
            prop_assert_eq!(out.metrics.comment_requests + out.metrics.agent_handshakes + out.metrics.warnings, 0);
        }
    }
}
