use sauav_core::agent::{audit_steps, confidence_handshake, AgentIdentity, HandshakeStep, HostCredentials, TrustOutcome};
use sauav_core::crypto::{mask_data, unmask_data, DataBits, ForgeKit, NetworkSecrets};
use sauav_core::kernel::{stream_rng, RngStream};

struct Parties {
    secrets: NetworkSecrets,
    enemy: ForgeKit,
}

fn parties(seed: u64) -> Parties {
    let mut rng = stream_rng(seed, RngStream::Keys);
    let secrets = NetworkSecrets::provision(&mut rng, 32, 2);
    let enemy = ForgeKit::generate(&mut rng, 32);
    Parties { secrets, enemy }
}

fn outcome(p: &Parties, genuine: bool, provisioned: bool, nonce: u64) -> TrustOutcome {
    let agent = if genuine {
        AgentIdentity::Genuine(p.secrets.agent_kit())
    } else {
        AgentIdentity::Fake(p.enemy.clone())
    };
    let host = if provisioned {
        HostCredentials::Provisioned(p.secrets.node_codes())
    } else {
        HostCredentials::Enemy(p.enemy.clone())
    };
    let hs = confidence_handshake(&agent, &host, nonce);
    audit_steps(&hs.steps).unwrap();
    hs.outcome
}

#[test]
fn truth_table() {
    for seed in 0..50 {
        let p = parties(seed);
        for nonce in [0, 1, seed * 7919] {
            assert_eq!(outcome(&p, true, true, nonce), TrustOutcome::MutualTrust);
            assert_eq!(outcome(&p, true, false, nonce), TrustOutcome::AgentRejectsNode);
            assert_eq!(outcome(&p, false, true, nonce), TrustOutcome::NodeRejectsAgent);
            assert_eq!(outcome(&p, false, false, nonce), TrustOutcome::NodeRejectsAgent);
        }
    }
}

/// A fake agent built with a different kit than the enemy host's.
#[test]
fn foreign_fake_agent_at_enemy_host() {
    let p = parties(1);
    let other = ForgeKit::generate(&mut stream_rng(2, RngStream::Keys), 32);
    let hs = confidence_handshake(&AgentIdentity::Fake(other), &HostCredentials::Enemy(p.enemy.clone()), 3);
    assert_eq!(hs.outcome, TrustOutcome::NodeRejectsAgent);
    assert!(hs.data_code.is_none());
    audit_steps(&hs.steps).unwrap();
}

#[test]
fn data_code_released_only_on_mutual_trust() {
    let p = parties(4);
    for (g, pr) in [(true, true), (true, false), (false, true), (false, false)] {
        let agent = if g { AgentIdentity::Genuine(p.secrets.agent_kit()) } else { AgentIdentity::Fake(p.enemy.clone()) };
        let host = if pr { HostCredentials::Provisioned(p.secrets.node_codes()) } else { HostCredentials::Enemy(p.enemy.clone()) };
        let hs = confidence_handshake(&agent, &host, 0);
        let released = hs.steps.iter().any(|s| s.step == HandshakeStep::DataCodeReleased);
        assert_eq!(released, g && pr);
        assert_eq!(hs.data_code.is_some(), g && pr);
    }
}

#[test]
fn step_order_and_early_stop() {
    use HandshakeStep::*;
    let p = parties(5);
    let full = confidence_handshake(
        &AgentIdentity::Genuine(p.secrets.agent_kit()),
        &HostCredentials::Provisioned(p.secrets.node_codes()),
        0,
    );
    let steps: Vec<_> = full.steps.iter().map(|s| s.step).collect();
    assert_eq!(steps, [Code1Requested, Code1Sent, Code2Sent, Code2Checked, Code3Sent, Code3Checked, DataCodeReleased]);

    // a rejected agent never sees code 3
    let fake = confidence_handshake(
        &AgentIdentity::Fake(p.enemy.clone()),
        &HostCredentials::Provisioned(p.secrets.node_codes()),
        0,
    );
    assert_eq!(fake.steps.last().unwrap().step, Code2Checked);
    assert!(!fake.steps.last().unwrap().ok);
}

#[test]
fn masked_data_needs_the_data_code() {
    let p = parties(6);
    let code = p.secrets.data_code;
    for (v, a) in [(false, false), (false, true), (true, false), (true, true)] {
        let bits = DataBits::from_flags(2, v, a).unwrap();
        let masked = mask_data(&code, &bits).unwrap();
        assert_ne!(masked, bits, "nonzero data code must change the bits");
        assert_eq!(unmask_data(&code, &masked).unwrap(), bits);
    }
}
