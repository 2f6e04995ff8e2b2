use serde::{Deserialize, Serialize};

use crate::crypto::{derive_code2, derive_code3, AgentKit, CodeWord, DataCode, ForgeKit, NodeCodes};

/// Result of the three-step confidence exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrustOutcome {
    MutualTrust,
    AgentRejectsNode,
    NodeRejectsAgent,
}

/// What the arriving agent carries.
#[derive(Debug, Clone)]
pub enum AgentIdentity {
    Genuine(AgentKit),
    /// Injected by an adversary; has no agent hash.
    Fake(ForgeKit),
}

impl AgentIdentity {
    pub fn is_genuine(&self) -> bool {
        matches!(self, AgentIdentity::Genuine(_))
    }
}

/// What the host node holds.
#[derive(Debug, Clone)]
pub enum HostCredentials {
    Provisioned(NodeCodes),
    /// Enemy node without the code chain. It answers with forged words and
    /// recognises agents forged with the same kit.
    Enemy(ForgeKit),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandshakeStep {
    Code1Requested,
    Code1Sent,
    Code2Sent,
    Code2Checked,
    Code3Sent,
    Code3Checked,
    DataCodeReleased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: HandshakeStep,
    /// Only meaningful for the two check steps.
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct Handshake {
    pub outcome: TrustOutcome,
    pub steps: Vec<StepRecord>,
    /// Present only on mutual trust.
    pub data_code: Option<DataCode>,
}

/// Runs the exchange. `nonce` varies the words an enemy node or fake agent
/// makes up.
pub fn confidence_handshake(agent: &AgentIdentity, host: &HostCredentials, nonce: u64) -> Handshake {
    let mut steps = Vec::with_capacity(7);
    let mut log = |step, ok| steps.push(StepRecord { step, ok });

    log(HandshakeStep::Code1Requested, true);
    let code1: CodeWord = match host {
        HostCredentials::Provisioned(c) => c.code1.clone(),
        HostCredentials::Enemy(k) => k.forge(b"code1", nonce),
    };
    log(HandshakeStep::Code1Sent, true);

    let code2 = match agent {
        AgentIdentity::Genuine(kit) => derive_code2(&kit.h_agent, &code1),
        AgentIdentity::Fake(k) => k.h_forge.eval(code1.as_bytes()),
    };
    log(HandshakeStep::Code2Sent, true);

    let code2_ok = match host {
        HostCredentials::Provisioned(c) => code2 == c.code2,
        HostCredentials::Enemy(k) => code2 != k.h_forge.eval(code1.as_bytes()),
    };
    log(HandshakeStep::Code2Checked, code2_ok);
    if !code2_ok {
        return Handshake {
            outcome: TrustOutcome::NodeRejectsAgent,
            steps,
            data_code: None,
        };
    }

    let code3 = match host {
        HostCredentials::Provisioned(c) => derive_code3(&c.h_node, &code2),
        HostCredentials::Enemy(k) => k.forge(b"code3", nonce),
    };
    log(HandshakeStep::Code3Sent, true);

    let AgentIdentity::Genuine(kit) = agent else {
        // A fake agent got past an enemy host forging with another kit. It
        // has nothing to compare code 3 against.
        return Handshake {
            outcome: TrustOutcome::NodeRejectsAgent,
            steps,
            data_code: None,
        };
    };
    let code3_ok = code3 == kit.code3_expected;
    log(HandshakeStep::Code3Checked, code3_ok);
    if !code3_ok {
        return Handshake {
            outcome: TrustOutcome::AgentRejectsNode,
            steps,
            data_code: None,
        };
    }
    log(HandshakeStep::DataCodeReleased, true);
    Handshake {
        outcome: TrustOutcome::MutualTrust,
        steps,
        data_code: Some(kit.data_code),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderViolation {
    #[error("code 3 sent before code 2 was verified")]
    Code3BeforeCode2,
    #[error("data code released before code 3 was verified")]
    DataCodeBeforeCode3,
    #[error("step {0:?} out of sequence")]
    OutOfSequence(HandshakeStep),
}

/// Checks that a transcript follows the protocol order and never releases a
/// secret before the check that guards it.
pub fn audit_steps(steps: &[StepRecord]) -> Result<(), OrderViolation> {
    use HandshakeStep::*;
    let order = [Code1Requested, Code1Sent, Code2Sent, Code2Checked, Code3Sent, Code3Checked, DataCodeReleased];
    let mut code2_ok = false;
    let mut code3_ok = false;
    for (i, rec) in steps.iter().enumerate() {
        if order.get(i) != Some(&rec.step) {
            return Err(match rec.step {
                Code3Sent => OrderViolation::Code3BeforeCode2,
                DataCodeReleased => OrderViolation::DataCodeBeforeCode3,
                s => OrderViolation::OutOfSequence(s),
            });
        }
        match rec.step {
            Code2Checked => code2_ok = rec.ok,
            Code3Sent if !code2_ok => return Err(OrderViolation::Code3BeforeCode2),
            Code3Checked => code3_ok = rec.ok,
            DataCodeReleased if !code3_ok => return Err(OrderViolation::DataCodeBeforeCode3),
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::NetworkSecrets;
    use crate::kernel::{stream_rng, RngStream};

    fn parties() -> (AgentIdentity, AgentIdentity, HostCredentials, HostCredentials) {
        let mut rng = stream_rng(5, RngStream::Keys);
        let s = NetworkSecrets::provision(&mut rng, 32, 2);
        let forge = ForgeKit::generate(&mut rng, 32);
        (
            AgentIdentity::Genuine(s.agent_kit()),
            AgentIdentity::Fake(forge.clone()),
            HostCredentials::Provisioned(s.node_codes()),
            HostCredentials::Enemy(forge),
        )
    }

    #[test]
    fn truth_table() {
        let (genuine, fake, good, enemy) = parties();
        let cells = [
            (&genuine, &good, TrustOutcome::MutualTrust),
            (&genuine, &enemy, TrustOutcome::AgentRejectsNode),
            (&fake, &good, TrustOutcome::NodeRejectsAgent),
            (&fake, &enemy, TrustOutcome::NodeRejectsAgent),
        ];
        for (a, h, want) in cells {
            let hs = confidence_handshake(a, h, 3);
            assert_eq!(hs.outcome, want);
            assert_eq!(hs.data_code.is_some(), want == TrustOutcome::MutualTrust);
            audit_steps(&hs.steps).unwrap();
        }
    }

    #[test]
    fn enemy_with_fixed_wrong_code3_is_rejected() {
        let (genuine, _, good, _) = parties();
        let HostCredentials::Provisioned(mut codes) = good else { unreachable!() };
        codes.h_node = crate::crypto::KeyedHash::new([0xab; 32], 32);
        let hs = confidence_handshake(&genuine, &HostCredentials::Provisioned(codes), 0);
        assert_eq!(hs.outcome, TrustOutcome::AgentRejectsNode);
    }

    #[test]
    fn audit_catches_early_release() {
        let (genuine, _, good, _) = parties();
        let mut steps = confidence_handshake(&genuine, &good, 0).steps;
        steps[3].ok = false;
        assert_eq!(audit_steps(&steps), Err(OrderViolation::Code3BeforeCode2));
        let mut steps = confidence_handshake(&genuine, &good, 0).steps;
        steps[5].ok = false;
        assert_eq!(audit_steps(&steps), Err(OrderViolation::DataCodeBeforeCode3));
        let mut steps = confidence_handshake(&genuine, &good, 0).steps;
        steps.swap(4, 6);
        assert!(audit_steps(&steps).is_err());
    }
}
