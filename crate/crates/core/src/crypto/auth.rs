use rand::Rng;
use serde::{Deserialize, Serialize};

use super::group::CyclicGroup;
use super::registration::NodeKeys;
use crate::kernel::SimTime;

/// Authentication message sent from a registered node to a one-hop peer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthMessage<E> {
    pub d_prime: E,
    pub nonce: u64,
    pub timestamp: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AuthError {
    #[error("timestamp outside the freshness window")]
    StaleTimestamp,
    #[error("authenticator does not verify")]
    AlgebraMismatch,
}

/// Builds `D' = P + K` with `P = ID'_A·P_A·PU_B` and `K = ID'_A·M·PU_TA`
/// for a fresh random nonce `M`.
///
/// The nonce is nonzero, otherwise `K` would not depend on `PU_TA`. Nonces
/// that make `D'` the identity element are redrawn: such an authenticator
/// would verify against a forged signed identity.
pub fn make_auth<G: CyclicGroup, R: Rng + ?Sized>(
    group: &G,
    sender: &NodeKeys<G>,
    receiver_pub: G::Element,
    ta_public: G::Element,
    rng: &mut R,
    now: SimTime,
) -> AuthMessage<G::Element> {
    loop {
        let m = group.random_scalar(rng);
        let msg = make_auth_with_nonce(group, sender, receiver_pub, ta_public, m, now);
        if msg.d_prime != group.identity() {
            return msg;
        }
    }
}

/// Deterministic variant of [`make_auth`] with a caller-chosen nonce.
pub fn make_auth_with_nonce<G: CyclicGroup>(
    group: &G,
    sender: &NodeKeys<G>,
    receiver_pub: G::Element,
    ta_public: G::Element,
    nonce: u64,
    now: SimTime,
) -> AuthMessage<G::Element> {
    let p = group.scale(group.scalar_mul(sender.signed_id, sender.private), receiver_pub);
    let k = group.scale(group.scalar_mul(sender.signed_id, nonce), ta_public);
    AuthMessage {
        d_prime: group.add(p, k),
        nonce: group.reduce(nonce),
        timestamp: now,
    }
}

/// Receiver side: checks freshness, then recomputes `D = ID'_A·P_B·PU_A`
/// and accepts iff `D' − D = ID'_A·M·PU_TA`.
///
/// `sender_signed_id` comes from the authority's roster, not from the message.
#[allow(clippy::too_many_arguments)]
pub fn check_auth<G: CyclicGroup>(
    group: &G,
    receiver: &NodeKeys<G>,
    sender_signed_id: u64,
    sender_pub: G::Element,
    ta_public: G::Element,
    msg: &AuthMessage<G::Element>,
    now: SimTime,
    window: SimTime,
) -> Result<(), AuthError> {
    let age = if now >= msg.timestamp {
        now - msg.timestamp
    } else {
        msg.timestamp - now
    };
    if age > window {
        return Err(AuthError::StaleTimestamp);
    }
    if msg.d_prime == group.identity() {
        return Err(AuthError::AlgebraMismatch);
    }
    let d = group.scale(group.scalar_mul(sender_signed_id, receiver.private), sender_pub);
    let residue = group.sub(msg.d_prime, d);
    let expected = group.scale(group.scalar_mul(sender_signed_id, msg.nonce), ta_public);
    if residue == expected {
        Ok(())
    } else {
        Err(AuthError::AlgebraMismatch)
    }
}
