//! Trusted-authority registration, pairwise authentication over a pluggable
//! cyclic group, and the keyed-hash code chain used by smart agents.

mod auth;
mod codes;
mod group;
mod registration;

pub use auth::{check_auth, make_auth, make_auth_with_nonce, AuthError, AuthMessage};
pub use codes::{
    derive_code2, derive_code3, digest_word, mask_data, unmask_data, AgentKit, CodeChain, CodeWord,
    DataBits, DataCode, ForgeKit, KeyedHash, NetworkSecrets, NodeCodes,
};
pub use group::{AdditiveGroup, CyclicGroup, ModElement, SchnorrGroup};
pub use registration::{verify_registration, NodeKeys, Registration, TrustedAuthority};

use crate::protocol::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("node {0} is already registered")]
    DuplicateRegistration(NodeId),
    #[error("scalar {0} outside [1, q)")]
    ScalarOutOfRange(u64),
    #[error("registration of node {0} did not verify")]
    RegistrationRejected(NodeId),
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("invalid field width {0}")]
    InvalidWidth(usize),
}
