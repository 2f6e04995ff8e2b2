//! Smart agents: seeding, cycles, migration bookkeeping and the three-step
//! confidence exchange.

mod handshake;
mod lifecycle;

pub use handshake::{
    audit_steps, confidence_handshake, AgentIdentity, Handshake, HandshakeStep, HostCredentials, OrderViolation,
    StepRecord, TrustOutcome,
};
pub use lifecycle::{
    resolve_arrivals, seed_agents, select_handoff, AgentCycleConfig, AgentState, SmartAgent, TimeoutAction,
    VisitResult,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
}
