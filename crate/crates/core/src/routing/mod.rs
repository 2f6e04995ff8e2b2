//! Reactive route discovery filtered by trust, and quarantine bookkeeping.

mod discovery;
mod quarantine;
mod table;

pub use discovery::{reply_flags, select_reply, ReplyCandidate, ReplyFlags, RreqCache};
pub use quarantine::{warning_tag, QuarantineSet};
pub use table::{RouteEntry, RouteTable};

use serde::{Deserialize, Serialize};

use crate::protocol::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RoutingError {
    #[error("next hop {0} is not a valid neighbor")]
    UntrustedNextHop(NodeId),
    #[error("no route to {0}")]
    NoRoute(NodeId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingConfig {
    pub reply_window_ms: f64,
    pub route_expiry_s: f64,
    pub max_discovery_attempts: u8,
    /// Packets buffered per destination while a route is discovered.
    pub buffer_cap: usize,
    /// Times a data packet may be re-routed after a link refusal.
    pub max_reroutes: u8,
    /// Check Warning tags. Off lets anyone quarantine anyone.
    pub warning_auth: bool,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self {
            reply_window_ms: 200.0,
            route_expiry_s: 10.0,
            max_discovery_attempts: 3,
            buffer_cap: 64,
            max_reroutes: 2,
            warning_auth: true,
        }
    }
}

impl RoutingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.reply_window_ms <= 0.0 {
            return Err("routing.reply_window_ms must be positive".into());
        }
        if self.route_expiry_s <= 0.0 {
            return Err("routing.route_expiry_s must be positive".into());
        }
        if self.max_discovery_attempts == 0 {
            return Err("routing.max_discovery_attempts must be at least 1".into());
        }
        Ok(())
    }
}
