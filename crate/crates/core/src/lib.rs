pub mod crypto;
pub mod kernel;
pub mod protocol;
pub mod agent;
pub mod routing;
pub mod adversary;
pub mod detection;
pub mod metrics;
pub mod config;
pub mod trace;
pub mod sim;
pub mod sweep;
pub mod verify;
