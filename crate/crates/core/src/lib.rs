//! A software weather station: a simulated sensor node answering polls
//! over a checksummed ASCII line protocol, a collector that polls nodes on
//! a fixed ten-second schedule and appends readings to daily CSV logs, and
//! an embedded web service that regenerates a station page every five
//! minutes and serves a JSON API.

pub mod clock;
pub mod collector;
pub mod logstore;
pub mod nodesim;
pub mod protocol;
pub mod station;
pub mod webserver;

/// A configuration value violated one of its invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}
