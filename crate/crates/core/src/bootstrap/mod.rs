//! Bootstrap quality measurement: DNS seed harvesting, reverse DNS
//! categorisation and TCP port reachability.

mod harvest;
mod live;
mod probe;
mod rdns;
mod sim;

pub use harvest::{harvest_ptr, harvest_seeds, HarvestRound, NameOutcome, Resolver, SeedHarvest};
pub use live::{LiveProber, LiveResolver, DEFAULT_PROBE_TIMEOUT};
pub use probe::{probe_ports, ConnectResult, ProbeOutcome, ProbeReport, ProbeSummary, Prober};
pub use rdns::{classify_rdns, HostCategory, MatchKind, RdnsRule, RdnsRules};
pub use sim::{ScriptedProber, ScriptedResolver, Selection, SimDnsParams, SimProber, SimResolver};

use std::net::IpAddr;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Where a node looks for its first peers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSource {
    pub port: u16,
    #[serde(default)]
    pub hardcoded: Vec<IpAddr>,
    #[serde(default)]
    pub dns: Vec<String>,
}

impl SeedSource {
    pub fn from_json(text: &str) -> Result<Self, BootstrapError> {
        let source: SeedSource =
            serde_json::from_str(text).map_err(|e| BootstrapError::SeedFile(e.to_string()))?;
        if source.port == 0 {
            return Err(BootstrapError::InvalidPort);
        }
        Ok(source)
    }

    pub fn from_path(path: &Path) -> Result<Self, BootstrapError> {
        SeedSource::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResolveErrorKind {
    #[serde(rename = "NXDOMAIN")]
    NxDomain,
    #[serde(rename = "SERVFAIL")]
    ServFail,
    #[serde(rename = "TIMEOUT")]
    Timeout,
}

impl std::fmt::Display for ResolveErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResolveErrorKind::NxDomain => "NXDOMAIN",
            ResolveErrorKind::ServFail => "SERVFAIL",
            ResolveErrorKind::Timeout => "TIMEOUT",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BootstrapError {
    #[error("at least one harvest round is required")]
    ZeroRounds,
    #[error("port must be between 1 and 65535")]
    InvalidPort,
    #[error("invalid seed source: {0}")]
    SeedFile(String),
    #[error("rDNS rule line {line}: {reason}")]
    RuleLine { line: u64, reason: String },
    #[error("no nameserver configured")]
    NoNameserver,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
