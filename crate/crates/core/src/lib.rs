//! Ledger forensics and peer-to-peer measurement for Ethereum, Namecoin and
//! Peercoin.
//!
//! Ledgers are ingested from NDJSON dumps into an embedded [`store::Store`];
//! the analysis modules read from it. Network measurement (discovery
//! crawling, bootstrap probing) runs over pluggable transports with seeded
//! simulators alongside the live implementations.

pub mod bootstrap;
pub mod chain;
pub mod discovery;
pub mod eth;
pub mod ingest;
pub mod model;
pub mod period;
pub mod poison;
pub mod primitives;
pub mod query;
pub mod report;
pub mod rlp;
pub mod store;

pub use model::{Block, ChainKind, ChainSummary, NameOpKind, NameOpPayload, ProofKind, Transaction};
pub use primitives::{keccak256, Address, Hash32};
pub use store::Store;
