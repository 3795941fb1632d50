//! Kademlia-style discovery crawling: XOR metric over Keccak-256 node
//! hashes, target precomputation, the crawl loop and its transports.

mod crawl;
pub mod discv4;
mod node;
mod sim;
mod targets;

pub use crawl::{
    crawl, crawl_with_targets, endpoint_stats, is_private_range, CrawlConfig, CrawlError, CrawlReport,
    DiscoveryTransport, EndpointStats, FailedEndpoint, TransportError,
};
pub use node::{
    node_hash, parse_enode, select_neighbors, select_neighbors_hashed, xor_distance, Distance, NodeHash,
    NodeId, PeerInfo,
};
pub use sim::{build_sim_overlay, GroundTruth, SimError, SimOverlay, SimParams};
pub use targets::{precompute_targets, MAX_PREFIX_BITS};
