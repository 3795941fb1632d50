use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::net::IpAddr;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use super::node::{NodeId, PeerInfo};
use super::targets::{precompute_targets, MAX_PREFIX_BITS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("timed out")]
    Timeout,
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// The two discovery calls the crawler needs. Implementations must tolerate
/// concurrent calls.
pub trait DiscoveryTransport: Sync {
    fn ping_pong(&self, peer: &PeerInfo) -> Result<(), TransportError>;
    fn find_node(&self, peer: &PeerInfo, target: &NodeId) -> Result<Vec<PeerInfo>, TransportError>;
}

impl<T: DiscoveryTransport + ?Sized> DiscoveryTransport for &T {
    fn ping_pong(&self, peer: &PeerInfo) -> Result<(), TransportError> {
        (**self).ping_pong(peer)
    }
    fn find_node(&self, peer: &PeerInfo, target: &NodeId) -> Result<Vec<PeerInfo>, TransportError> {
        (**self).find_node(peer, target)
    }
}

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub prefix_bits: u32,
    pub neighbor_k: usize,
    pub max_in_flight: usize,
    /// Worker threads issuing queries; never more than `max_in_flight` are outstanding.
    pub workers: usize,
    pub ping_timeout: Duration,
    pub query_timeout: Duration,
    pub rng_seed: Option<u64>,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            prefix_bits: 13,
            neighbor_k: 16,
            max_in_flight: 500,
            workers: 32,
            ping_timeout: Duration::from_millis(500),
            query_timeout: Duration::from_millis(500),
            rng_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CrawlError {
    #[error("no seed answered ping")]
    NoSeedsReachable,
    #[error("invalid crawl configuration: {0}")]
    InvalidConfig(String),
}

impl CrawlConfig {
    pub fn validate(&self) -> Result<(), CrawlError> {
        if self.prefix_bits > MAX_PREFIX_BITS {
            return Err(CrawlError::InvalidConfig(format!("prefix_bits {} > 32", self.prefix_bits)));
        }
        if self.neighbor_k == 0 {
            return Err(CrawlError::InvalidConfig("neighbor_k must be at least 1".into()));
        }
        if self.max_in_flight == 0 {
            return Err(CrawlError::InvalidConfig("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FailedEndpoint {
    pub ip: IpAddr,
    pub port: u16,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndpointStats {
    pub unique_node_ids: u64,
    pub unique_ips: u64,
    pub unique_ports: u64,
    pub ip_port_combos: u64,
    pub private_range_ips: u64,
    /// Distinct node ids per IP, most populated first.
    pub node_ids_per_ip: Vec<(IpAddr, u64)>,
    /// Known peers per hash prefix.
    pub prefix_histogram: BTreeMap<u32, u64>,
    /// Number of prefixes holding a given number of peers.
    pub prefix_occupancy: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrawlReport {
    pub prefix_bits: u32,
    /// Sorted by node id.
    pub known_peers: Vec<PeerInfo>,
    pub failed_endpoints: Vec<FailedEndpoint>,
    #[serde(flatten)]
    pub stats: EndpointStats,
}

impl CrawlReport {
    pub fn new(mut known_peers: Vec<PeerInfo>, mut failed: Vec<FailedEndpoint>, prefix_bits: u32) -> Self {
        known_peers.sort_by(|a, b| a.node_id.cmp(&b.node_id));
        failed.sort();
        let stats = endpoint_stats(&known_peers, prefix_bits);
        CrawlReport { prefix_bits, known_peers, failed_endpoints: failed, stats }
    }

    /// JSON with object keys in sorted order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn is_private_range(ip: &IpAddr) -> bool {
    match ip {
        IpAddr::V4(v4) => {
            let o = v4.octets();
            o[0] == 10 || (o[0] == 172 && (16..=31).contains(&o[1])) || (o[0] == 192 && o[1] == 168)
        }
        IpAddr::V6(_) => false,
    }
}

pub fn endpoint_stats(peers: &[PeerInfo], prefix_bits: u32) -> EndpointStats {
    let ids: BTreeSet<&NodeId> = peers.iter().map(|p| &p.node_id).collect();
    let ips: BTreeSet<IpAddr> = peers.iter().map(|p| p.ip).collect();
    let ports: BTreeSet<u16> = peers.iter().map(|p| p.port).collect();
    let combos: BTreeSet<(IpAddr, u16)> = peers.iter().map(|p| (p.ip, p.port)).collect();

    let mut per_ip: BTreeMap<IpAddr, BTreeSet<&NodeId>> = BTreeMap::new();
    for p in peers {
        per_ip.entry(p.ip).or_default().insert(&p.node_id);
    }
    let mut node_ids_per_ip: Vec<(IpAddr, u64)> =
        per_ip.into_iter().map(|(ip, s)| (ip, s.len() as u64)).collect();
    node_ids_per_ip.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut prefix_histogram: BTreeMap<u32, u64> = BTreeMap::new();
    for id in &ids {
        *prefix_histogram.entry(id.hash().prefix(prefix_bits)).or_default() += 1;
    }
    let mut prefix_occupancy: BTreeMap<u64, u64> = BTreeMap::new();
    for count in prefix_histogram.values() {
        *prefix_occupancy.entry(*count).or_default() += 1;
    }

    EndpointStats {
        unique_node_ids: ids.len() as u64,
        unique_ips: ips.len() as u64,
        unique_ports: ports.len() as u64,
        ip_port_combos: combos.len() as u64,
        private_range_ips: ips.iter().filter(|ip| is_private_range(ip)).count() as u64,
        node_ids_per_ip,
        prefix_histogram,
        prefix_occupancy,
    }
}

/// Crawls with freshly precomputed targets for `config.prefix_bits`.
pub fn crawl<T: DiscoveryTransport>(
    transport: &T,
    seeds: &[PeerInfo],
    config: &CrawlConfig,
) -> Result<CrawlReport, CrawlError> {
    config.validate()?;
    let targets: Vec<NodeId> = precompute_targets(config.prefix_bits, config.rng_seed)
        .into_values()
        .collect();
    crawl_with_targets(transport, seeds, &targets, config)
}

/// Queries every (target, known peer) pair with FIND_NODE and admits each
/// newly reported peer that answers a ping. Pairs are served from a FIFO
/// queue in batches of at most `max_in_flight`; results of a batch are merged
/// in queue order, so a deterministic transport gives a deterministic report.
pub fn crawl_with_targets<T: DiscoveryTransport>(
    transport: &T,
    seeds: &[PeerInfo],
    targets: &[NodeId],
    config: &CrawlConfig,
) -> Result<CrawlReport, CrawlError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.clamp(1, config.max_in_flight))
        .build()
        .map_err(|e| CrawlError::InvalidConfig(e.to_string()))?;

    let mut state = CrawlState::default();
    let fresh_seeds: Vec<PeerInfo> = seeds
        .iter()
        .filter(|p| state.attempted.insert(p.node_id))
        .copied()
        .collect();
    let admitted = pool.install(|| state.ping_all(transport, fresh_seeds, config.max_in_flight));
    if admitted.is_empty() {
        return Err(CrawlError::NoSeedsReachable);
    }
    let mut queue: VecDeque<(usize, PeerInfo)> = VecDeque::new();
    for t in 0..targets.len() {
        for p in &admitted {
            queue.push_back((t, *p));
        }
    }

    while !queue.is_empty() {
        let take = queue.len().min(config.max_in_flight);
        let batch: Vec<(usize, PeerInfo)> = queue.drain(..take).collect();
        let responses: Vec<Result<Vec<PeerInfo>, TransportError>> = pool.install(|| {
            batch
                .par_iter()
                .map(|(t, peer)| transport.find_node(peer, &targets[*t]))
                .collect()
        });

        let mut candidates = Vec::new();
        for ((_, peer), response) in batch.iter().zip(responses) {
            match response {
                Ok(found) => {
                    for p in found.into_iter().take(config.neighbor_k) {
                        if state.attempted.insert(p.node_id) {
                            candidates.push(p);
                        }
                    }
                }
                Err(e) => state.failed.push(FailedEndpoint {
                    ip: peer.ip,
                    port: peer.port,
                    reason: format!("find_node: {e}"),
                }),
            }
        }

        let admitted = pool.install(|| state.ping_all(transport, candidates, config.max_in_flight));
        for p in admitted {
            for t in 0..targets.len() {
                queue.push_back((t, p));
            }
        }
    }

    Ok(CrawlReport::new(state.known, state.failed, config.prefix_bits))
}

#[derive(Default)]
struct CrawlState {
    /// Every node id that has been (or is being) pinged; a peer is pinged once.
    attempted: HashSet<NodeId>,
    known: Vec<PeerInfo>,
    failed: Vec<FailedEndpoint>,
}

impl CrawlState {
    /// Pings `peers` in chunks of at most `cap`; returns those that answered, in input order.
    fn ping_all<T: DiscoveryTransport>(
        &mut self,
        transport: &T,
        peers: Vec<PeerInfo>,
        cap: usize,
    ) -> Vec<PeerInfo> {
        let mut admitted = Vec::new();
        for chunk in peers.chunks(cap) {
            let results: Vec<Result<(), TransportError>> =
                chunk.par_iter().map(|p| transport.ping_pong(p)).collect();
            for (p, r) in chunk.iter().zip(results) {
                match r {
                    Ok(()) => {
                        self.known.push(*p);
                        admitted.push(*p);
                    }
                    Err(e) => self.failed.push(FailedEndpoint {
                        ip: p.ip,
                        port: p.port,
                        reason: format!("ping: {e}"),
                    }),
                }
            }
        }
        admitted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::Ipv4Addr;

    fn peer(i: u8, ip: [u8; 4], port: u16) -> PeerInfo {
        PeerInfo::new(NodeId([i; 64]), IpAddr::V4(Ipv4Addr::from(ip)), port)
    }

    #[test]
    fn stats_for_shared_ip() {
        let peers = vec![peer(1, [8, 8, 8, 8], 1), peer(2, [8, 8, 8, 8], 2), peer(3, [8, 8, 8, 8], 3)];
        let s = endpoint_stats(&peers, 4);
        assert_eq!((s.unique_ips, s.unique_ports, s.ip_port_combos), (1, 3, 3));
        assert_eq!(s.unique_node_ids, 3);
    }

    #[test]
    fn private_ranges() {
        let s = endpoint_stats(&[peer(1, [192, 168, 0, 5], 30303)], 0);
        assert_eq!(s.private_range_ips, 1);
        for (ip, private) in [
            ([10, 1, 2, 3], true),
            ([172, 16, 0, 1], true),
            ([172, 31, 255, 255], true),
            ([172, 32, 0, 1], false),
            ([192, 169, 0, 1], false),
            ([11, 0, 0, 1], false),
        ] {
            assert_eq!(is_private_range(&IpAddr::V4(Ipv4Addr::from(ip))), private, "{ip:?}");
        }
    }

    #[test]
    fn per_ip_counts_sorted_descending() {
        let mut peers: Vec<PeerInfo> = (0..5).map(|i| peer(i, [1, 1, 1, 1], 30303)).collect();
        peers.push(peer(9, [2, 2, 2, 2], 30303));
        let s = endpoint_stats(&peers, 0);
        assert_eq!(s.node_ids_per_ip[0], (IpAddr::V4(Ipv4Addr::new(1, 1, 1, 1)), 5));
        assert_eq!(s.node_ids_per_ip[1].1, 1);
    }

    #[test]
    fn config_bounds() {
        let c = CrawlConfig { prefix_bits: 33, ..Default::default() };
        assert!(c.validate().is_err());
        let c = CrawlConfig { neighbor_k: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
