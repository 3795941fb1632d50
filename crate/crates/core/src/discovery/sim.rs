//! Deterministic in-memory overlay implementing [`DiscoveryTransport`].

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::net::{IpAddr, Ipv4Addr};

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::crawl::{DiscoveryTransport, TransportError};
use super::node::{node_hash, select_neighbors_hashed, NodeHash, NodeId, PeerInfo};

/// Topology file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n_peers: usize,
    pub degree: usize,
    #[serde(default)]
    pub unreachable_fraction: f64,
    #[serde(default, rename = "churn", alias = "churn_failure_rate")]
    pub churn_failure_rate: f64,
    #[serde(default, rename = "seed", alias = "rng_seed")]
    pub rng_seed: u64,
    /// Peers returned per FIND_NODE answer.
    #[serde(default = "default_bucket")]
    pub bucket_size: usize,
}

fn default_bucket() -> usize {
    16
}

impl SimParams {
    pub fn new(n_peers: usize, degree: usize, rng_seed: u64) -> Self {
        SimParams {
            n_peers,
            degree,
            unreachable_fraction: 0.0,
            churn_failure_rate: 0.0,
            rng_seed,
            bucket_size: default_bucket(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("unreachable_fraction must lie in [0, 1], got {0}")]
    UnreachableFraction(f64),
    #[error("churn_failure_rate must lie in [0, 1), got {0}")]
    Churn(f64),
    #[error("degree {degree} needs at least {} peers", degree + 1)]
    Degree { degree: usize },
}

struct SimPeer {
    info: PeerInfo,
    hash: NodeHash,
    table: Vec<usize>,
    reachable: bool,
}

pub struct SimOverlay {
    peers: Vec<SimPeer>,
    index: HashMap<NodeId, usize>,
    churn_threshold: u64,
    seed: u64,
    bucket_size: usize,
}

/// What the simulator knows that a crawler must discover.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub peers: Vec<PeerInfo>,
    pub unreachable: BTreeSet<NodeId>,
    /// Routing tables as indices into `peers`.
    pub tables: Vec<Vec<usize>>,
}

impl GroundTruth {
    pub fn contains(&self, id: &NodeId) -> bool {
        self.peers.iter().any(|p| p.node_id == *id)
    }

    /// Reachable peers that a crawl from `seeds` can possibly learn about:
    /// the closure over routing tables of reachable peers.
    pub fn reachable_from(&self, seeds: &[PeerInfo]) -> BTreeSet<NodeId> {
        let pos: HashMap<NodeId, usize> =
            self.peers.iter().enumerate().map(|(i, p)| (p.node_id, i)).collect();
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if let Some(&i) = pos.get(&s.node_id) {
                if !self.unreachable.contains(&s.node_id) && seen.insert(s.node_id) {
                    queue.push_back(i);
                }
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &self.tables[i] {
                let id = self.peers[j].node_id;
                if !self.unreachable.contains(&id) && seen.insert(id) {
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn word(b: &[u8]) -> u64 {
    u64::from_le_bytes(b[..8].try_into().expect("at least 8 bytes"))
}

pub fn build_sim_overlay(params: &SimParams) -> Result<(SimOverlay, GroundTruth), SimError> {
    if !(0.0..=1.0).contains(&params.unreachable_fraction) {
        return Err(SimError::UnreachableFraction(params.unreachable_fraction));
    }
    if !(0.0..1.0).contains(&params.churn_failure_rate) {
        return Err(SimError::Churn(params.churn_failure_rate));
    }
    let n = params.n_peers;
    if params.degree > 0 && params.degree >= n {
        return Err(SimError::Degree { degree: params.degree });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    let mut infos = Vec::with_capacity(n);
    for _ in 0..n {
        let mut id = [0u8; 64];
        rng.fill_bytes(&mut id);
        let ip = Ipv4Addr::new(rng.gen_range(11..=99), rng.gen(), rng.gen(), rng.gen_range(1..=254));
        let port = if rng.gen_bool(0.8) { 30303 } else { rng.gen_range(1024..=65535) };
        infos.push(PeerInfo::new(NodeId(id), IpAddr::V4(ip), port));
    }

    let mut tables = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<usize> = sample(&mut rng, n.saturating_sub(1), params.degree)
            .into_iter()
            .map(|j| if j >= i { j + 1 } else { j })
            .collect();
        tables.push(others);
    }

    let n_unreachable = ((n as f64) * params.unreachable_fraction).round() as usize;
    let unreachable_idx: BTreeSet<usize> = sample(&mut rng, n, n_unreachable.min(n)).into_iter().collect();

    let peers: Vec<SimPeer> = infos
        .iter()
        .enumerate()
        .map(|(i, info)| SimPeer {
            info: *info,
            hash: node_hash(&info.node_id),
            table: tables[i].clone(),
            reachable: !unreachable_idx.contains(&i),
        })
        .collect();
    let index = infos.iter().enumerate().map(|(i, p)| (p.node_id, i)).collect();
    let churn_threshold = (params.churn_failure_rate * u64::MAX as f64) as u64;

    let truth = GroundTruth {
        peers: infos.clone(),
        unreachable: unreachable_idx.iter().map(|&i| infos[i].node_id).collect(),
        tables,
    };
    let overlay = SimOverlay {
        peers,
        index,
        churn_threshold,
        seed: params.rng_seed,
        bucket_size: params.bucket_size,
    };
    Ok((overlay, truth))
}

impl SimOverlay {
    pub fn len(&self) -> usize {
        self.peers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peers.is_empty()
    }

    pub fn peer(&self, i: usize) -> PeerInfo {
        self.peers[i].info
    }

    /// Live peer lookup; `None` for unknown or unreachable endpoints.
    fn live(&self, peer: &PeerInfo) -> Option<&SimPeer> {
        let p = &self.peers[*self.index.get(&peer.node_id)?];
        (p.reachable && p.info.ip == peer.ip && p.info.port == peer.port).then_some(p)
    }

    /// Seeded per-query coin; a pure function of the query so concurrent
    /// calls stay deterministic.
    fn churned(&self, kind: u64, peer: &NodeId, target: Option<&NodeId>) -> bool {
        if self.churn_threshold == 0 {
            return false;
        }
        let mut x = mix(self.seed ^ kind);
        x = mix(x ^ word(&peer.0));
        if let Some(t) = target {
            x = mix(x ^ word(&t.0));
            x = mix(x ^ word(&t.0[8..]));
        }
        x < self.churn_threshold
    }
}

impl DiscoveryTransport for SimOverlay {
    fn ping_pong(&self, peer: &PeerInfo) -> Result<(), TransportError> {
        self.live(peer).ok_or(TransportError::Timeout)?;
        if self.churned(1, &peer.node_id, None) {
            return Err(TransportError::Timeout);
        }
        Ok(())
    }

    fn find_node(&self, peer: &PeerInfo, target: &NodeId) -> Result<Vec<PeerInfo>, TransportError> {
        let p = self.live(peer).ok_or(TransportError::Timeout)?;
        if self.churned(2, &peer.node_id, Some(target)) {
            return Err(TransportError::Timeout);
        }
        let target_hash = node_hash(target);
        let table = p.table.iter().map(|&j| (self.peers[j].hash, &self.peers[j].info));
        Ok(select_neighbors_hashed(table, &target_hash, self.bucket_size))
    }
}
