use std::cmp::Ordering;
use std::fmt;
use std::net::IpAddr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::primitives::{decode_hex, keccak256, ParseHexError};

/// 64-byte node identity (an uncompressed secp256k1 public key without its tag byte).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub [u8; 64]);

/// Keccak-256 of a [`NodeId`]; the coordinate used by the XOR metric.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeHash(pub [u8; 32]);

/// Big-endian 256-bit XOR distance. Derived `Ord` on the byte array is the
/// numeric order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Distance(pub [u8; 32]);

impl NodeId {
    pub fn hash(&self) -> NodeHash {
        node_hash(self)
    }
}

pub fn node_hash(id: &NodeId) -> NodeHash {
    NodeHash(keccak256(&id.0))
}

pub fn xor_distance(a: &NodeHash, b: &NodeHash) -> Distance {
    let mut out = [0u8; 32];
    for (o, (x, y)) in out.iter_mut().zip(a.0.iter().zip(b.0.iter())) {
        *o = x ^ y;
    }
    Distance(out)
}

impl NodeHash {
    /// The leading `bits` bits (at most 32) as an integer.
    pub fn prefix(&self, bits: u32) -> u32 {
        assert!(bits <= 32, "prefix wider than 32 bits");
        if bits == 0 {
            return 0;
        }
        let lead = u32::from_be_bytes([self.0[0], self.0[1], self.0[2], self.0[3]]);
        lead >> (32 - bits)
    }
}

impl FromStr for NodeId {
    type Err = ParseHexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = decode_hex(s)?;
        let arr: [u8; 64] = bytes
            .as_slice()
            .try_into()
            .map_err(|_| ParseHexError::Length { expected: 64, got: bytes.len() })?;
        Ok(NodeId(arr))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({}..)", &hex::encode(&self.0[..6]))
    }
}

impl fmt::Debug for NodeHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeHash({})", hex::encode(self.0))
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeerInfo {
    pub node_id: NodeId,
    pub ip: IpAddr,
    pub port: u16,
}

impl PeerInfo {
    pub fn new(node_id: NodeId, ip: IpAddr, port: u16) -> Self {
        PeerInfo { node_id, ip, port }
    }
}

/// Parses an `enode://<128 hex>@ip:port` URL.
pub fn parse_enode(s: &str) -> Result<PeerInfo, String> {
    let rest = s.trim().strip_prefix("enode://").ok_or("missing enode:// scheme")?;
    let (id, addr) = rest.split_once('@').ok_or("missing @")?;
    let addr = addr.split('?').next().unwrap_or(addr);
    let node_id: NodeId = id.parse().map_err(|e| format!("bad node id: {e}"))?;
    let sock: std::net::SocketAddr = addr.parse().map_err(|e| format!("bad endpoint {addr:?}: {e}"))?;
    if sock.port() == 0 {
        return Err("port 0".into());
    }
    Ok(PeerInfo::new(node_id, sock.ip(), sock.port()))
}

fn by_distance(a: &(Distance, &PeerInfo), b: &(Distance, &PeerInfo)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| a.1.node_id.cmp(&b.1.node_id))
}

/// The `k` peers closest to `target`, nearest first; equal distances are
/// ordered by node id.
pub fn select_neighbors(candidates: &[PeerInfo], target: &NodeHash, k: usize) -> Vec<PeerInfo> {
    select_neighbors_hashed(candidates.iter().map(|p| (node_hash(&p.node_id), p)), target, k)
}

/// As [`select_neighbors`], with candidate hashes already computed.
pub fn select_neighbors_hashed<'a>(
    candidates: impl IntoIterator<Item = (NodeHash, &'a PeerInfo)>,
    target: &NodeHash,
    k: usize,
) -> Vec<PeerInfo> {
    let mut keyed: Vec<(Distance, &PeerInfo)> = candidates
        .into_iter()
        .map(|(h, p)| (xor_distance(&h, target), p))
        .collect();
    if k == 0 {
        return Vec::new();
    }
    if keyed.len() > k {
        keyed.select_nth_unstable_by(k - 1, by_distance);
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(by_distance);
    keyed.into_iter().map(|(_, p)| *p).collect()
}
