//! Live discovery transport speaking the devp2p discovery v4 UDP protocol.
//!
//! Packet layout: `hash(32) || signature(65) || type(1) || rlp(data)` where
//! `hash = keccak256(signature || type || data)` and the signature is a
//! recoverable secp256k1 signature over `keccak256(type || data)`.

use std::net::{IpAddr, Ipv4Addr, Ipv6Addr, SocketAddr, UdpSocket};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use k256::ecdsa::{RecoveryId, Signature, SigningKey, VerifyingKey};
use rand::RngCore;

use super::crawl::{DiscoveryTransport, TransportError};
use super::node::{NodeId, PeerInfo};
use crate::primitives::keccak256;
use crate::rlp::{self, Item};

pub const PING: u8 = 0x01;
pub const PONG: u8 = 0x02;
pub const FIND_NODE: u8 = 0x03;
pub const NEIGHBORS: u8 = 0x04;

const HEADER_LEN: usize = 32 + 65;
const EXPIRY_SECS: u64 = 20;
const MAX_PACKET: usize = 1280;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PacketError {
    #[error("packet too short")]
    TooShort,
    #[error("hash mismatch")]
    BadHash,
    #[error("bad signature")]
    BadSignature,
    #[error("malformed payload: {0}")]
    Payload(String),
}

impl From<rlp::DecodeError> for PacketError {
    fn from(e: rlp::DecodeError) -> Self {
        PacketError::Payload(e.to_string())
    }
}

pub fn node_id_of(key: &VerifyingKey) -> NodeId {
    let point = key.to_sec1_point(false);
    let bytes = point.as_bytes();
    let mut id = [0u8; 64];
    id.copy_from_slice(&bytes[1..65]);
    NodeId(id)
}

/// Signs and frames one packet.
pub fn encode_packet(key: &SigningKey, ptype: u8, data: &Item) -> Vec<u8> {
    let mut signed = vec![ptype];
    signed.extend_from_slice(&rlp::encode(data));
    let (sig, recid): (Signature, RecoveryId) = key.sign_prehash_recoverable(&keccak256(&signed));
    let mut body = Vec::with_capacity(65 + signed.len());
    body.extend_from_slice(&sig.to_bytes());
    body.push(recid.to_byte());
    body.extend_from_slice(&signed);
    let mut out = keccak256(&body).to_vec();
    out.extend_from_slice(&body);
    out
}

#[derive(Debug, Clone)]
pub struct Packet {
    pub hash: [u8; 32],
    pub sender: NodeId,
    pub ptype: u8,
    pub data: Item,
}

/// Verifies framing and signature; trailing bytes after the payload list are
/// tolerated for forward compatibility.
pub fn decode_packet(buf: &[u8]) -> Result<Packet, PacketError> {
    if buf.len() < HEADER_LEN + 2 {
        return Err(PacketError::TooShort);
    }
    let hash: [u8; 32] = buf[..32].try_into().expect("length checked");
    if keccak256(&buf[32..]) != hash {
        return Err(PacketError::BadHash);
    }
    let sig = Signature::from_slice(&buf[32..96]).map_err(|_| PacketError::BadSignature)?;
    let recid = RecoveryId::from_byte(buf[96]).ok_or(PacketError::BadSignature)?;
    let signed = &buf[HEADER_LEN..];
    let key = VerifyingKey::recover_from_prehash(&keccak256(signed), &sig, recid)
        .map_err(|_| PacketError::BadSignature)?;
    let (data, _) = rlp::decode_prefix(&signed[1..])?;
    Ok(Packet { hash, sender: node_id_of(&key), ptype: signed[0], data })
}

fn ip_bytes(ip: &IpAddr) -> Vec<u8> {
    match ip {
        IpAddr::V4(v4) => v4.octets().to_vec(),
        IpAddr::V6(v6) => v6.octets().to_vec(),
    }
}

pub fn endpoint(ip: &IpAddr, udp: u16, tcp: u16) -> Item {
    Item::List(vec![Item::bytes(ip_bytes(ip)), Item::uint(udp.into()), Item::uint(tcp.into())])
}

fn expiration() -> Item {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_secs();
    Item::uint(now + EXPIRY_SECS)
}

pub fn ping_payload(from: &SocketAddr, to: &SocketAddr) -> Item {
    Item::List(vec![
        Item::uint(4),
        endpoint(&from.ip(), from.port(), from.port()),
        endpoint(&to.ip(), to.port(), to.port()),
        expiration(),
    ])
}

pub fn pong_payload(to: &SocketAddr, ping_hash: &[u8; 32]) -> Item {
    Item::List(vec![endpoint(&to.ip(), to.port(), to.port()), Item::bytes(ping_hash.to_vec()), expiration()])
}

pub fn find_node_payload(target: &NodeId) -> Item {
    Item::List(vec![Item::bytes(target.0.to_vec()), expiration()])
}

pub fn neighbors_payload(peers: &[PeerInfo]) -> Item {
    let nodes = peers
        .iter()
        .map(|p| {
            Item::List(vec![
                Item::bytes(ip_bytes(&p.ip)),
                Item::uint(p.port.into()),
                Item::uint(p.port.into()),
                Item::bytes(p.node_id.0.to_vec()),
            ])
        })
        .collect();
    Item::List(vec![Item::List(nodes), expiration()])
}

fn parse_ip(b: &[u8]) -> Option<IpAddr> {
    match b.len() {
        4 => Some(IpAddr::V4(Ipv4Addr::from(<[u8; 4]>::try_from(b).ok()?))),
        16 => Some(IpAddr::V6(Ipv6Addr::from(<[u8; 16]>::try_from(b).ok()?))),
        _ => None,
    }
}

/// Peers listed in a NEIGHBORS payload; malformed entries are skipped.
pub fn parse_neighbors(data: &Item) -> Result<Vec<PeerInfo>, PacketError> {
    let fields = data.as_list()?;
    let nodes = fields.first().ok_or(PacketError::Payload("empty neighbors".into()))?.as_list()?;
    let mut out = Vec::new();
    for n in nodes {
        let Ok(f) = n.as_list() else { continue };
        if f.len() < 4 {
            continue;
        }
        let (Ok(ip), Ok(udp), Ok(id)) = (f[0].as_bytes(), f[1].as_u64(), f[3].as_bytes()) else {
            continue;
        };
        let (Some(ip), Ok(id)) = (parse_ip(ip), <[u8; 64]>::try_from(id)) else { continue };
        if udp == 0 || udp > u64::from(u16::MAX) {
            continue;
        }
        out.push(PeerInfo::new(NodeId(id), ip, udp as u16));
    }
    Ok(out)
}

fn pong_ping_hash(data: &Item) -> Option<[u8; 32]> {
    data.as_list().ok()?.get(1)?.as_bytes().ok()?.try_into().ok()
}

/// One UDP socket shared by all queries; calls are serialized on it.
pub struct LiveTransport {
    socket: Mutex<UdpSocket>,
    key: SigningKey,
    local: SocketAddr,
    ping_timeout: Duration,
    query_timeout: Duration,
}

impl LiveTransport {
    pub fn bind(bind: SocketAddr, ping_timeout: Duration, query_timeout: Duration) -> std::io::Result<Self> {
        let socket = UdpSocket::bind(bind)?;
        let local = socket.local_addr()?;
        let mut secret = [0u8; 32];
        let key = loop {
            rand::thread_rng().fill_bytes(&mut secret);
            if let Ok(k) = SigningKey::from_slice(&secret) {
                break k;
            }
        };
        Ok(LiveTransport { socket: Mutex::new(socket), key, local, ping_timeout, query_timeout })
    }

    pub fn node_id(&self) -> NodeId {
        node_id_of(self.key.verifying_key())
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local
    }

    /// Reads packets until `deadline` or until `done` returns true. Inbound
    /// pings are answered so the remote side considers us bonded.
    fn pump(
        &self,
        socket: &UdpSocket,
        deadline: Instant,
        mut done: impl FnMut(SocketAddr, &Packet) -> bool,
    ) -> Result<(), TransportError> {
        let mut buf = [0u8; MAX_PACKET * 2];
        loop {
            let now = Instant::now();
            if now >= deadline {
                return Err(TransportError::Timeout);
            }
            socket
                .set_read_timeout(Some(deadline - now))
                .map_err(|e| TransportError::Unreachable(e.to_string()))?;
            let (n, from) = match socket.recv_from(&mut buf) {
                Ok(r) => r,
                Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                    return Err(TransportError::Timeout)
                }
                Err(e) => return Err(TransportError::Unreachable(e.to_string())),
            };
            let Ok(packet) = decode_packet(&buf[..n]) else { continue };
            if packet.ptype == PING {
                let pong = encode_packet(&self.key, PONG, &pong_payload(&from, &packet.hash));
                let _ = socket.send_to(&pong, from);
            }
            if done(from, &packet) {
                return Ok(());
            }
        }
    }

    fn send(&self, socket: &UdpSocket, to: SocketAddr, ptype: u8, data: &Item) -> Result<[u8; 32], TransportError> {
        let packet = encode_packet(&self.key, ptype, data);
        socket.send_to(&packet, to).map_err(|e| TransportError::Unreachable(e.to_string()))?;
        Ok(packet[..32].try_into().expect("hash prefix"))
    }
}

impl DiscoveryTransport for LiveTransport {
    fn ping_pong(&self, peer: &PeerInfo) -> Result<(), TransportError> {
        let socket = self.socket.lock().expect("socket lock");
        let to = SocketAddr::new(peer.ip, peer.port);
        let hash = self.send(&socket, to, PING, &ping_payload(&self.local, &to))?;
        self.pump(&socket, Instant::now() + self.ping_timeout, |from, p| {
            from == to && p.ptype == PONG && pong_ping_hash(&p.data) == Some(hash)
        })?;
        // Give the remote a moment to ping back so it records an endpoint proof for us.
        let _ = self.pump(&socket, Instant::now() + self.ping_timeout / 2, |from, p| {
            from == to && p.ptype == PING
        });
        Ok(())
    }

    fn find_node(&self, peer: &PeerInfo, target: &NodeId) -> Result<Vec<PeerInfo>, TransportError> {
        let socket = self.socket.lock().expect("socket lock");
        let to = SocketAddr::new(peer.ip, peer.port);
        self.send(&socket, to, FIND_NODE, &find_node_payload(target))?;
        let mut found = Vec::new();
        let mut malformed = None;
        let res = self.pump(&socket, Instant::now() + self.query_timeout, |from, p| {
            if from == to && p.ptype == NEIGHBORS {
                match parse_neighbors(&p.data) {
                    Ok(mut peers) => found.append(&mut peers),
                    Err(e) => malformed = Some(e),
                }
            }
            found.len() >= 16
        });
        match (res, found.is_empty(), malformed) {
            (_, false, _) => Ok(found),
            (_, true, Some(e)) => Err(TransportError::Protocol(e.to_string())),
            (Err(e), true, None) => Err(e),
            (Ok(()), true, None) => Ok(found),
        }
    }
}
