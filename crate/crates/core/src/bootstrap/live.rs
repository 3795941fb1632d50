use std::io::ErrorKind;
use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpStream, UdpSocket};
use std::time::{Duration, Instant};

use hickory_proto::op::{Message, MessageType, OpCode, Query, ResponseCode};
use hickory_proto::rr::{Name, RData, RecordType};

use super::harvest::Resolver;
use super::probe::{ConnectResult, Prober};
use super::{BootstrapError, ResolveErrorKind};

pub const DEFAULT_PROBE_TIMEOUT: Duration = Duration::from_secs(5);

/// Full TCP connect probe. Refusal means an RST; anything else that fails
/// within the timeout counts as filtered.
#[derive(Debug, Clone, Copy)]
pub struct LiveProber {
    pub timeout: Duration,
}

impl Default for LiveProber {
    fn default() -> Self {
        LiveProber { timeout: DEFAULT_PROBE_TIMEOUT }
    }
}

impl Prober for LiveProber {
    fn connect(&self, ip: IpAddr, port: u16) -> ConnectResult {
        match TcpStream::connect_timeout(&SocketAddr::new(ip, port), self.timeout) {
            Ok(_) => ConnectResult::Accepted,
            Err(e) if e.kind() == ErrorKind::ConnectionRefused => ConnectResult::Refused,
            Err(e) => {
                log::debug!("{ip}:{port}: {e}");
                ConnectResult::TimedOut
            }
        }
    }
}

/// Single-server recursive DNS client over UDP, keeping the response code
/// that the system resolver would hide.
#[derive(Debug, Clone)]
pub struct LiveResolver {
    server: SocketAddr,
    timeout: Duration,
}

impl LiveResolver {
    pub fn new(server: SocketAddr, timeout: Duration) -> Self {
        LiveResolver { server, timeout }
    }

    /// Uses the first `nameserver` from /etc/resolv.conf.
    pub fn from_system(timeout: Duration) -> Result<Self, BootstrapError> {
        let conf = std::fs::read_to_string("/etc/resolv.conf")?;
        let server = conf
            .lines()
            .filter_map(|l| l.trim().strip_prefix("nameserver"))
            .find_map(|rest| rest.trim().parse::<IpAddr>().ok())
            .ok_or(BootstrapError::NoNameserver)?;
        Ok(LiveResolver::new(SocketAddr::new(server, 53), timeout))
    }

    fn exchange(&self, name: Name, rtype: RecordType) -> Result<Message, ResolveErrorKind> {
        let id: u16 = rand::random();
        let mut query = Message::new(id, MessageType::Query, OpCode::Query);
        query.metadata.recursion_desired = true;
        query.add_query(Query::query(name, rtype));
        let bytes = query.to_vec().map_err(|_| ResolveErrorKind::ServFail)?;

        let bind: SocketAddr = match self.server {
            SocketAddr::V4(_) => (Ipv4Addr::UNSPECIFIED, 0).into(),
            SocketAddr::V6(_) => (std::net::Ipv6Addr::UNSPECIFIED, 0).into(),
        };
        let io_err = |e: std::io::Error| {
            log::debug!("DNS socket: {e}");
            ResolveErrorKind::Timeout
        };
        let socket = UdpSocket::bind(bind).map_err(io_err)?;
        socket.send_to(&bytes, self.server).map_err(io_err)?;
        let deadline = Instant::now() + self.timeout;
        let mut buf = [0u8; 4096];
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(ResolveErrorKind::Timeout);
            }
            socket.set_read_timeout(Some(left)).map_err(io_err)?;
            let (len, from) = match socket.recv_from(&mut buf) {
                Ok(r) => r,
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Err(ResolveErrorKind::Timeout)
                }
                Err(e) => return Err(io_err(e)),
            };
            if from != self.server {
                continue;
            }
            match Message::from_vec(&buf[..len]) {
                Ok(msg) if msg.metadata.id == id => return Ok(msg),
                _ => continue,
            }
        }
    }
}

impl Resolver for LiveResolver {
    fn resolve_a(&mut self, name: &str) -> Result<Vec<IpAddr>, ResolveErrorKind> {
        let qname = Name::from_ascii(name).map_err(|_| ResolveErrorKind::NxDomain)?;
        let msg = self.exchange(qname, RecordType::A)?;
        match msg.metadata.response_code {
            ResponseCode::NoError => Ok(msg
                .answers
                .iter()
                .filter_map(|r| match &r.data {
                    RData::A(a) => Some(IpAddr::V4(a.0)),
                    _ => None,
                })
                .collect()),
            ResponseCode::NXDomain => Err(ResolveErrorKind::NxDomain),
            _ => Err(ResolveErrorKind::ServFail),
        }
    }

    fn resolve_ptr(&mut self, ip: IpAddr) -> Result<Option<String>, ResolveErrorKind> {
        let msg = self.exchange(Name::from(ip), RecordType::PTR)?;
        match msg.metadata.response_code {
            ResponseCode::NoError => Ok(msg.answers.iter().find_map(|r| match &r.data {
                RData::PTR(ptr) => Some(ptr.0.to_utf8().trim_end_matches('.').to_string()),
                _ => None,
            })),
            ResponseCode::NXDomain => Ok(None),
            _ => Err(ResolveErrorKind::ServFail),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::TcpListener;

    #[test]
    fn tcp_open_and_closed() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let port = listener.local_addr().unwrap().port();
        let prober = LiveProber { timeout: Duration::from_secs(2) };
        let lo = IpAddr::V4(Ipv4Addr::LOCALHOST);
        assert_eq!(prober.connect(lo, port), ConnectResult::Accepted);
        drop(listener);
        assert_eq!(prober.connect(lo, port), ConnectResult::Refused);
    }

    #[test]
    fn dns_rcodes_over_loopback() {
        let server = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = server.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let mut buf = [0u8; 512];
            for rcode in [ResponseCode::NoError, ResponseCode::NXDomain, ResponseCode::ServFail] {
                let (len, peer) = server.recv_from(&mut buf).unwrap();
                let req = Message::from_vec(&buf[..len]).unwrap();
                let mut resp = Message::error_msg(req.metadata.id, OpCode::Query, rcode);
                resp.add_queries(req.queries.clone());
                if rcode == ResponseCode::NoError {
                    let name = req.queries[0].name().clone();
                    resp.add_answer(hickory_proto::rr::Record::from_rdata(
                        name,
                        60,
                        RData::A(hickory_proto::rr::rdata::A(Ipv4Addr::new(192, 0, 2, 7))),
                    ));
                }
                server.send_to(&resp.to_vec().unwrap(), peer).unwrap();
            }
        });
        let mut r = LiveResolver::new(addr, Duration::from_secs(2));
        assert_eq!(r.resolve_a("seed.example").unwrap(), vec![IpAddr::V4(Ipv4Addr::new(192, 0, 2, 7))]);
        assert_eq!(r.resolve_a("gone.example"), Err(ResolveErrorKind::NxDomain));
        assert_eq!(r.resolve_a("broken.example"), Err(ResolveErrorKind::ServFail));
        handle.join().unwrap();
    }
}
