use std::collections::{BTreeMap, HashMap};
use std::net::{IpAddr, Ipv4Addr};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::harvest::Resolver;
use super::probe::{ConnectResult, Prober};
use super::ResolveErrorKind;

/// Fixed per-name answer scripts. The k-th query for a name returns the k-th
/// scripted answer; the last one repeats.
#[derive(Debug, Clone, Default)]
pub struct ScriptedResolver {
    a: HashMap<String, Vec<Result<Vec<IpAddr>, ResolveErrorKind>>>,
    ptr: HashMap<IpAddr, Result<Option<String>, ResolveErrorKind>>,
    calls: HashMap<String, usize>,
}

impl ScriptedResolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn script(mut self, name: &str, answers: Vec<Result<Vec<IpAddr>, ResolveErrorKind>>) -> Self {
        assert!(!answers.is_empty(), "script for {name} is empty");
        self.a.insert(name.to_string(), answers);
        self
    }

    pub fn ptr(mut self, ip: IpAddr, answer: Result<Option<String>, ResolveErrorKind>) -> Self {
        self.ptr.insert(ip, answer);
        self
    }
}

impl Resolver for ScriptedResolver {
    fn resolve_a(&mut self, name: &str) -> Result<Vec<IpAddr>, ResolveErrorKind> {
        let Some(script) = self.a.get(name) else { return Err(ResolveErrorKind::NxDomain) };
        let k = self.calls.entry(name.to_string()).or_default();
        let answer = script[(*k).min(script.len() - 1)].clone();
        *k += 1;
        answer
    }

    fn resolve_ptr(&mut self, ip: IpAddr) -> Result<Option<String>, ResolveErrorKind> {
        self.ptr.get(&ip).cloned().unwrap_or(Ok(None))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Walk the pool in order, `per_query` addresses at a time.
    RoundRobin,
    /// A fresh uniform sample of `per_query` addresses each time.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDnsParams {
    pub pool_size: usize,
    pub per_query: usize,
    pub selection: Selection,
    pub servfail_rate: f64,
    /// Fraction of addresses with a PTR record.
    pub ptr_rate: f64,
    pub seed: u64,
}

/// Seeded DNS seed simulator: each name owns a disjoint address pool.
#[derive(Debug, Clone)]
pub struct SimResolver {
    params: SimDnsParams,
    pools: BTreeMap<String, Vec<IpAddr>>,
    cursors: HashMap<String, usize>,
    rng: ChaCha8Rng,
}

impl SimResolver {
    pub fn new(names: &[String], params: SimDnsParams) -> Self {
        let pools = names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let ips = (0..params.pool_size)
                    .map(|j| {
                        let n = (i * params.pool_size + j) as u32;
                        IpAddr::V4(Ipv4Addr::from(0xC612_0000u32.wrapping_add(n)))
                    })
                    .collect();
                (name.clone(), ips)
            })
            .collect();
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        SimResolver { params, pools, cursors: HashMap::new(), rng }
    }

    pub fn pool(&self, name: &str) -> Option<&[IpAddr]> {
        self.pools.get(name).map(Vec::as_slice)
    }
}

impl Resolver for SimResolver {
    fn resolve_a(&mut self, name: &str) -> Result<Vec<IpAddr>, ResolveErrorKind> {
        let Some(pool) = self.pools.get(name) else { return Err(ResolveErrorKind::NxDomain) };
        if self.rng.gen_bool(self.params.servfail_rate.clamp(0.0, 1.0)) {
            return Err(ResolveErrorKind::ServFail);
        }
        let n = self.params.per_query.min(pool.len());
        Ok(match self.params.selection {
            Selection::RoundRobin => {
                let cursor = self.cursors.entry(name.to_string()).or_default();
                let picked = (0..n).map(|k| pool[(*cursor + k) % pool.len()]).collect();
                *cursor = (*cursor + n) % pool.len().max(1);
                picked
            }
            Selection::Random => sample(&mut self.rng, pool.len(), n).into_iter().map(|i| pool[i]).collect(),
        })
    }

    fn resolve_ptr(&mut self, ip: IpAddr) -> Result<Option<String>, ResolveErrorKind> {
        let h = mix(self.params.seed ^ ip_bits(ip));
        let has_ptr = (h >> 11) as f64 / (1u64 << 53) as f64 <= self.params.ptr_rate;
        Ok(has_ptr.then(|| {
            let kind = if h & 1 == 0 { "cpe" } else { "srv" };
            format!("{kind}-{}.sim.example", ip.to_string().replace(['.', ':'], "-"))
        }))
    }
}

/// Fixed connect results; unlisted addresses time out.
#[derive(Debug, Clone, Default)]
pub struct ScriptedProber(pub HashMap<(IpAddr, u16), ConnectResult>);

impl ScriptedProber {
    pub fn from_pairs(port: u16, pairs: impl IntoIterator<Item = (IpAddr, ConnectResult)>) -> Self {
        ScriptedProber(pairs.into_iter().map(|(ip, r)| ((ip, port), r)).collect())
    }
}

impl Prober for ScriptedProber {
    fn connect(&self, ip: IpAddr, port: u16) -> ConnectResult {
        self.0.get(&(ip, port)).copied().unwrap_or(ConnectResult::TimedOut)
    }
}

/// Stateless seeded prober: each (address, port) draws its outcome from a
/// hash, so results do not depend on probe order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimProber {
    pub open_rate: f64,
    pub closed_rate: f64,
    pub seed: u64,
}

impl Prober for SimProber {
    fn connect(&self, ip: IpAddr, port: u16) -> ConnectResult {
        let h = mix(self.seed ^ ip_bits(ip) ^ (u64::from(port) << 48));
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        if u < self.open_rate {
            ConnectResult::Accepted
        } else if u < self.open_rate + self.closed_rate {
            ConnectResult::Refused
        } else {
            ConnectResult::TimedOut
        }
    }
}

fn ip_bits(ip: IpAddr) -> u64 {
    match ip {
        IpAddr::V4(v4) => u64::from(u32::from(v4)),
        IpAddr::V6(v6) => {
            let x = u128::from(v6);
            (x as u64) ^ ((x >> 64) as u64).rotate_left(17)
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
