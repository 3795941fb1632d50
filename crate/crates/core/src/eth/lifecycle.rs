//! Zombie contracts, lifetimes and pre-creation funding.

use std::collections::BTreeMap;

use serde::Serialize;

use super::registry::{scan_creations, ContractRegistry};
use crate::model::Transaction;
use crate::primitives::{Address, Hash32};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrecreationFunding {
    pub funding_tx: Hash32,
    pub funding_height: u64,
    pub contract: Address,
    pub creation_height: u64,
    #[serde(with = "crate::model::u128_string")]
    pub value: u128,
}

/// Value-bearing transactions sent to an address before a contract was created there.
pub fn find_precreation_funding(txs: &[Transaction], registry: &ContractRegistry) -> Vec<PrecreationFunding> {
    txs.iter()
        .filter(|tx| tx.value > 0)
        .filter_map(|tx| {
            let to = tx.recipient_address()?;
            let c = registry.get(&to)?;
            (c.creation_height > tx.block_height).then(|| PrecreationFunding {
                funding_tx: tx.hash,
                funding_height: tx.block_height,
                contract: to,
                creation_height: c.creation_height,
                value: tx.value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZombieEntry {
    pub address: Address,
    pub creator: Address,
    pub height: u64,
    pub tx: Hash32,
    #[serde(with = "crate::model::u128_string")]
    pub balance: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZombieReport {
    pub count: u64,
    #[serde(with = "crate::model::u128_string")]
    pub total_balance: u128,
    /// (block height, zombies created at or below it), one point per height with creations.
    pub cdf: Vec<(u64, u64)>,
    /// Largest endowments first; ties by height then address.
    pub top: Vec<ZombieEntry>,
    /// Zombies per creating account, most first.
    pub per_creator: Vec<(Address, u64)>,
}

/// Zombies are creations with empty input; each keeps its endowment forever.
pub fn zombie_report(txs: &[Transaction], top_k: usize) -> ZombieReport {
    let zombies: Vec<ZombieEntry> = scan_creations(txs)
        .into_iter()
        .filter(|c| c.tx.input_is_empty())
        .map(|c| ZombieEntry {
            address: c.address,
            creator: c.creator,
            height: c.tx.block_height,
            tx: c.tx.hash,
            balance: c.tx.value,
        })
        .collect();

    let mut per_height: BTreeMap<u64, u64> = BTreeMap::new();
    let mut per_creator: BTreeMap<Address, u64> = BTreeMap::new();
    for z in &zombies {
        *per_height.entry(z.height).or_default() += 1;
        *per_creator.entry(z.creator).or_default() += 1;
    }
    let cdf = per_height
        .into_iter()
        .scan(0u64, |acc, (h, n)| {
            *acc += n;
            Some((h, *acc))
        })
        .collect();
    let mut per_creator: Vec<(Address, u64)> = per_creator.into_iter().collect();
    per_creator.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut top = zombies.clone();
    top.sort_by(|a, b| b.balance.cmp(&a.balance).then(a.height.cmp(&b.height)).then(a.address.cmp(&b.address)));
    top.truncate(top_k);

    ZombieReport {
        count: zombies.len() as u64,
        total_balance: zombies.iter().map(|z| z.balance).sum(),
        cdf,
        top,
        per_creator,
    }
}

pub const DEFAULT_LIFETIME_EDGES: [u64; 2] = [100, 10_000];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LifetimeBucket {
    /// Inclusive upper bound in blocks; `None` is the open top bucket.
    pub upper: Option<u64>,
    pub count: u64,
}

/// Histogram of termination minus creation height over terminated contracts.
/// Buckets are closed above: a lifetime equal to an edge falls in that edge's
/// bucket. Empty when nothing has terminated.
pub fn lifetime_histogram(registry: &ContractRegistry, edges: &[u64]) -> Vec<LifetimeBucket> {
    let lifetimes: Vec<u64> = registry.iter().filter_map(|c| c.lifetime()).collect();
    if lifetimes.is_empty() {
        return Vec::new();
    }
    let mut edges = edges.to_vec();
    edges.sort_unstable();
    edges.dedup();
    let mut buckets: Vec<LifetimeBucket> = edges
        .iter()
        .map(|e| LifetimeBucket { upper: Some(*e), count: 0 })
        .chain(std::iter::once(LifetimeBucket { upper: None, count: 0 }))
        .collect();
    for l in lifetimes {
        let i = edges.partition_point(|e| *e < l);
        buckets[i].count += 1;
    }
    buckets
}
