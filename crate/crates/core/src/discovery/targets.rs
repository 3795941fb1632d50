use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::node::{node_hash, NodeId};

pub const MAX_PREFIX_BITS: u32 = 32;

/// Finds, for every `prefix_bits`-bit prefix, a random 64-byte target whose
/// Keccak-256 starts with that prefix. Random ids are drawn from a seeded
/// generator until every bucket has one; the first id to land in a bucket
/// keeps it.
pub fn precompute_targets(prefix_bits: u32, rng_seed: Option<u64>) -> BTreeMap<u32, NodeId> {
    assert!(prefix_bits <= MAX_PREFIX_BITS, "prefix_bits must be at most 32");
    let buckets: u64 = 1u64 << prefix_bits;
    let mut rng = match rng_seed {
        Some(s) => ChaCha8Rng::seed_from_u64(s),
        None => ChaCha8Rng::from_entropy(),
    };
    let mut out = BTreeMap::new();
    let mut candidate = [0u8; 64];
    while (out.len() as u64) < buckets {
        rng.fill_bytes(&mut candidate);
        let id = NodeId(candidate);
        let prefix = node_hash(&id).prefix(prefix_bits);
        out.entry(prefix).or_insert(id);
    }
    out
}
