//! Cut-off handling and chain-level summaries.

use std::collections::BTreeMap;

use crate::model::{ChainKind, ChainSummary};
use crate::period::YearMonth;
use crate::store::{Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("no blocks for chain {0} within the requested range")]
    EmptyChain(ChainKind),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Greatest height whose block timestamp is strictly before `cutoff`.
pub fn apply_cutoff(store: &Store, chain: ChainKind, cutoff: u64) -> Result<u64, QueryError> {
    store
        .blocks(chain, None)?
        .iter()
        .filter(|b| b.timestamp < cutoff)
        .map(|b| b.height)
        .max()
        .ok_or(QueryError::EmptyChain(chain))
}

pub fn summarize_chain(
    store: &Store,
    chain: ChainKind,
    cutoff_height: Option<u64>,
) -> Result<ChainSummary, QueryError> {
    let blocks = store.blocks(chain, cutoff_height)?;
    let (Some(first), Some(last)) = (blocks.first(), blocks.last()) else {
        return Err(QueryError::EmptyChain(chain));
    };
    let first_block_time = blocks.iter().map(|b| b.timestamp).min().unwrap_or(first.timestamp);
    let cutoff_time = blocks.iter().map(|b| b.timestamp).max().unwrap_or(last.timestamp);
    let cutoff_height = cutoff_height.unwrap_or(last.height);
    let txs = store.transactions(chain, Some(cutoff_height))?;
    Ok(ChainSummary {
        chain,
        first_block_time,
        cutoff_time,
        cutoff_height,
        block_count: blocks.len() as u64,
        tx_count: txs.len() as u64,
        tx_volume: txs.iter().map(|t| t.value).sum(),
    })
}

/// Transactions per UTC calendar month of their containing block, gap-filled
/// between the first and last active month.
pub fn monthly_tx_counts(
    store: &Store,
    chain: ChainKind,
    cutoff_height: Option<u64>,
) -> Result<Vec<(YearMonth, u64)>, QueryError> {
    if store.max_height(chain)?.is_none() {
        return Err(QueryError::EmptyChain(chain));
    }
    let months = store.month_index(chain)?;
    let mut counts: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for tx in store.transactions(chain, cutoff_height)? {
        match months.get(&tx.block_height) {
            Some(m) => *counts.entry(*m).or_default() += 1,
            None => log::warn!("transaction {} references missing block {}", tx.hash, tx.block_height),
        }
    }
    let (Some(first), Some(last)) = (counts.keys().next().copied(), counts.keys().next_back().copied())
    else {
        return Ok(Vec::new());
    };
    Ok(YearMonth::range(first, last)
        .map(|m| (m, counts.get(&m).copied().unwrap_or(0)))
        .collect())
}
