use std::collections::BTreeMap;

use serde::Serialize;

use super::ChainError;
use crate::model::{ChainKind, ProofKind};
use crate::period::{IsoWeek, YearMonth};
use crate::store::Store;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Month,
    Week,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Period {
    Month(YearMonth),
    Week(IsoWeek),
}

impl std::fmt::Display for Period {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Period::Month(m) => m.fmt(f),
            Period::Week(w) => w.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosPowRow {
    pub period: Period,
    pub pos: u64,
    pub pow: u64,
}

/// Proof-of-stake and proof-of-work block counts per calendar period,
/// gap-filled, trusting each block's ingested proof tag.
pub fn pos_pow_counts(
    store: &Store,
    granularity: Granularity,
    cutoff_height: Option<u64>,
) -> Result<Vec<PosPowRow>, ChainError> {
    let chain = ChainKind::Peercoin;
    let blocks = store.blocks(chain, cutoff_height)?;
    if blocks.is_empty() {
        return Err(ChainError::EmptyChain(chain));
    }
    let mut counts: BTreeMap<Period, (u64, u64)> = BTreeMap::new();
    for b in &blocks {
        let proof = b.proof.ok_or(ChainError::MissingProofTag(b.height))?;
        let period = match granularity {
            Granularity::Month => Period::Month(YearMonth::from_timestamp(b.timestamp)),
            Granularity::Week => Period::Week(IsoWeek::from_timestamp(b.timestamp)),
        };
        let c = counts.entry(period).or_default();
        match proof {
            ProofKind::Pos => c.0 += 1,
            ProofKind::Pow => c.1 += 1,
        }
    }
    let first = *counts.keys().next().expect("non-empty");
    let last = *counts.keys().next_back().expect("non-empty");
    let periods: Vec<Period> = match (first, last) {
        (Period::Month(a), Period::Month(b)) => YearMonth::range(a, b).map(Period::Month).collect(),
        (Period::Week(a), Period::Week(b)) => IsoWeek::range(a, b).map(Period::Week).collect(),
        _ => unreachable!("single granularity per call"),
    };
    Ok(periods
        .into_iter()
        .map(|p| {
            let (pos, pow) = counts.get(&p).copied().unwrap_or_default();
            PosPowRow { period: p, pos, pow }
        })
        .collect())
}
