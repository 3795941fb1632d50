use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::Serialize;

use super::fees::FeeSchedule;
use super::ChainError;
use crate::model::{Block, ChainKind, NameOpKind, NameOpPayload, Transaction};
use crate::period::{utc_date, IsoWeek};
use crate::primitives::Hash32;
use crate::store::Store;

/// The validated name operation carried by a Namecoin transaction, if any.
pub fn classify_name_op(tx: &Transaction) -> Result<Option<NameOpPayload>, ChainError> {
    if tx.chain != ChainKind::Namecoin {
        return Err(ChainError::WrongChain { expected: ChainKind::Namecoin, got: tx.chain });
    }
    let Some(op) = &tx.name_op else { return Ok(None) };
    op.check()
        .map_err(|field| ChainError::MalformedNameOp { tx: tx.hash, field: field.to_string() })?;
    Ok(Some(op.clone()))
}

fn block_times(blocks: &[Block]) -> HashMap<u64, u64> {
    blocks.iter().map(|b| (b.height, b.timestamp)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeeklyFeeRow {
    pub week: IsoWeek,
    pub kind: NameOpKind,
    /// Sum of fees actually paid, in 10^-8 NMC.
    pub paid_fee: u64,
}

/// Paid fees per ISO week and operation kind. Every week between the first
/// and last active week is emitted for each kind that occurs at all.
pub fn weekly_fee_sums(store: &Store, cutoff_height: Option<u64>) -> Result<Vec<WeeklyFeeRow>, ChainError> {
    let chain = ChainKind::Namecoin;
    let blocks = store.blocks(chain, cutoff_height)?;
    if blocks.is_empty() {
        return Err(ChainError::EmptyChain(chain));
    }
    let times = block_times(&blocks);
    let mut sums: BTreeMap<(IsoWeek, NameOpKind), u64> = BTreeMap::new();
    let mut kinds = BTreeSet::new();
    for tx in store.transactions(chain, cutoff_height)? {
        let Some(op) = classify_name_op(&tx)? else { continue };
        let Some(ts) = times.get(&tx.block_height) else {
            log::warn!("name op {} in missing block {}", tx.hash, tx.block_height);
            continue;
        };
        *sums.entry((IsoWeek::from_timestamp(*ts), op.kind)).or_default() += op.paid_fee;
        kinds.insert(op.kind);
    }
    let (Some(first), Some(last)) = (sums.keys().next().map(|k| k.0), sums.keys().next_back().map(|k| k.0)) else {
        return Ok(Vec::new());
    };
    let mut rows = Vec::new();
    for week in IsoWeek::range(first, last) {
        for kind in &kinds {
            rows.push(WeeklyFeeRow { week, kind: *kind, paid_fee: sums.get(&(week, *kind)).copied().unwrap_or(0) });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SplitRow {
    pub category: String,
    pub normal: u64,
    pub merged: u64,
    pub normal_pct: f64,
    pub merged_pct: f64,
}

impl SplitRow {
    fn new(category: &str, normal: u64, merged: u64) -> Self {
        let total = (normal + merged) as f64;
        let pct = |x: u64| if total > 0.0 { 100.0 * x as f64 / total } else { 0.0 };
        SplitRow { category: category.into(), normal, merged, normal_pct: pct(normal), merged_pct: pct(merged) }
    }

    pub fn total(&self) -> u64 {
        self.normal + self.merged
    }
}

/// Activity split by whether the containing block was merge-mined. Rows:
/// blocks, transactions, then one per name operation kind.
pub fn merge_mine_split(
    store: &Store,
    schedule: &FeeSchedule,
    cutoff_height: Option<u64>,
) -> Result<Vec<SplitRow>, ChainError> {
    let chain = ChainKind::Namecoin;
    let blocks = store.blocks(chain, cutoff_height)?;
    if blocks.is_empty() {
        return Err(ChainError::EmptyChain(chain));
    }
    let mut merged_at: HashMap<u64, bool> = HashMap::new();
    let mut counts = [[0u64; 2]; 5];
    for b in &blocks {
        let merged = b.is_auxpow == Some(true);
        if merged && b.height < schedule.merge_mining_start_height {
            return Err(ChainError::AuxPowBeforeActivation(b.height));
        }
        merged_at.insert(b.height, merged);
        counts[0][usize::from(merged)] += 1;
    }
    for tx in store.transactions(chain, cutoff_height)? {
        let merged = match merged_at.get(&tx.block_height) {
            Some(m) => *m,
            None => {
                log::warn!("transaction {} in missing block {}; counted as normally mined", tx.hash, tx.block_height);
                false
            }
        };
        let col = usize::from(merged);
        counts[1][col] += 1;
        if let Some(op) = classify_name_op(&tx)? {
            let row = match op.kind {
                NameOpKind::New => 2,
                NameOpKind::FirstUpdate => 3,
                NameOpKind::Update => 4,
            };
            counts[row][col] += 1;
        }
    }
    let names = ["blocks", "transactions", "name_new", "name_firstupdate", "name_update"];
    Ok(names.iter().zip(counts).map(|(n, [normal, merged])| SplitRow::new(n, normal, merged)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reregistration {
    pub name: String,
    pub height: u64,
    pub tx: Hash32,
    /// Heights of earlier name_firstupdate operations for the same name.
    pub prior_registration_heights: Vec<u64>,
    /// Last registration or renewal before this one.
    pub last_renewal_height: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReregistrationReport {
    pub day: NaiveDate,
    pub firstupdates_on_day: u64,
    /// Names whose previous registration had expired.
    pub reregistered: Vec<Reregistration>,
    /// Names registered again while the earlier registration was still live.
    pub anomalies: Vec<Reregistration>,
}

/// Examines every name_firstupdate on `day` (UTC). A name counts as
/// re-registered when it was registered before and its last registration or
/// renewal lies more than `expiry_window_blocks` below the new one.
/// name_new carries only a hash and does not take part.
pub fn detect_reregistrations(
    store: &Store,
    schedule: &FeeSchedule,
    day: NaiveDate,
    cutoff_height: Option<u64>,
) -> Result<ReregistrationReport, ChainError> {
    let chain = ChainKind::Namecoin;
    let blocks = store.blocks(chain, cutoff_height)?;
    if blocks.is_empty() {
        return Err(ChainError::EmptyChain(chain));
    }
    let times = block_times(&blocks);
    // Per name, (height, kind) in ledger order.
    let mut history: HashMap<String, Vec<(u64, NameOpKind)>> = HashMap::new();
    let mut report = ReregistrationReport { day, firstupdates_on_day: 0, reregistered: Vec::new(), anomalies: Vec::new() };

    for tx in store.transactions(chain, cutoff_height)? {
        let Some(op) = classify_name_op(&tx)? else { continue };
        let Some(name) = op.name.clone() else { continue };
        let events = history.entry(name.clone()).or_default();
        let on_day = times.get(&tx.block_height).is_some_and(|ts| utc_date(*ts) == day);
        if op.kind == NameOpKind::FirstUpdate && on_day {
            report.firstupdates_on_day += 1;
            let prior: Vec<u64> =
                events.iter().filter(|(_, k)| *k == NameOpKind::FirstUpdate).map(|(h, _)| *h).collect();
            if let (false, Some((last, _))) = (prior.is_empty(), events.last()) {
                let entry = Reregistration {
                    name,
                    height: tx.block_height,
                    tx: tx.hash,
                    prior_registration_heights: prior,
                    last_renewal_height: *last,
                };
                if last.saturating_add(schedule.expiry_window_blocks) < tx.block_height {
                    report.reregistered.push(entry);
                } else {
                    report.anomalies.push(entry);
                }
            }
        }
        events.push((tx.block_height, op.kind));
    }
    Ok(report)
}
