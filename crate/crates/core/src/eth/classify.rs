use std::collections::BTreeMap;

use serde::Serialize;

use super::registry::ContractRegistry;
use crate::model::Transaction;
use crate::period::YearMonth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TxClass {
    ToAccount,
    ToContract,
    CreateContract,
    /// Creation with no code: the endowment can never be moved again.
    ZombieCreate,
}

impl TxClass {
    pub const ALL: [TxClass; 4] = [TxClass::ToAccount, TxClass::ToContract, TxClass::CreateContract, TxClass::ZombieCreate];
}

pub fn classify_transaction(tx: &Transaction, registry: &ContractRegistry) -> TxClass {
    match &tx.recipient {
        None if tx.input_is_empty() => TxClass::ZombieCreate,
        None => TxClass::CreateContract,
        Some(_) => {
            let is_contract = tx
                .recipient_address()
                .and_then(|a| registry.get(&a))
                .is_some_and(|c| c.exists_before(tx.block_height, tx.index_in_block));
            if is_contract {
                TxClass::ToContract
            } else {
                TxClass::ToAccount
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub to_account: u64,
    pub to_contract: u64,
    pub create_contract: u64,
    pub zombie_create: u64,
}

impl ClassCounts {
    pub fn add(&mut self, c: TxClass) {
        match c {
            TxClass::ToAccount => self.to_account += 1,
            TxClass::ToContract => self.to_contract += 1,
            TxClass::CreateContract => self.create_contract += 1,
            TxClass::ZombieCreate => self.zombie_create += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.to_account + self.to_contract + self.create_contract + self.zombie_create
    }
}

/// Per-month class counts, gap-filled between the first and last active month.
/// Transactions whose block is missing from `months` are skipped.
pub fn monthly_class_counts(
    txs: &[Transaction],
    registry: &ContractRegistry,
    months: &BTreeMap<u64, YearMonth>,
) -> Vec<(YearMonth, ClassCounts)> {
    let mut by_month: BTreeMap<YearMonth, ClassCounts> = BTreeMap::new();
    for tx in txs {
        if let Some(m) = months.get(&tx.block_height) {
            by_month.entry(*m).or_default().add(classify_transaction(tx, registry));
        }
    }
    let (Some(first), Some(last)) = (by_month.keys().next().copied(), by_month.keys().next_back().copied()) else {
        return Vec::new();
    };
    YearMonth::range(first, last)
        .map(|m| (m, by_month.get(&m).cloned().unwrap_or_default()))
        .collect()
}
