//! Embedded on-disk store for ingested ledgers.
//!
//! Layout (one redb file inside the store directory):
//! - `blocks`: (chain, height) -> block JSON
//! - `txs`: (chain, tx hash) -> transaction JSON
//! - `tx_pos`: (chain, height, index) -> tx hash, for ordered scans
//! - `months`: (chain, height) -> packed `yyyymm` of the block timestamp
//! - `meta`: (chain, key) -> u64, currently only the recorded cutoff height

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use redb::{Database, ReadableDatabase, ReadableTable, TableDefinition, WriteTransaction};

use crate::model::{Block, ChainKind, Transaction};
use crate::period::YearMonth;

const BLOCKS: TableDefinition<(u8, u64), &[u8]> = TableDefinition::new("blocks");
const TXS: TableDefinition<(u8, [u8; 32]), &[u8]> = TableDefinition::new("txs");
const TX_POS: TableDefinition<(u8, u64, u64), [u8; 32]> = TableDefinition::new("tx_pos");
const MONTHS: TableDefinition<(u8, u64), u32> = TableDefinition::new("months");
const META: TableDefinition<(u8, &str), u64> = TableDefinition::new("meta");

const CUTOFF_KEY: &str = "cutoff_height";
pub const DB_FILE: &str = "chainlens.redb";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("store backend: {0}")]
    Backend(#[from] redb::Error),
    #[error("corrupt record: {0}")]
    Corrupt(String),
}

macro_rules! backend_from {
    ($($t:ty),*) => {$(
        impl From<$t> for StoreError {
            fn from(e: $t) -> Self {
                StoreError::Backend(e.into())
            }
        }
    )*};
}
backend_from!(
    redb::DatabaseError,
    redb::TransactionError,
    redb::TableError,
    redb::StorageError,
    redb::CommitError
);

pub struct Store {
    db: Database,
    dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    /// An identical record was already present.
    Unchanged,
    /// A different record occupies the same key; carries a description.
    Conflict(String),
}

fn decode<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, StoreError> {
    serde_json::from_slice(bytes).map_err(|e| StoreError::Corrupt(e.to_string()))
}

fn encode<T: serde::Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("model types always serialize")
}

impl Store {
    /// Opens the store in `dir`, creating the directory and tables if needed.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(DB_FILE);
        let fresh = !path.exists();
        let db = Database::create(&path)?;
        if fresh {
            let txn = db.begin_write()?;
            txn.open_table(BLOCKS)?;
            txn.open_table(TXS)?;
            txn.open_table(TX_POS)?;
            txn.open_table(MONTHS)?;
            txn.open_table(META)?;
            txn.commit()?;
        }
        Ok(Store { db, dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn writer(&self) -> Result<StoreWriter, StoreError> {
        Ok(StoreWriter { txn: self.db.begin_write()?, dirty: false })
    }

    pub fn block(&self, chain: ChainKind, height: u64) -> Result<Option<Block>, StoreError> {
        let txn = self.db.begin_read()?;
        let t = txn.open_table(BLOCKS)?;
        let got = t.get((chain.code(), height))?;
        got.map(|v| decode(v.value())).transpose()
    }

    /// Blocks of `chain` in height order, up to and including `cutoff_height`.
    pub fn blocks(&self, chain: ChainKind, cutoff_height: Option<u64>) -> Result<Vec<Block>, StoreError> {
        let txn = self.db.begin_read()?;
        let t = txn.open_table(BLOCKS)?;
        let hi = cutoff_height.unwrap_or(u64::MAX);
        let mut out = Vec::new();
        for entry in t.range((chain.code(), 0)..=(chain.code(), hi))? {
            let (_, v) = entry?;
            out.push(decode(v.value())?);
        }
        Ok(out)
    }

    /// Transactions of `chain` ordered by (height, index), up to `cutoff_height`.
    pub fn transactions(
        &self,
        chain: ChainKind,
        cutoff_height: Option<u64>,
    ) -> Result<Vec<Transaction>, StoreError> {
        let txn = self.db.begin_read()?;
        let pos = txn.open_table(TX_POS)?;
        let txs = txn.open_table(TXS)?;
        let c = chain.code();
        let hi = cutoff_height.unwrap_or(u64::MAX);
        let mut out = Vec::new();
        for entry in pos.range((c, 0, 0)..=(c, hi, u64::MAX))? {
            let (_, hash) = entry?;
            let raw = txs
                .get((c, hash.value()))?
                .ok_or_else(|| StoreError::Corrupt(format!("dangling position for {}", hex::encode(hash.value()))))?;
            out.push(decode(raw.value())?);
        }
        Ok(out)
    }

    /// The height -> month index for `chain`.
    pub fn month_index(&self, chain: ChainKind) -> Result<BTreeMap<u64, YearMonth>, StoreError> {
        let txn = self.db.begin_read()?;
        let t = txn.open_table(MONTHS)?;
        let mut out = BTreeMap::new();
        for entry in t.range((chain.code(), 0)..=(chain.code(), u64::MAX))? {
            let (k, v) = entry?;
            out.insert(k.value().1, YearMonth::unpack(v.value()));
        }
        Ok(out)
    }

    pub fn max_height(&self, chain: ChainKind) -> Result<Option<u64>, StoreError> {
        let txn = self.db.begin_read()?;
        let t = txn.open_table(BLOCKS)?;
        let last = t.range((chain.code(), 0)..=(chain.code(), u64::MAX))?.next_back();
        Ok(match last {
            Some(entry) => Some(entry?.0.value().1),
            None => None,
        })
    }

    /// Cutoff height recorded at ingestion time, if any.
    pub fn recorded_cutoff(&self, chain: ChainKind) -> Result<Option<u64>, StoreError> {
        let txn = self.db.begin_read()?;
        let t = txn.open_table(META)?;
        let got = t.get((chain.code(), CUTOFF_KEY))?;
        Ok(got.map(|v| v.value()))
    }

    pub fn record_cutoff(&self, chain: ChainKind, height: u64) -> Result<(), StoreError> {
        if self.recorded_cutoff(chain)? == Some(height) {
            return Ok(());
        }
        let txn = self.db.begin_write()?;
        txn.open_table(META)?.insert((chain.code(), CUTOFF_KEY), height)?;
        txn.commit()?;
        Ok(())
    }

    /// Full logical contents, for comparing stores.
    pub fn dump(&self) -> Result<Vec<String>, StoreError> {
        let mut lines = Vec::new();
        for chain in ChainKind::ALL {
            for b in self.blocks(chain, None)? {
                lines.push(b.to_json().to_string());
            }
            for t in self.transactions(chain, None)? {
                lines.push(t.to_json().to_string());
            }
            for (h, m) in self.month_index(chain)? {
                lines.push(format!("month {chain} {h} {m}"));
            }
            if let Some(c) = self.recorded_cutoff(chain)? {
                lines.push(format!("cutoff {chain} {c}"));
            }
        }
        Ok(lines)
    }
}

/// A single write transaction. Dropping it without `commit` discards all writes.
pub struct StoreWriter {
    txn: WriteTransaction,
    dirty: bool,
}

impl StoreWriter {
    pub fn insert_block(&mut self, block: &Block) -> Result<InsertOutcome, StoreError> {
        let key = (block.chain.code(), block.height);
        let mut t = self.txn.open_table(BLOCKS)?;
        if let Some(existing) = t.get(key)? {
            let existing: Block = decode(existing.value())?;
            return Ok(if existing == *block {
                InsertOutcome::Unchanged
            } else {
                InsertOutcome::Conflict(format!(
                    "height {} already holds block {}",
                    block.height, existing.hash
                ))
            });
        }
        t.insert(key, encode(block).as_slice())?;
        drop(t);
        self.txn
            .open_table(MONTHS)?
            .insert(key, YearMonth::from_timestamp(block.timestamp).packed())?;
        self.dirty = true;
        Ok(InsertOutcome::Inserted)
    }

    pub fn insert_tx(&mut self, tx: &Transaction) -> Result<InsertOutcome, StoreError> {
        let c = tx.chain.code();
        let mut txs = self.txn.open_table(TXS)?;
        if let Some(existing) = txs.get((c, tx.hash.0))? {
            let existing: Transaction = decode(existing.value())?;
            return Ok(if existing == *tx {
                InsertOutcome::Unchanged
            } else {
                InsertOutcome::Conflict(format!("transaction {} already stored with different fields", tx.hash))
            });
        }
        let mut pos = self.txn.open_table(TX_POS)?;
        let pos_key = (c, tx.block_height, tx.index_in_block);
        if let Some(other) = pos.get(pos_key)? {
            return Ok(InsertOutcome::Conflict(format!(
                "position ({}, {}) already holds transaction 0x{}",
                tx.block_height,
                tx.index_in_block,
                hex::encode(other.value())
            )));
        }
        pos.insert(pos_key, tx.hash.0)?;
        txs.insert((c, tx.hash.0), encode(tx).as_slice())?;
        self.dirty = true;
        Ok(InsertOutcome::Inserted)
    }

    /// Commits if anything was written; otherwise aborts so the file is untouched.
    pub fn commit(self) -> Result<(), StoreError> {
        if self.dirty {
            self.txn.commit()?;
        } else {
            self.txn.abort()?;
        }
        Ok(())
    }

    pub fn abort(self) -> Result<(), StoreError> {
        self.txn.abort()?;
        Ok(())
    }
}
