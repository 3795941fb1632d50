use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::signatures::{matching_entries, SignatureDb};
use super::PoisonError;
use crate::model::{ChainKind, Transaction};
use crate::primitives::{decode_hex, Hash32, ParseHexError};
use crate::store::Store;

/// Decodes transaction input hex (optional `0x` prefix) into raw bytes.
pub fn extract_payload(input_hex: &str) -> Result<Vec<u8>, PoisonError> {
    decode_hex(input_hex).map_err(|e| match e {
        ParseHexError::InvalidDigit(pos) => PoisonError::InvalidHex(pos),
        _ => PoisonError::OddLength,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub format_name: String,
    pub tx_hash: Hash32,
    pub payload_size: usize,
    /// Whether the complete magic matched, not only the compared prefix.
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extracted_to: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WriteFailure {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub scanned: usize,
    pub rows: Vec<ScanRow>,
    pub counts: BTreeMap<String, u64>,
    pub write_failures: Vec<WriteFailure>,
}

impl ScanReport {
    pub fn verified_counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        for row in self.rows.iter().filter(|r| r.verified) {
            *counts.entry(row.format_name.clone()).or_default() += 1;
        }
        counts
    }
}

/// Scans transaction inputs in order. One row per (transaction, matching
/// format). With `out_dir`, each candidate payload is written to
/// `<tx_hash>.<extension>`; failed writes are recorded and scanning goes on.
pub fn scan_transactions(txs: &[Transaction], db: &SignatureDb, out_dir: Option<&Path>) -> ScanReport {
    let per_tx: Vec<Vec<(ScanRow, &str, Vec<u8>)>> = txs
        .par_iter()
        .map(|tx| {
            let payload = match extract_payload(&tx.input_data) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("transaction {}: undecodable input: {e}", tx.hash);
                    return Vec::new();
                }
            };
            matching_entries(&payload, db)
                .map(|entry| {
                    let row = ScanRow {
                        format_name: entry.format_name.clone(),
                        tx_hash: tx.hash,
                        payload_size: payload.len(),
                        verified: entry.matches_full(&payload),
                        extracted_to: None,
                    };
                    (row, entry.extension.as_str(), payload.clone())
                })
                .collect()
        })
        .collect();

    let mut report = ScanReport { scanned: txs.len(), ..Default::default() };
    for (mut row, ext, payload) in per_tx.into_iter().flatten() {
        if let Some(dir) = out_dir {
            let path = dir.join(format!("{}.{}", row.tx_hash, ext));
            match std::fs::write(&path, &payload) {
                Ok(()) => row.extracted_to = Some(path),
                Err(e) => {
                    log::warn!("cannot write {}: {e}", path.display());
                    report.write_failures.push(WriteFailure { path, message: e.to_string() });
                }
            }
        }
        *report.counts.entry(row.format_name.clone()).or_default() += 1;
        report.rows.push(row);
    }
    report
}

pub fn scan_corpus(
    store: &Store,
    chain: ChainKind,
    db: &SignatureDb,
    out_dir: Option<&Path>,
    cutoff_height: Option<u64>,
) -> Result<ScanReport, PoisonError> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let txs = store.transactions(chain, cutoff_height)?;
    Ok(scan_transactions(&txs, db, out_dir))
}
