//! Detection of file payloads embedded in transaction input data.

mod scan;
mod signatures;

pub use scan::{extract_payload, scan_corpus, scan_transactions, ScanReport, ScanRow, WriteFailure};
pub use signatures::{match_signatures, SignatureDb, SignatureEntry, DEFAULT_PREFIX_BYTES};

use crate::store::StoreError;

#[derive(Debug, thiserror::Error)]
pub enum PoisonError {
    #[error("invalid hex digit at position {0}")]
    InvalidHex(usize),
    #[error("odd number of hex digits")]
    OddLength,
    #[error("signature table line {line}: {reason}")]
    BadSignatureLine { line: u64, reason: String },
    #[error("signature table has no entries")]
    EmptyDb,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
}
