//! Streaming NDJSON ingestion into a [`Store`].

use std::io::BufRead;

use crate::model::{ChainKind, Record};
use crate::store::{InsertOutcome, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: malformed JSON: {message}")]
    MalformedJson { line: usize, message: String },
    #[error("line {line}: schema violation in `{field}`: {reason}")]
    SchemaViolation { line: usize, field: String, reason: String },
    #[error("line {line}: conflicting block at height {height}: {detail}")]
    ConflictingBlock { line: usize, height: u64, detail: String },
    #[error("line {line}: conflicting transaction: {detail}")]
    ConflictingTransaction { line: usize, detail: String },
    #[error("reading input: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl IngestError {
    /// Line number for per-line rejections.
    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::MalformedJson { line, .. }
            | IngestError::SchemaViolation { line, .. }
            | IngestError::ConflictingBlock { line, .. }
            | IngestError::ConflictingTransaction { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Turn the first rejected line into a fatal error; nothing is persisted.
    pub strict: bool,
}

#[derive(Debug, Default)]
pub struct IngestSummary {
    pub blocks_loaded: u64,
    pub txs_loaded: u64,
    pub rejected: Vec<IngestError>,
}

impl IngestSummary {
    pub fn rejected_lines(&self) -> usize {
        self.rejected.len()
    }
}

/// Reads one record per line and persists everything valid in a single
/// write transaction. Records already present are skipped, so re-ingesting a
/// file is a no-op.
pub fn ingest_blocks<R: BufRead>(
    source: R,
    chain: ChainKind,
    store: &Store,
    opts: IngestOptions,
) -> Result<IngestSummary, IngestError> {
    let mut writer = store.writer()?;
    let mut summary = IngestSummary::default();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match ingest_line(&mut writer, &line, line_no, chain) {
            Ok(Some(Loaded::Block)) => summary.blocks_loaded += 1,
            Ok(Some(Loaded::Tx)) => summary.txs_loaded += 1,
            Ok(None) => {}
            Err(e @ (IngestError::Io(_) | IngestError::Store(_))) => return Err(e),
            Err(e) => {
                if opts.strict {
                    writer.abort()?;
                    return Err(e);
                }
                log::warn!("rejected {e}");
                summary.rejected.push(e);
            }
        }
    }
    writer.commit()?;
    Ok(summary)
}

enum Loaded {
    Block,
    Tx,
}

fn ingest_line(
    writer: &mut crate::store::StoreWriter,
    line: &str,
    line_no: usize,
    chain: ChainKind,
) -> Result<Option<Loaded>, IngestError> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| IngestError::MalformedJson { line: line_no, message: e.to_string() })?;
    let record = Record::from_json(&value).map_err(|e| IngestError::SchemaViolation {
        line: line_no,
        field: e.field,
        reason: e.reason,
    })?;
    if record.chain() != chain {
        return Err(IngestError::SchemaViolation {
            line: line_no,
            field: "chain".into(),
            reason: format!("record is {} but ingesting {chain}", record.chain()),
        });
    }
    match record {
        Record::Block(b) => match writer.insert_block(&b)? {
            InsertOutcome::Inserted => Ok(Some(Loaded::Block)),
            InsertOutcome::Unchanged => Ok(None),
            InsertOutcome::Conflict(detail) => Err(IngestError::ConflictingBlock {
                line: line_no,
                height: b.height,
                detail,
            }),
        },
        Record::Tx(t) => match writer.insert_tx(&t)? {
            InsertOutcome::Inserted => Ok(Some(Loaded::Tx)),
            InsertOutcome::Unchanged => Ok(None),
            InsertOutcome::Conflict(detail) => {
                Err(IngestError::ConflictingTransaction { line: line_no, detail })
            }
        },
    }
}
