use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use chainlens::ingest::{ingest_blocks, IngestOptions};
use chainlens::poison::{scan_corpus, SignatureDb};
use chainlens::query::{apply_cutoff, monthly_tx_counts, summarize_chain, QueryError};
use chainlens::report::Table;
use chainlens::ChainKind;
use chrono::DateTime;

use super::{read_text, CmdResult, Ctx};
use crate::args::{PoisonCmd, ReportCmd};
use crate::output::{to_json, Output};

fn utc(ts: u64) -> String {
    DateTime::from_timestamp(ts as i64, 0).map(|t| t.to_rfc3339()).unwrap_or_default()
}

pub fn ingest(ctx: &Ctx, chain: ChainKind, input: &Path, strict: bool) -> CmdResult {
    let store = ctx.store()?;
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let summary = ingest_blocks(BufReader::new(file), chain, &store, IngestOptions { strict })?;
    for rejection in &summary.rejected {
        log::warn!("rejected: {rejection}");
    }
    if let Some(ts) = ctx.global.cutoff {
        let height = apply_cutoff(&store, chain, ts)?;
        store.record_cutoff(chain, height)?;
        log::info!("cut-off for {chain} recorded at height {height}");
    }
    let mut table = Table::new(["chain", "blocks_loaded", "txs_loaded", "rejected_lines"]);
    table.push([
        chain.to_string(),
        summary.blocks_loaded.to_string(),
        summary.txs_loaded.to_string(),
        summary.rejected_lines().to_string(),
    ]);
    Ok(table.into())
}

pub fn summarize(ctx: &Ctx, chain: Option<ChainKind>) -> CmdResult {
    let store = ctx.store()?;
    let chains: Vec<ChainKind> = match chain {
        Some(c) => vec![c],
        None => {
            let present: Vec<ChainKind> = ChainKind::ALL
                .into_iter()
                .filter(|c| matches!(store.max_height(*c), Ok(Some(_))))
                .collect();
            if present.is_empty() {
                return Err(QueryError::EmptyChain(ChainKind::Ethereum).into());
            }
            present
        }
    };
    let mut table = Table::new([
        "chain",
        "first_block_time",
        "first_block_utc",
        "cutoff_time",
        "cutoff_utc",
        "cutoff_height",
        "block_count",
        "tx_count",
        "tx_volume",
    ]);
    let mut summaries = Vec::new();
    for chain in chains {
        let s = summarize_chain(&store, chain, ctx.cutoff_height(&store, chain)?)?;
        table.push([
            s.chain.to_string(),
            s.first_block_time.to_string(),
            utc(s.first_block_time),
            s.cutoff_time.to_string(),
            utc(s.cutoff_time),
            s.cutoff_height.to_string(),
            s.block_count.to_string(),
            s.tx_count.to_string(),
            s.tx_volume.to_string(),
        ]);
        summaries.push(s);
    }
    Ok(Output::with_json(table, to_json(&summaries)?))
}

pub fn report(ctx: &Ctx, cmd: &ReportCmd) -> CmdResult {
    match cmd {
        ReportCmd::TxMonthly { chain } => {
            let store = ctx.store()?;
            let rows = monthly_tx_counts(&store, *chain, ctx.cutoff_height(&store, *chain)?)?;
            let mut table = Table::new(["month", "tx_count"]);
            for (month, n) in rows {
                table.push([month.to_string(), n.to_string()]);
            }
            Ok(table.into())
        }
    }
}

pub fn poison(ctx: &Ctx, cmd: &PoisonCmd) -> CmdResult {
    let PoisonCmd::Scan { chain, signatures, extract, prefix_bytes, verified_only } = cmd;
    if *prefix_bytes == 0 {
        return Err(crate::UsageError("--prefix-bytes must be at least 1".into()).into());
    }
    let db = match signatures {
        Some(path) => SignatureDb::parse(&read_text(path)?)?,
        None => SignatureDb::default(),
    }
    .with_prefix_bytes(*prefix_bytes);
    let store = ctx.store()?;
    let cutoff = ctx.cutoff_height(&store, *chain)?;
    let mut report = scan_corpus(&store, *chain, &db, extract.as_deref(), cutoff)?;
    for failure in &report.write_failures {
        log::warn!("could not extract to {}: {}", failure.path.display(), failure.message);
    }
    if *verified_only {
        report.rows.retain(|r| r.verified);
        report.counts = report.verified_counts();
    }
    let mut table = Table::new(["format", "tx_hash", "payload_size", "verified"]);
    for row in &report.rows {
        table.push([
            row.format_name.clone(),
            row.tx_hash.to_string(),
            row.payload_size.to_string(),
            row.verified.to_string(),
        ]);
    }
    Ok(Output::with_json(table, to_json(&report)?))
}
