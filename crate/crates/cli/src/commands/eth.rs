use std::io::BufReader;

use chainlens::eth::{
    bucket_similarity, build_registry_from_store, classify_transaction, find_precreation_funding,
    lifetime_histogram, monthly_class_counts, parse_references, parse_side_records, probe_suicidal,
    zombie_report, ContractExecutor, ContractRegistry, FixtureExecutor, GasPolicy, RefundDestination,
    SelectorDictionary, SideRecord, SimilarityBuckets,
};
use chainlens::eth::rpc::RpcExecutor;
use chainlens::report::Table;
use chainlens::{Address, ChainKind, Store};

use super::{label, read_text, CmdResult, Ctx};
use crate::args::{EthCmd, SideArgs};
use crate::output::{to_json, Output};
use crate::UsageError;

fn side_records(args: &SideArgs) -> anyhow::Result<Vec<SideRecord>> {
    let Some(path) = &args.side else { return Ok(Vec::new()) };
    let file = std::fs::File::open(path).map_err(|e| anyhow::anyhow!("opening {}: {e}", path.display()))?;
    Ok(parse_side_records(BufReader::new(file))?)
}

struct EthData {
    store: Store,
    cutoff: Option<u64>,
    side: Vec<SideRecord>,
    registry: ContractRegistry,
}

fn load(ctx: &Ctx, side: &SideArgs) -> anyhow::Result<EthData> {
    let store = ctx.store()?;
    let cutoff = ctx.cutoff_height(&store, ChainKind::Ethereum)?;
    let side = side_records(side)?;
    let registry = build_registry_from_store(&store, cutoff, &side)?;
    Ok(EthData { store, cutoff, side, registry })
}

pub fn run(ctx: &Ctx, cmd: &EthCmd) -> CmdResult {
    match cmd {
        EthCmd::Zombies { side, top } => {
            let data = load(ctx, side)?;
            let txs = data.store.transactions(ChainKind::Ethereum, data.cutoff)?;
            let report = zombie_report(&txs, *top);
            let mut table = Table::new(["address", "creator", "height", "tx", "balance"]);
            for z in &report.top {
                table.push([
                    z.address.to_string(),
                    z.creator.to_string(),
                    z.height.to_string(),
                    z.tx.to_string(),
                    z.balance.to_string(),
                ]);
            }
            Ok(Output::with_json(table, to_json(&report)?))
        }
        EthCmd::Lifetimes { side, edges } => {
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(UsageError("--edges must be strictly increasing".into()).into());
            }
            let data = load(ctx, side)?;
            let buckets = lifetime_histogram(&data.registry, edges);
            let mut table = Table::new(["lower", "upper", "count"]);
            let mut lower = 0u64;
            for b in &buckets {
                table.push([lower.to_string(), b.upper.map(|u| u.to_string()).unwrap_or_default(), b.count.to_string()]);
                lower = b.upper.map_or(lower, |u| u + 1);
            }
            Ok(Output::with_json(table, to_json(&buckets)?))
        }
        EthCmd::Precreation { side } => {
            let data = load(ctx, side)?;
            let txs = data.store.transactions(ChainKind::Ethereum, data.cutoff)?;
            let rows = find_precreation_funding(&txs, &data.registry);
            let mut table = Table::new(["contract", "funding_tx", "funding_height", "creation_height", "value"]);
            for r in &rows {
                table.push([
                    r.contract.to_string(),
                    r.funding_tx.to_string(),
                    r.funding_height.to_string(),
                    r.creation_height.to_string(),
                    r.value.to_string(),
                ]);
            }
            Ok(Output::with_json(table, to_json(&rows)?))
        }
        EthCmd::Probe { side, rpc, caller, dictionary } => {
            let caller: Address = caller.parse().map_err(|e| UsageError(format!("--caller: {e}")))?;
            let dict = match dictionary {
                Some(path) => SelectorDictionary::parse(&read_text(path)?)?,
                None => SelectorDictionary::default(),
            };
            let data = load(ctx, side)?;
            let executor: Box<dyn ContractExecutor> = match rpc {
                Some(url) => Box::new(RpcExecutor::new(url.clone(), caller)),
                None if side.side.is_some() => Box::new(FixtureExecutor::from_records(&data.side)),
                None => return Err(UsageError("either --rpc or a --side file with gas fixtures is required".into()).into()),
            };
            let contracts: Vec<_> = data.registry.iter().filter(|c| c.is_active()).cloned().collect();
            let batch = probe_suicidal(&contracts, executor.as_ref(), &dict, &GasPolicy::default(), &caller);
            for f in &batch.failures {
                log::warn!("probe of {} failed: {}", f.contract, f.error);
            }
            let mut table = Table::new([
                "contract",
                "triggering_selector",
                "signature",
                "gas_estimate",
                "gas_used",
                "confirmed_terminated",
                "refund_destination",
                "suspicious_default_function",
                "balance",
            ]);
            for r in &batch.results {
                let refund = match r.refund_destination {
                    RefundDestination::Other(a) => a.to_string(),
                    other => label(&other),
                };
                table.push([
                    r.contract.to_string(),
                    r.triggering_selector.map(|s| s.to_string()).unwrap_or_default(),
                    r.triggering_selector.and_then(|s| dict.name_of(&s)).unwrap_or_default().to_string(),
                    r.gas_estimate.to_string(),
                    r.gas_used.map(|g| g.to_string()).unwrap_or_default(),
                    r.confirmed_terminated.to_string(),
                    refund,
                    r.suspicious_default_function.to_string(),
                    r.balance.to_string(),
                ]);
            }
            Ok(Output::with_json(table, to_json(&batch)?))
        }
        EthCmd::Similarity { side, references, minor_max, heavy_max } => {
            let buckets = SimilarityBuckets { minor_max: *minor_max, heavy_max: *heavy_max };
            buckets.validate().map_err(UsageError)?;
            let refs = parse_references(&read_text(references)?)?;
            let data = load(ctx, side)?;
            let corpus: Vec<_> = data.registry.iter().filter(|c| !c.code.is_empty()).cloned().collect();
            let rows = bucket_similarity(&corpus, &refs, &buckets);
            let mut table = Table::new(["reference", "optimized", "size", "exact", "minor", "heavy"]);
            for r in &rows {
                table.push([
                    r.reference.clone(),
                    r.optimized.to_string(),
                    r.size.to_string(),
                    r.exact.to_string(),
                    r.minor.to_string(),
                    r.heavy.to_string(),
                ]);
            }
            Ok(Output::with_json(table, to_json(&rows)?))
        }
        EthCmd::Classify { side, per_tx } => {
            let data = load(ctx, side)?;
            let txs = data.store.transactions(ChainKind::Ethereum, data.cutoff)?;
            if *per_tx {
                let mut table = Table::new(["tx_hash", "height", "index", "class"]);
                for tx in &txs {
                    table.push([
                        tx.hash.to_string(),
                        tx.block_height.to_string(),
                        tx.index_in_block.to_string(),
                        label(&classify_transaction(tx, &data.registry)),
                    ]);
                }
                return Ok(table.into());
            }
            let months = data.store.month_index(ChainKind::Ethereum)?;
            let rows = monthly_class_counts(&txs, &data.registry, &months);
            let mut table =
                Table::new(["month", "to_account", "to_contract", "create_contract", "zombie_create", "total"]);
            for (month, c) in &rows {
                table.push([
                    month.to_string(),
                    c.to_account.to_string(),
                    c.to_contract.to_string(),
                    c.create_contract.to_string(),
                    c.zombie_create.to_string(),
                    c.total().to_string(),
                ]);
            }
            Ok(table.into())
        }
    }
}
