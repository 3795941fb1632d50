mod eth;
mod ledger;
mod names;
mod net;

use chainlens::query::apply_cutoff;
use chainlens::{ChainKind, Store};
use serde::Serialize;

use crate::args::{Cli, Command, Global};
use crate::output::{self, Output};
use crate::UsageError;

pub fn execute(cli: &Cli, argv: &[String]) -> anyhow::Result<()> {
    let ctx = Ctx { global: &cli.global };
    if ctx.global.stamp && ctx.global.out.is_none() {
        return Err(UsageError("--stamp requires --out".into()).into());
    }
    let result = match &cli.command {
        Command::Ingest { chain, input, strict } => ledger::ingest(&ctx, *chain, input, *strict)?,
        Command::Summarize { chain } => ledger::summarize(&ctx, *chain)?,
        Command::Report(cmd) => ledger::report(&ctx, cmd)?,
        Command::Eth(cmd) => eth::run(&ctx, cmd)?,
        Command::Nmc(cmd) => names::nmc(&ctx, cmd)?,
        Command::Ppc(cmd) => names::ppc(&ctx, cmd)?,
        Command::Poison(cmd) => ledger::poison(&ctx, cmd)?,
        Command::Crawl(args) => net::crawl(args)?,
        Command::Bootstrap(cmd) => net::bootstrap(cmd)?,
    };
    let bytes = result.render(ctx.global.format)?;
    output::write(&bytes, ctx.global.out.as_deref())?;
    if let (true, Some(out)) = (ctx.global.stamp, &ctx.global.out) {
        output::write_stamp(out, argv)?;
    }
    Ok(())
}

pub struct Ctx<'a> {
    pub global: &'a Global,
}

impl Ctx<'_> {
    pub fn store(&self) -> anyhow::Result<Store> {
        let dir = self.global.db.as_ref().ok_or_else(|| UsageError("--db is required".into()))?;
        Ok(Store::open(dir)?)
    }

    /// Height limit from `--cutoff`, else the one recorded at ingestion.
    pub fn cutoff_height(&self, store: &Store, chain: ChainKind) -> anyhow::Result<Option<u64>> {
        Ok(match self.global.cutoff {
            Some(ts) => Some(apply_cutoff(store, chain, ts)?),
            None => store.recorded_cutoff(chain)?,
        })
    }
}

/// Serde name of a unit-like enum value.
pub fn label<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

pub fn read_text(path: &std::path::Path) -> anyhow::Result<String> {
    use anyhow::Context;
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub type CmdResult = anyhow::Result<Output>;
