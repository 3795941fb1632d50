use chainlens::chain::{
    detect_reregistrations, merge_mine_split, pos_pow_counts, weekly_fee_sums, FeeSchedule, Granularity,
};
use chainlens::report::{format_coins, join_usd, RateTable, Table};
use chainlens::ChainKind;

use super::{read_text, CmdResult, Ctx};
use crate::args::{self, NmcCmd, PpcCmd};
use crate::output::{to_json, Output};

pub fn nmc(ctx: &Ctx, cmd: &NmcCmd) -> CmdResult {
    let store = ctx.store()?;
    let cutoff = ctx.cutoff_height(&store, ChainKind::Namecoin)?;
    match cmd {
        NmcCmd::Fees { rates } => {
            let rows = weekly_fee_sums(&store, cutoff)?;
            let table = match rates {
                Some(path) => join_usd(&rows, &RateTable::parse(&read_text(path)?)?),
                None => {
                    let mut t = Table::new(["week", "kind", "paid_fee", "fee_coins"]);
                    for r in &rows {
                        t.push([r.week.to_string(), r.kind.to_string(), r.paid_fee.to_string(), format_coins(r.paid_fee)]);
                    }
                    t
                }
            };
            Ok(table.into())
        }
        NmcCmd::Mergemine => {
            let rows = merge_mine_split(&store, &FeeSchedule::default(), cutoff)?;
            let mut t = Table::new(["category", "normal", "merged", "normal_pct", "merged_pct"]);
            for r in &rows {
                t.push([
                    r.category.clone(),
                    r.normal.to_string(),
                    r.merged.to_string(),
                    format!("{:.2}", r.normal_pct),
                    format!("{:.2}", r.merged_pct),
                ]);
            }
            Ok(Output::with_json(t, to_json(&rows)?))
        }
        NmcCmd::Rereg { day, expiry_blocks } => {
            let schedule = FeeSchedule { expiry_window_blocks: *expiry_blocks, ..FeeSchedule::default() };
            let report = detect_reregistrations(&store, &schedule, *day, cutoff)?;
            log::info!("{} name_firstupdate operations on {day}", report.firstupdates_on_day);
            let mut t = Table::new(["status", "name", "height", "tx", "last_renewal_height", "prior_registration_heights"]);
            let tagged = report
                .reregistered
                .iter()
                .map(|r| ("reregistered", r))
                .chain(report.anomalies.iter().map(|r| ("anomaly", r)));
            for (status, r) in tagged {
                let prior: Vec<String> = r.prior_registration_heights.iter().map(u64::to_string).collect();
                t.push([
                    status.to_string(),
                    r.name.clone(),
                    r.height.to_string(),
                    r.tx.to_string(),
                    r.last_renewal_height.to_string(),
                    prior.join(";"),
                ]);
            }
            Ok(Output::with_json(t, to_json(&report)?))
        }
    }
}

pub fn ppc(ctx: &Ctx, cmd: &PpcCmd) -> CmdResult {
    let PpcCmd::PosPow { by } = cmd;
    let store = ctx.store()?;
    let cutoff = ctx.cutoff_height(&store, ChainKind::Peercoin)?;
    let granularity = match by {
        args::Granularity::Month => Granularity::Month,
        args::Granularity::Week => Granularity::Week,
    };
    let rows = pos_pow_counts(&store, granularity, cutoff)?;
    let mut t = Table::new(["period", "pos", "pow"]);
    for r in &rows {
        t.push([r.period.to_string(), r.pos.to_string(), r.pow.to_string()]);
    }
    Ok(t.into())
}
