use std::collections::BTreeMap;
use std::time::Duration;

use chainlens::bootstrap::{
    classify_rdns, harvest_ptr, harvest_seeds, probe_ports, LiveProber, LiveResolver, ProbeOutcome, Prober,
    RdnsRules, Resolver, SeedSource, Selection, SimDnsParams, SimProber, SimResolver,
};
use chainlens::discovery::discv4::LiveTransport;
use chainlens::discovery::{self, build_sim_overlay, parse_enode, CrawlConfig, SimParams};
use chainlens::report::{join_country, GeoTable, Table};
use serde::Deserialize;
use serde_json::json;

use super::{label, read_text, CmdResult};
use crate::args::{BootstrapCmd, CrawlArgs, SourceArgs};
use crate::output::{to_json, Output};
use crate::UsageError;

pub fn crawl(args: &CrawlArgs) -> CmdResult {
    let timeout = Duration::from_millis(args.timeout_ms);
    let mut config = CrawlConfig {
        prefix_bits: args.prefix_bits,
        max_in_flight: args.max_inflight,
        ping_timeout: timeout,
        query_timeout: timeout,
        rng_seed: args.seed,
        ..CrawlConfig::default()
    };
    config.validate().map_err(|e| UsageError(e.to_string()))?;

    let report = if let Some(path) = &args.sim {
        let params: SimParams = serde_json::from_str(&read_text(path)?)
            .map_err(|e| anyhow::anyhow!("topology {}: {e}", path.display()))?;
        config.rng_seed = config.rng_seed.or(Some(params.rng_seed));
        let (overlay, truth) = build_sim_overlay(&params)?;
        let seeds: Vec<_> = truth.peers.iter().take(args.sim_seeds.max(1)).copied().collect();
        discovery::crawl(&overlay, &seeds, &config)?
    } else {
        let path = args.bootnodes.as_ref().ok_or_else(|| UsageError("--live needs --bootnodes".into()))?;
        let seeds = read_text(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| parse_enode(l).map_err(|e| anyhow::anyhow!("bootnode `{l}`: {e}")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let transport = LiveTransport::bind(args.bind, timeout, timeout)?;
        log::info!("crawling from {} as {}", transport.local_addr(), transport.node_id());
        discovery::crawl(&transport, &seeds, &config)?
    };

    let mut json = report.to_json();
    if let Some(geo_path) = &args.geo {
        let geo = GeoTable::parse(&read_text(geo_path)?)?;
        let ips: std::collections::BTreeSet<_> = report.known_peers.iter().map(|p| p.ip).collect();
        let countries = join_country(ips, &geo);
        let mut table = Table::new(["country", "count"]);
        for (c, n) in &countries {
            table.push([c.clone(), n.to_string()]);
        }
        json["countries"] = json!(countries);
        return Ok(Output::with_json(table, json));
    }
    let mut table = Table::new(["node_id", "ip", "port"]);
    for p in &report.known_peers {
        table.push([p.node_id.to_string(), p.ip.to_string(), p.port.to_string()]);
    }
    Ok(Output::with_json(table, json))
}

#[derive(Debug, Deserialize)]
#[serde(default)]
struct SimConfig {
    dns: SimDnsParams,
    prober: SimProber,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dns: SimDnsParams {
                pool_size: 64,
                per_query: 8,
                selection: Selection::Random,
                servfail_rate: 0.05,
                ptr_rate: 0.7,
                seed: 1,
            },
            prober: SimProber { open_rate: 0.36, closed_rate: 0.12, seed: 1 },
        }
    }
}

struct Network {
    source: SeedSource,
    resolver: Box<dyn Resolver>,
    prober: Box<dyn Prober>,
}

fn network(args: &SourceArgs) -> anyhow::Result<Network> {
    let source = SeedSource::from_path(&args.source)?;
    let timeout = Duration::from_millis(args.timeout_ms);
    if args.live {
        return Ok(Network {
            source,
            resolver: Box::new(LiveResolver::from_system(timeout)?),
            prober: Box::new(LiveProber { timeout }),
        });
    }
    let sim: SimConfig = match &args.sim {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .map_err(|e| anyhow::anyhow!("simulation parameters {}: {e}", path.display()))?,
        None => SimConfig::default(),
    };
    let resolver = SimResolver::new(&source.dns, sim.dns);
    Ok(Network { source, resolver: Box::new(resolver), prober: Box::new(sim.prober) })
}

pub fn bootstrap(cmd: &BootstrapCmd) -> CmdResult {
    match cmd {
        BootstrapCmd::Harvest { source, rdns_rules } => {
            let mut net = network(source)?;
            let harvest = harvest_seeds(net.resolver.as_mut(), &net.source, source.rounds)?;
            let mut table = Table::new(["round", "new_ips", "cumulative_unique"]);
            for r in &harvest.rounds {
                table.push([r.round, r.new_ips, r.cumulative_unique]);
            }
            let mut json = json!({ "harvest": to_json(&harvest)? });
            if let Some(path) = rdns_rules {
                let rules = RdnsRules::parse(&read_text(path)?)?;
                let names = harvest_ptr(net.resolver.as_mut(), &harvest.all_ips);
                let categories = classify_rdns(&names, &rules);
                let rdns: BTreeMap<String, serde_json::Value> = names
                    .iter()
                    .map(|(ip, name)| (ip.to_string(), json!({ "ptr": name, "category": categories[ip].to_string() })))
                    .collect();
                let mut counts: BTreeMap<String, u64> = BTreeMap::new();
                for c in categories.values() {
                    *counts.entry(c.to_string()).or_default() += 1;
                }
                json["rdns"] = json!(rdns);
                json["rdns_counts"] = json!(counts);
            }
            Ok(Output::with_json(table, json))
        }
        BootstrapCmd::Probe { source, concurrency } => {
            if *concurrency == 0 {
                return Err(UsageError("--concurrency must be at least 1".into()).into());
            }
            let mut net = network(source)?;
            let harvest = harvest_seeds(net.resolver.as_mut(), &net.source, source.rounds)?;
            let report = probe_ports(net.prober.as_ref(), &harvest.all_ips, net.source.port, *concurrency);
            let unresolved: BTreeMap<&str, ProbeOutcome> = harvest
                .unresolved()
                .into_iter()
                .map(|(name, kind)| (name, ProbeOutcome::ResolveError(kind)))
                .collect();
            let mut table = Table::new(["target", "outcome"]);
            for (ip, outcome) in &report.outcomes {
                table.push([ip.to_string(), outcome_label(outcome)]);
            }
            for (name, outcome) in &unresolved {
                table.push([name.to_string(), outcome_label(outcome)]);
            }
            let json = json!({
                "port": net.source.port,
                "cumulative_unique": harvest.cumulative_curve(),
                "outcomes": to_json(&report.outcomes)?,
                "summary": to_json(&report.summary)?,
                "unresolved": to_json(&unresolved)?,
            });
            Ok(Output::with_json(table, json))
        }
    }
}

fn outcome_label(outcome: &ProbeOutcome) -> String {
    match outcome {
        ProbeOutcome::ResolveError(kind) => format!("ResolveError:{kind}"),
        other => label(other),
    }
}
