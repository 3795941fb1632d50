use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;

use rayon::prelude::*;
use serde::Serialize;

use super::ResolveErrorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConnectResult {
    Accepted,
    Refused,
    TimedOut,
}

pub trait Prober: Sync {
    fn connect(&self, ip: IpAddr, port: u16) -> ConnectResult;
}

impl<P: Prober + ?Sized> Prober for &P {
    fn connect(&self, ip: IpAddr, port: u16) -> ConnectResult {
        (**self).connect(ip, port)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProbeOutcome {
    Open,
    Filtered,
    Closed,
    ResolveError(ResolveErrorKind),
}

impl From<ConnectResult> for ProbeOutcome {
    fn from(r: ConnectResult) -> Self {
        match r {
            ConnectResult::Accepted => ProbeOutcome::Open,
            ConnectResult::Refused => ProbeOutcome::Closed,
            ConnectResult::TimedOut => ProbeOutcome::Filtered,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub total: usize,
    pub open: usize,
    pub filtered: usize,
    pub closed: usize,
    pub open_pct: f64,
    pub filtered_pct: f64,
    pub closed_pct: f64,
}

impl ProbeSummary {
    fn from_outcomes<'a>(outcomes: impl Iterator<Item = &'a ProbeOutcome>) -> Self {
        let mut s = ProbeSummary::default();
        for o in outcomes {
            s.total += 1;
            match o {
                ProbeOutcome::Open => s.open += 1,
                ProbeOutcome::Filtered => s.filtered += 1,
                ProbeOutcome::Closed => s.closed += 1,
                ProbeOutcome::ResolveError(_) => {}
            }
        }
        if s.total > 0 {
            let pct = |n: usize| 100.0 * n as f64 / s.total as f64;
            s.open_pct = pct(s.open);
            s.filtered_pct = pct(s.filtered);
            s.closed_pct = pct(s.closed);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub port: u16,
    pub outcomes: BTreeMap<IpAddr, ProbeOutcome>,
    pub summary: ProbeSummary,
}

/// TCP-connects to every address with at most `max_concurrent` probes in
/// flight.
pub fn probe_ports<P: Prober>(prober: P, ips: &BTreeSet<IpAddr>, port: u16, max_concurrent: usize) -> ProbeReport {
    let targets: Vec<IpAddr> = ips.iter().copied().collect();
    let run = || -> Vec<ProbeOutcome> { targets.par_iter().map(|ip| prober.connect(*ip, port).into()).collect() };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(max_concurrent.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("cannot build probe pool ({e}); probing sequentially");
            targets.iter().map(|ip| prober.connect(*ip, port).into()).collect()
        }
    };
    let outcomes: BTreeMap<IpAddr, ProbeOutcome> = targets.into_iter().zip(results).collect();
    let summary = ProbeSummary::from_outcomes(outcomes.values());
    ProbeReport { port, outcomes, summary }
}
