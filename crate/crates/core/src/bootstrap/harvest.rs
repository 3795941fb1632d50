use std::collections::{BTreeMap, BTreeSet};
use std::net::IpAddr;

use serde::Serialize;

use super::{BootstrapError, ResolveErrorKind, SeedSource};

pub trait Resolver {
    fn resolve_a(&mut self, name: &str) -> Result<Vec<IpAddr>, ResolveErrorKind>;
    /// `Ok(None)` when the address has no PTR record.
    fn resolve_ptr(&mut self, ip: IpAddr) -> Result<Option<String>, ResolveErrorKind>;
}

impl<R: Resolver + ?Sized> Resolver for &mut R {
    fn resolve_a(&mut self, name: &str) -> Result<Vec<IpAddr>, ResolveErrorKind> {
        (**self).resolve_a(name)
    }
    fn resolve_ptr(&mut self, ip: IpAddr) -> Result<Option<String>, ResolveErrorKind> {
        (**self).resolve_ptr(ip)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NameOutcome {
    Answer(Vec<IpAddr>),
    Error(ResolveErrorKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HarvestRound {
    pub round: usize,
    pub new_ips: usize,
    /// Distinct DNS-derived addresses seen so far.
    pub cumulative_unique: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedHarvest {
    pub rounds: Vec<HarvestRound>,
    pub per_name_results: BTreeMap<String, Vec<NameOutcome>>,
    /// DNS-derived addresses plus the hard-coded ones.
    pub all_ips: BTreeSet<IpAddr>,
}

impl SeedHarvest {
    pub fn cumulative_curve(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.cumulative_unique).collect()
    }

    /// Names that never produced an answer, with the last error seen.
    pub fn unresolved(&self) -> BTreeMap<&str, ResolveErrorKind> {
        self.per_name_results
            .iter()
            .filter_map(|(name, outcomes)| {
                let mut last = None;
                for o in outcomes {
                    match o {
                        NameOutcome::Answer(_) => return None,
                        NameOutcome::Error(e) => last = Some(*e),
                    }
                }
                last.map(|e| (name.as_str(), e))
            })
            .collect()
    }
}

/// Queries every DNS name once per round, accumulating the union of answers.
pub fn harvest_seeds<R: Resolver>(
    mut resolver: R,
    source: &SeedSource,
    rounds: usize,
) -> Result<SeedHarvest, BootstrapError> {
    if rounds == 0 {
        return Err(BootstrapError::ZeroRounds);
    }
    let mut seen = BTreeSet::new();
    let mut per_name: BTreeMap<String, Vec<NameOutcome>> =
        source.dns.iter().map(|n| (n.clone(), Vec::with_capacity(rounds))).collect();
    let mut history = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let before = seen.len();
        for name in &source.dns {
            let outcome = match resolver.resolve_a(name) {
                Ok(mut ips) => {
                    ips.sort();
                    ips.dedup();
                    seen.extend(ips.iter().copied());
                    NameOutcome::Answer(ips)
                }
                Err(kind) => {
                    log::debug!("{name}: {kind} in round {round}");
                    NameOutcome::Error(kind)
                }
            };
            per_name.get_mut(name).expect("initialised").push(outcome);
        }
        history.push(HarvestRound { round, new_ips: seen.len() - before, cumulative_unique: seen.len() });
    }
    let mut all_ips = seen;
    all_ips.extend(source.hardcoded.iter().copied());
    Ok(SeedHarvest { rounds: history, per_name_results: per_name, all_ips })
}

/// Reverse lookups for every address; lookup failures count as missing PTR.
pub fn harvest_ptr<R: Resolver>(
    mut resolver: R,
    ips: &BTreeSet<IpAddr>,
) -> BTreeMap<IpAddr, Option<String>> {
    ips.iter()
        .map(|ip| {
            let name = resolver.resolve_ptr(*ip).unwrap_or_else(|e| {
                log::debug!("PTR {ip}: {e}");
                None
            });
            (*ip, name)
        })
        .collect()
}
