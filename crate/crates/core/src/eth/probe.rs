//! Dictionary probing for unprotected self-destruct methods.
//!
//! Every selector is gas-estimated against each contract. A call estimated
//! below the base transaction cost can only be explained by a refund, and
//! the self-destruct refund is the usual one, so such selectors are invoked
//! to confirm termination.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use super::registry::{ContractRecord, FixtureRefund, SideRecord};
use super::selector::{Selector, SelectorDictionary};
use crate::primitives::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GasPolicy {
    pub base_call_gas: u64,
    pub suicide_refund: u64,
    /// Estimates strictly below this mark a selector as a candidate.
    pub vulnerability_threshold: u64,
}

impl Default for GasPolicy {
    fn default() -> Self {
        GasPolicy { base_call_gas: 21_000, suicide_refund: 24_000, vulnerability_threshold: 21_000 }
    }
}

impl GasPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if self.vulnerability_threshold > self.base_call_gas {
            return Err(format!(
                "vulnerability_threshold {} exceeds base_call_gas {}",
                self.vulnerability_threshold, self.base_call_gas
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecutorError {
    /// The call would revert or the selector is not handled.
    #[error("reverted: {0}")]
    Reverted(String),
    #[error("executor failure: {0}")]
    Failure(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub terminated: bool,
    pub refund_to: Option<Address>,
    pub gas_used: u64,
}

pub trait ContractExecutor: Sync {
    fn estimate_gas(&self, contract: &Address, selector: &Selector) -> Result<u64, ExecutorError>;
    fn invoke(&self, contract: &Address, selector: &Selector, caller: &Address) -> Result<Invocation, ExecutorError>;
    /// Whether calls for different contracts may run in parallel.
    fn concurrent(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RefundDestination {
    Caller,
    Creator,
    NullAddress,
    Other(Address),
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub contract: Address,
    /// Selector whose invocation terminated the contract.
    pub triggering_selector: Option<Selector>,
    /// Selectors estimated below threshold, in dictionary order, with their estimates.
    pub candidates: Vec<(Selector, u64)>,
    /// Estimate for the triggering selector, or the lowest candidate estimate.
    pub gas_estimate: u64,
    pub gas_used: Option<u64>,
    pub confirmed_terminated: bool,
    pub refund_destination: RefundDestination,
    /// Every dictionary entry looked vulnerable yet nothing terminated,
    /// typical of a catch-all default function.
    pub suspicious_default_function: bool,
    #[serde(with = "crate::model::u128_string")]
    pub balance: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeFailure {
    pub contract: Address,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ProbeBatch {
    pub results: Vec<ProbeResult>,
    pub failures: Vec<ProbeFailure>,
}

pub fn classify_refund(refund_to: Option<Address>, caller: &Address, creator: &Address) -> RefundDestination {
    match refund_to {
        None => RefundDestination::None,
        Some(a) if a == Address::ZERO => RefundDestination::NullAddress,
        Some(a) if a == *caller => RefundDestination::Caller,
        Some(a) if a == *creator => RefundDestination::Creator,
        Some(a) => RefundDestination::Other(a),
    }
}

fn probe_one<E: ContractExecutor + ?Sized>(
    contract: &ContractRecord,
    executor: &E,
    dictionary: &SelectorDictionary,
    policy: &GasPolicy,
    caller: &Address,
) -> Result<Option<ProbeResult>, ExecutorError> {
    let mut candidates = Vec::new();
    for entry in dictionary.entries() {
        match executor.estimate_gas(&contract.address, &entry.selector) {
            Ok(g) if g < policy.vulnerability_threshold => candidates.push((entry.selector, g)),
            Ok(_) | Err(ExecutorError::Reverted(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if candidates.is_empty() {
        return Ok(None);
    }

    let mut result = ProbeResult {
        contract: contract.address,
        triggering_selector: None,
        gas_estimate: candidates.iter().map(|c| c.1).min().unwrap_or_default(),
        candidates: candidates.clone(),
        gas_used: None,
        confirmed_terminated: false,
        refund_destination: RefundDestination::None,
        suspicious_default_function: false,
        balance: contract.balance,
    };
    for (selector, estimate) in &candidates {
        let inv = match executor.invoke(&contract.address, selector, caller) {
            Ok(inv) => inv,
            Err(ExecutorError::Reverted(_)) => continue,
            Err(e) => return Err(e),
        };
        if inv.terminated {
            result.triggering_selector = Some(*selector);
            result.gas_estimate = *estimate;
            result.gas_used = Some(inv.gas_used);
            result.confirmed_terminated = true;
            result.refund_destination = classify_refund(inv.refund_to, caller, &contract.creator);
            break;
        }
    }
    result.suspicious_default_function = !result.confirmed_terminated && candidates.len() == dictionary.len();
    Ok(Some(result))
}

/// Probes each contract independently. Contracts with no estimate below the
/// threshold produce no result; executor failures are collected per contract.
pub fn probe_suicidal<E: ContractExecutor + ?Sized>(
    contracts: &[ContractRecord],
    executor: &E,
    dictionary: &SelectorDictionary,
    policy: &GasPolicy,
    caller: &Address,
) -> ProbeBatch {
    let run = |c: &ContractRecord| (c.address, probe_one(c, executor, dictionary, policy, caller));
    let outcomes: Vec<_> = if executor.concurrent() {
        contracts.par_iter().map(run).collect()
    } else {
        contracts.iter().map(run).collect()
    };
    let mut batch = ProbeBatch::default();
    for (address, outcome) in outcomes {
        match outcome {
            Ok(Some(r)) => batch.results.push(r),
            Ok(None) => {}
            Err(e) => batch.failures.push(ProbeFailure { contract: address, error: e.to_string() }),
        }
    }
    batch
}

#[derive(Debug, Clone, Copy)]
struct FixtureEntry {
    estimate: u64,
    terminates: bool,
    refund_to: FixtureRefund,
}

/// Executor scripted by `gas_fixture` side records. Unlisted (contract,
/// selector) pairs revert; a terminated contract reverts every later call.
#[derive(Debug, Default)]
pub struct FixtureExecutor {
    entries: HashMap<(Address, Selector), FixtureEntry>,
    terminated: Mutex<HashSet<Address>>,
}

impl FixtureExecutor {
    pub fn from_records(records: &[SideRecord]) -> Self {
        let entries = records
            .iter()
            .filter_map(|r| match r {
                SideRecord::GasFixture { address, selector, estimate, terminates, refund_to } => Some((
                    (*address, *selector),
                    FixtureEntry { estimate: *estimate, terminates: *terminates, refund_to: *refund_to },
                )),
                _ => None,
            })
            .collect();
        FixtureExecutor { entries, terminated: Mutex::new(HashSet::new()) }
    }

    fn lookup(&self, contract: &Address, selector: &Selector) -> Result<FixtureEntry, ExecutorError> {
        if self.terminated.lock().expect("lock").contains(contract) {
            return Err(ExecutorError::Reverted(format!("{contract} no longer exists")));
        }
        self.entries
            .get(&(*contract, *selector))
            .copied()
            .ok_or_else(|| ExecutorError::Reverted(format!("{contract} has no handler for {selector}")))
    }
}

impl ContractExecutor for FixtureExecutor {
    fn estimate_gas(&self, contract: &Address, selector: &Selector) -> Result<u64, ExecutorError> {
        self.lookup(contract, selector).map(|e| e.estimate)
    }

    fn invoke(&self, contract: &Address, selector: &Selector, caller: &Address) -> Result<Invocation, ExecutorError> {
        let e = self.lookup(contract, selector)?;
        if e.terminates {
            self.terminated.lock().expect("lock").insert(*contract);
        }
        let refund_to = match (e.terminates, e.refund_to) {
            (false, _) | (true, FixtureRefund::None) => None,
            (true, FixtureRefund::Caller) => Some(*caller),
            (true, FixtureRefund::To(a)) => Some(a),
        };
        Ok(Invocation { terminated: e.terminates, refund_to, gas_used: e.estimate })
    }
}
