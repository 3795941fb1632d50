//! Contract lifecycle registry built from the ledger plus execution side-files.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use serde::Serialize;
use serde_json::Value;

use super::address::derive_contract_address;
use super::selector::Selector;
use crate::model::{ChainKind, Transaction};
use crate::primitives::{strip_0x, Address, Hash32};
use crate::store::{Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CreatorKind {
    ByTransaction,
    ByContract,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractRecord {
    pub address: Address,
    pub creation_height: u64,
    /// Position within the creation block; only known for transaction-created contracts.
    pub creation_index: Option<u64>,
    pub creation_tx: Option<Hash32>,
    pub creator: Address,
    pub creator_kind: CreatorKind,
    pub termination_height: Option<u64>,
    /// Endowment plus ledger-visible inflows; zero once terminated.
    #[serde(with = "crate::model::u128_string")]
    pub balance: u128,
    /// Creation bytecode as lowercase hex without prefix; empty for zombies
    /// and for contract-created contracts.
    pub code: String,
}

impl ContractRecord {
    pub fn is_zombie(&self) -> bool {
        self.creator_kind == CreatorKind::ByTransaction && self.code.is_empty()
    }

    pub fn is_active(&self) -> bool {
        self.termination_height.is_none()
    }

    pub fn lifetime(&self) -> Option<u64> {
        self.termination_height.map(|t| t - self.creation_height)
    }

    /// Whether the contract exists for a transaction at (`height`, `index`).
    /// Contract-created contracts only count from the block after creation,
    /// since their position inside the creating block is unknown.
    pub fn exists_before(&self, height: u64, index: u64) -> bool {
        match self.creation_index {
            Some(ci) => (self.creation_height, ci) < (height, index),
            None => self.creation_height < height,
        }
    }
}

/// How a `gas_fixture` record says the refund is routed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureRefund {
    None,
    Caller,
    To(Address),
}

/// One record from an execution side-file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideRecord {
    InternalCreate { parent: Address, address: Address, height: u64 },
    Terminate { address: Address, height: u64, refund_to: Option<Address> },
    GasFixture { address: Address, selector: Selector, estimate: u64, terminates: bool, refund_to: FixtureRefund },
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("side-file line {line}: {reason}")]
    SideFile { line: usize, reason: String },
    #[error("contract address mismatch for creation transaction {tx}: derived {derived}, supplied {supplied}")]
    AddressMismatch { tx: Hash32, derived: Address, supplied: Address },
    #[error("reading side-file: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn field<'a>(o: &'a serde_json::Map<String, Value>, k: &str) -> Result<&'a Value, String> {
    o.get(k).ok_or_else(|| format!("missing `{k}`"))
}

fn addr(v: &Value, k: &str) -> Result<Address, String> {
    v.as_str()
        .ok_or_else(|| format!("`{k}` must be a string"))?
        .parse()
        .map_err(|e| format!("`{k}`: {e}"))
}

fn opt_addr(v: Option<&Value>, k: &str) -> Result<Option<Address>, String> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(v) => addr(v, k).map(Some),
    }
}

fn num(v: &Value, k: &str) -> Result<u64, String> {
    match v {
        Value::Number(n) => n.as_u64().ok_or_else(|| format!("`{k}` must be a non-negative integer")),
        Value::String(s) => s.parse().map_err(|_| format!("`{k}` must be an integer")),
        _ => Err(format!("`{k}` must be an integer")),
    }
}

impl SideRecord {
    pub fn from_json(v: &Value) -> Result<SideRecord, String> {
        let o = v.as_object().ok_or("not a JSON object")?;
        let ty = field(o, "type")?.as_str().ok_or("`type` must be a string")?;
        match ty {
            "internal_create" => Ok(SideRecord::InternalCreate {
                parent: addr(field(o, "parent")?, "parent")?,
                address: addr(field(o, "address")?, "address")?,
                height: num(field(o, "height")?, "height")?,
            }),
            "terminate" => Ok(SideRecord::Terminate {
                address: addr(field(o, "address")?, "address")?,
                height: num(field(o, "height")?, "height")?,
                refund_to: opt_addr(o.get("refund_to"), "refund_to")?,
            }),
            "gas_fixture" => {
                let selector = field(o, "selector")?
                    .as_str()
                    .ok_or("`selector` must be a string")?
                    .parse()
                    .map_err(|e| format!("`selector`: {e}"))?;
                let refund_to = match o.get("refund_to") {
                    None | Some(Value::Null) => FixtureRefund::None,
                    Some(Value::String(s)) if s == "caller" => FixtureRefund::Caller,
                    Some(v) => FixtureRefund::To(addr(v, "refund_to")?),
                };
                Ok(SideRecord::GasFixture {
                    address: addr(field(o, "address")?, "address")?,
                    selector,
                    estimate: num(field(o, "estimate")?, "estimate")?,
                    terminates: o.get("terminates").and_then(Value::as_bool).unwrap_or(false),
                    refund_to,
                })
            }
            other => Err(format!("unknown side record type {other:?}")),
        }
    }
}

/// Parses an NDJSON side-file; blank lines are skipped.
pub fn parse_side_records<R: BufRead>(r: R) -> Result<Vec<SideRecord>, RegistryError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)
            .map_err(|e| RegistryError::SideFile { line: i + 1, reason: e.to_string() })?;
        out.push(SideRecord::from_json(&v).map_err(|reason| RegistryError::SideFile { line: i + 1, reason })?);
    }
    Ok(out)
}

/// A contract creation seen at the top level of the ledger.
#[derive(Debug, Clone)]
pub struct Creation<'a> {
    pub tx: &'a Transaction,
    pub creator: Address,
    pub nonce: u64,
    pub address: Address,
}

/// Walks transactions in ledger order, tracking each sender's nonce, and
/// yields every top-level creation with its derived address.
pub fn scan_creations(txs: &[Transaction]) -> Vec<Creation<'_>> {
    let mut nonces: HashMap<Address, u64> = HashMap::new();
    let mut out = Vec::new();
    for tx in txs {
        let Some(sender) = tx.sender_address() else { continue };
        let nonce = nonces.entry(sender).or_insert(0);
        if tx.recipient.is_none() {
            out.push(Creation { tx, creator: sender, nonce: *nonce, address: derive_contract_address(&sender, *nonce) });
        }
        *nonce += 1;
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct ContractRegistry {
    contracts: BTreeMap<Address, ContractRecord>,
}

impl ContractRegistry {
    pub fn get(&self, a: &Address) -> Option<&ContractRecord> {
        self.contracts.get(a)
    }

    pub fn len(&self) -> usize {
        self.contracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }

    /// Contracts in address order.
    pub fn iter(&self) -> impl Iterator<Item = &ContractRecord> {
        self.contracts.values()
    }

    pub fn insert(&mut self, r: ContractRecord) {
        self.contracts.insert(r.address, r);
    }
}

/// Builds the registry from ordered Ethereum transactions and side records.
pub fn build_contract_registry(
    txs: &[Transaction],
    side: &[SideRecord],
) -> Result<ContractRegistry, RegistryError> {
    let mut reg = ContractRegistry::default();
    for c in scan_creations(txs) {
        if let Some(supplied) = c.tx.created_address {
            if supplied != c.address {
                return Err(RegistryError::AddressMismatch { tx: c.tx.hash, derived: c.address, supplied });
            }
        }
        reg.insert(ContractRecord {
            address: c.address,
            creation_height: c.tx.block_height,
            creation_index: Some(c.tx.index_in_block),
            creation_tx: Some(c.tx.hash),
            creator: c.creator,
            creator_kind: CreatorKind::ByTransaction,
            termination_height: None,
            balance: c.tx.value,
            code: strip_0x(&c.tx.input_data).to_string(),
        });
    }
    for rec in side {
        if let SideRecord::InternalCreate { parent, address, height } = rec {
            reg.insert(ContractRecord {
                address: *address,
                creation_height: *height,
                creation_index: None,
                creation_tx: None,
                creator: *parent,
                creator_kind: CreatorKind::ByContract,
                termination_height: None,
                balance: 0,
                code: String::new(),
            });
        }
    }
    for tx in txs {
        let Some(to) = tx.recipient_address() else { continue };
        if let Some(r) = reg.contracts.get_mut(&to) {
            r.balance += tx.value;
        }
    }
    for rec in side {
        if let SideRecord::Terminate { address, height, .. } = rec {
            match reg.contracts.get_mut(address) {
                Some(r) if *height >= r.creation_height => {
                    r.termination_height = Some(*height);
                    r.balance = 0;
                }
                Some(r) => log::warn!(
                    "ignoring termination of {address} at {height}, before its creation at {}",
                    r.creation_height
                ),
                None => log::warn!("ignoring termination of unknown contract {address}"),
            }
        }
    }
    Ok(reg)
}

/// [`build_contract_registry`] over the Ethereum ledger in `store`.
pub fn build_registry_from_store(
    store: &Store,
    cutoff_height: Option<u64>,
    side: &[SideRecord],
) -> Result<ContractRegistry, RegistryError> {
    let txs = store.transactions(ChainKind::Ethereum, cutoff_height)?;
    let side: Vec<SideRecord> = side
        .iter()
        .filter(|r| match (r, cutoff_height) {
            (SideRecord::InternalCreate { height, .. } | SideRecord::Terminate { height, .. }, Some(c)) => *height <= c,
            _ => true,
        })
        .cloned()
        .collect();
    build_contract_registry(&txs, &side)
}
