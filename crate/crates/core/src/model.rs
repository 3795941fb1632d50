//! Chain-agnostic ledger records and the NDJSON dump schema they are read from.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::primitives::{strip_0x, Address, Hash32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChainKind {
    #[serde(rename = "eth")]
    Ethereum,
    #[serde(rename = "nmc")]
    Namecoin,
    #[serde(rename = "ppc")]
    Peercoin,
}

impl ChainKind {
    pub const ALL: [ChainKind; 3] = [ChainKind::Ethereum, ChainKind::Namecoin, ChainKind::Peercoin];

    pub fn code(self) -> u8 {
        match self {
            ChainKind::Ethereum => 0,
            ChainKind::Namecoin => 1,
            ChainKind::Peercoin => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ChainKind::Ethereum => "eth",
            ChainKind::Namecoin => "nmc",
            ChainKind::Peercoin => "ppc",
        }
    }
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ChainKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eth" => Ok(ChainKind::Ethereum),
            "nmc" => Ok(ChainKind::Namecoin),
            "ppc" => Ok(ChainKind::Peercoin),
            other => Err(format!("unknown chain {other:?} (expected eth, nmc or ppc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofKind {
    Pow,
    Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub chain: ChainKind,
    pub height: u64,
    pub hash: Hash32,
    pub parent_hash: Hash32,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: u64,
    pub is_auxpow: Option<bool>,
    pub proof: Option<ProofKind>,
    pub tx_hashes: Vec<Hash32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameOpKind {
    New,
    FirstUpdate,
    Update,
}

impl fmt::Display for NameOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameOpKind::New => "name_new",
            NameOpKind::FirstUpdate => "name_firstupdate",
            NameOpKind::Update => "name_update",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameOpPayload {
    pub kind: NameOpKind,
    pub name: Option<String>,
    pub name_hash: Option<String>,
    /// Fee actually paid, in 10^-8 NMC.
    pub paid_fee: u64,
}

impl NameOpPayload {
    /// Checks the kind/field pairing; returns the offending field name.
    pub fn check(&self) -> Result<(), &'static str> {
        match self.kind {
            NameOpKind::New if self.name_hash.is_none() => Err("name_hash"),
            NameOpKind::FirstUpdate | NameOpKind::Update if self.name.is_none() => Err("name"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub chain: ChainKind,
    pub hash: Hash32,
    pub block_height: u64,
    pub index_in_block: u64,
    /// Lowercase `0x` address on Ethereum, opaque elsewhere.
    pub sender: String,
    /// `None` is a contract creation on Ethereum.
    pub recipient: Option<String>,
    /// Smallest chain unit (Wei, or 10^-8 coin).
    pub value: u128,
    /// Normalized to lowercase with a `0x` prefix.
    pub input_data: String,
    pub fee: Option<u128>,
    pub gas_limit: Option<u64>,
    pub name_op: Option<NameOpPayload>,
    /// Contract address reported by the node for creation transactions, if the dump carries it.
    pub created_address: Option<Address>,
}

impl Transaction {
    pub fn input_is_empty(&self) -> bool {
        strip_0x(&self.input_data).is_empty()
    }

    pub fn sender_address(&self) -> Option<Address> {
        self.sender.parse().ok()
    }

    pub fn recipient_address(&self) -> Option<Address> {
        self.recipient.as_deref().and_then(|r| r.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainSummary {
    pub chain: ChainKind,
    pub first_block_time: u64,
    pub cutoff_time: u64,
    pub cutoff_height: u64,
    pub block_count: u64,
    pub tx_count: u64,
    /// Sum of `value` over included transactions.
    #[serde(with = "crate::model::u128_string")]
    pub tx_volume: u128,
}

/// One parsed NDJSON line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Block(Block),
    Tx(Transaction),
}

impl Record {
    pub fn chain(&self) -> ChainKind {
        match self {
            Record::Block(b) => b.chain,
            Record::Tx(t) => t.chain,
        }
    }
}

/// A field that failed schema validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl FieldError {
    fn new(field: &str, reason: impl Into<String>) -> Self {
        FieldError { field: field.to_string(), reason: reason.into() }
    }
}

type Obj = Map<String, Value>;

fn required<'a>(obj: &'a Obj, field: &str) -> Result<&'a Value, FieldError> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(FieldError::new(field, "missing")),
        Some(v) => Ok(v),
    }
}

fn optional<'a>(obj: &'a Obj, field: &str) -> Option<&'a Value> {
    obj.get(field).filter(|v| !v.is_null())
}

/// Accepts a JSON number or a decimal string.
fn as_u128(v: &Value, field: &str) -> Result<u128, FieldError> {
    match v {
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                Ok(u128::from(u))
            } else {
                Err(FieldError::new(field, format!("expected non-negative integer, got {n}")))
            }
        }
        Value::String(s) => s
            .parse::<u128>()
            .map_err(|_| FieldError::new(field, format!("expected decimal integer, got {s:?}"))),
        _ => Err(FieldError::new(field, "expected integer")),
    }
}

fn as_u64(v: &Value, field: &str) -> Result<u64, FieldError> {
    let n = as_u128(v, field)?;
    u64::try_from(n).map_err(|_| FieldError::new(field, "out of range"))
}

fn as_str<'a>(v: &'a Value, field: &str) -> Result<&'a str, FieldError> {
    v.as_str().ok_or_else(|| FieldError::new(field, "expected string"))
}

fn as_hash(v: &Value, field: &str) -> Result<Hash32, FieldError> {
    as_str(v, field)?
        .parse()
        .map_err(|e| FieldError::new(field, format!("{e}")))
}

fn normalize_input(s: &str) -> Result<String, FieldError> {
    let digits = strip_0x(s);
    if let Some(pos) = digits.bytes().position(|b| !b.is_ascii_hexdigit()) {
        return Err(FieldError::new("input", format!("non-hex digit at {pos}")));
    }
    if digits.len() % 2 != 0 {
        return Err(FieldError::new("input", "odd number of hex digits"));
    }
    Ok(format!("0x{}", digits.to_ascii_lowercase()))
}

fn account(v: &Value, field: &str, chain: ChainKind) -> Result<String, FieldError> {
    let s = as_str(v, field)?;
    if chain == ChainKind::Ethereum {
        let a: Address = s.parse().map_err(|e| FieldError::new(field, format!("{e}")))?;
        Ok(a.to_string())
    } else {
        Ok(s.to_string())
    }
}

impl Record {
    /// Validates one decoded NDJSON object against the dump schema.
    pub fn from_json(value: &Value) -> Result<Record, FieldError> {
        let obj = value
            .as_object()
            .ok_or_else(|| FieldError::new("type", "line is not a JSON object"))?;
        let chain: ChainKind = as_str(required(obj, "chain")?, "chain")?
            .parse()
            .map_err(|e: String| FieldError::new("chain", e))?;
        match as_str(required(obj, "type")?, "type")? {
            "block" => parse_block(obj, chain).map(Record::Block),
            "tx" => parse_tx(obj, chain).map(Record::Tx),
            other => Err(FieldError::new("type", format!("unknown record type {other:?}"))),
        }
    }
}

fn parse_block(obj: &Obj, chain: ChainKind) -> Result<Block, FieldError> {
    let height = as_u64(required(obj, "height")?, "height")?;
    let timestamp = as_u64(required(obj, "time")?, "time")?;
    if timestamp == 0 {
        return Err(FieldError::new("time", "timestamp must be positive"));
    }
    let is_auxpow = match optional(obj, "auxpow") {
        None => None,
        Some(v) => Some(v.as_bool().ok_or_else(|| FieldError::new("auxpow", "expected bool"))?),
    };
    let proof = match optional(obj, "proof") {
        None => None,
        Some(v) => Some(match as_str(v, "proof")? {
            "pow" => ProofKind::Pow,
            "pos" => ProofKind::Pos,
            other => return Err(FieldError::new("proof", format!("expected pow|pos, got {other:?}"))),
        }),
    };
    let mut tx_hashes = Vec::new();
    if let Some(v) = optional(obj, "txs") {
        let arr = v.as_array().ok_or_else(|| FieldError::new("txs", "expected array"))?;
        let mut seen = HashSet::new();
        for h in arr {
            let h = as_hash(h, "txs")?;
            if !seen.insert(h) {
                return Err(FieldError::new("txs", format!("duplicate transaction {h}")));
            }
            tx_hashes.push(h);
        }
    }
    Ok(Block {
        chain,
        height,
        hash: as_hash(required(obj, "hash")?, "hash")?,
        parent_hash: as_hash(required(obj, "parent")?, "parent")?,
        timestamp,
        is_auxpow,
        proof,
        tx_hashes,
    })
}

fn parse_name_op(v: &Value) -> Result<NameOpPayload, FieldError> {
    let obj = v.as_object().ok_or_else(|| FieldError::new("name_op", "expected object"))?;
    let kind = match as_str(required(obj, "kind").map_err(prefix_name_op)?, "name_op.kind")? {
        "new" => NameOpKind::New,
        "firstupdate" => NameOpKind::FirstUpdate,
        "update" => NameOpKind::Update,
        other => return Err(FieldError::new("name_op.kind", format!("unknown kind {other:?}"))),
    };
    let name = optional(obj, "name")
        .map(|v| as_str(v, "name_op.name").map(str::to_string))
        .transpose()?;
    let name_hash = optional(obj, "name_hash")
        .map(|v| as_str(v, "name_op.name_hash").map(str::to_string))
        .transpose()?;
    let paid_fee = as_u64(required(obj, "paid_fee").map_err(prefix_name_op)?, "name_op.paid_fee")?;
    let op = NameOpPayload { kind, name, name_hash, paid_fee };
    op.check()
        .map_err(|f| FieldError::new(&format!("name_op.{f}"), format!("required for {}", op.kind)))?;
    Ok(op)
}

fn prefix_name_op(mut e: FieldError) -> FieldError {
    e.field = format!("name_op.{}", e.field);
    e
}

fn parse_tx(obj: &Obj, chain: ChainKind) -> Result<Transaction, FieldError> {
    let recipient = optional(obj, "to").map(|v| account(v, "to", chain)).transpose()?;
    let input_data = match optional(obj, "input") {
        None => "0x".to_string(),
        Some(v) => normalize_input(as_str(v, "input")?)?,
    };
    let created_address = optional(obj, "creates")
        .map(|v| {
            as_str(v, "creates")?
                .parse::<Address>()
                .map_err(|e| FieldError::new("creates", format!("{e}")))
        })
        .transpose()?;
    Ok(Transaction {
        chain,
        hash: as_hash(required(obj, "hash")?, "hash")?,
        block_height: as_u64(required(obj, "height")?, "height")?,
        index_in_block: as_u64(required(obj, "index")?, "index")?,
        sender: account(required(obj, "from")?, "from", chain)?,
        recipient,
        value: optional(obj, "value").map(|v| as_u128(v, "value")).transpose()?.unwrap_or(0),
        input_data,
        fee: optional(obj, "fee").map(|v| as_u128(v, "fee")).transpose()?,
        gas_limit: optional(obj, "gas").map(|v| as_u64(v, "gas")).transpose()?,
        name_op: optional(obj, "name_op").map(parse_name_op).transpose()?,
        created_address,
    })
}

impl Block {
    /// Renders the block back into its NDJSON form.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("type".into(), "block".into());
        m.insert("chain".into(), self.chain.tag().into());
        m.insert("height".into(), self.height.into());
        m.insert("hash".into(), self.hash.to_string().into());
        m.insert("parent".into(), self.parent_hash.to_string().into());
        m.insert("time".into(), self.timestamp.into());
        if let Some(a) = self.is_auxpow {
            m.insert("auxpow".into(), a.into());
        }
        if let Some(p) = self.proof {
            m.insert("proof".into(), if p == ProofKind::Pos { "pos" } else { "pow" }.into());
        }
        m.insert(
            "txs".into(),
            self.tx_hashes.iter().map(|h| Value::from(h.to_string())).collect(),
        );
        Value::Object(m)
    }
}

impl Transaction {
    /// Renders the transaction back into its NDJSON form.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("type".into(), "tx".into());
        m.insert("chain".into(), self.chain.tag().into());
        m.insert("hash".into(), self.hash.to_string().into());
        m.insert("height".into(), self.block_height.into());
        m.insert("index".into(), self.index_in_block.into());
        m.insert("from".into(), self.sender.clone().into());
        m.insert("to".into(), self.recipient.clone().map_or(Value::Null, Value::from));
        m.insert("value".into(), self.value.to_string().into());
        m.insert("input".into(), self.input_data.clone().into());
        if let Some(f) = self.fee {
            m.insert("fee".into(), f.to_string().into());
        }
        if let Some(g) = self.gas_limit {
            m.insert("gas".into(), g.into());
        }
        if let Some(op) = &self.name_op {
            let mut o = Map::new();
            let kind = match op.kind {
                NameOpKind::New => "new",
                NameOpKind::FirstUpdate => "firstupdate",
                NameOpKind::Update => "update",
            };
            o.insert("kind".into(), kind.into());
            if let Some(n) = &op.name {
                o.insert("name".into(), n.clone().into());
            }
            if let Some(h) = &op.name_hash {
                o.insert("name_hash".into(), h.clone().into());
            }
            o.insert("paid_fee".into(), op.paid_fee.to_string().into());
            m.insert("name_op".into(), Value::Object(o));
        }
        if let Some(a) = self.created_address {
            m.insert("creates".into(), a.to_string().into());
        }
        Value::Object(m)
    }
}

pub(crate) mod u128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    #[allow(dead_code)]
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
