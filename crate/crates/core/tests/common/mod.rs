//! Shared test support: reference implementations written from the
//! algorithm definitions, plus NDJSON fixture builders.
#![allow(dead_code)]

use std::io::Cursor;

use chainlens::ingest::{ingest_blocks, IngestOptions, IngestSummary};
use chainlens::{ChainKind, Store};
use serde_json::{json, Value};
use tempfile::TempDir;

// ---------------------------------------------------------------------------
// Keccak-256, straight from the permutation definition. Round constants come
// from the degree-8 LFSR and rotation offsets from the (x, y) walk instead of
// hard-coded tables.

fn lfsr_bit(t: usize) -> u64 {
    if t % 255 == 0 {
        return 1;
    }
    let mut r: u16 = 1;
    for _ in 0..(t % 255) {
        r <<= 1;
        if r & 0x100 != 0 {
            r ^= 0x171;
        }
    }
    u64::from(r & 1)
}

fn round_constant(round: usize) -> u64 {
    (0..=6).fold(0u64, |rc, j| rc | (lfsr_bit(j + 7 * round) << ((1 << j) - 1)))
}

fn rotation_offsets() -> [[u32; 5]; 5] {
    let mut r = [[0u32; 5]; 5];
    let (mut x, mut y) = (1usize, 0usize);
    for t in 0..24u32 {
        r[x][y] = ((t + 1) * (t + 2) / 2) % 64;
        (x, y) = (y, (2 * x + 3 * y) % 5);
    }
    r
}

fn keccak_f(a: &mut [[u64; 5]; 5]) {
    let rot = rotation_offsets();
    for round in 0..24 {
        let c: Vec<u64> = (0..5).map(|x| a[x].iter().fold(0, |acc, v| acc ^ v)).collect();
        for x in 0..5 {
            let d = c[(x + 4) % 5] ^ c[(x + 1) % 5].rotate_left(1);
            for y in 0..5 {
                a[x][y] ^= d;
            }
        }
        let mut b = [[0u64; 5]; 5];
        for x in 0..5 {
            for y in 0..5 {
                b[y][(2 * x + 3 * y) % 5] = a[x][y].rotate_left(rot[x][y]);
            }
        }
        for x in 0..5 {
            for y in 0..5 {
                a[x][y] = b[x][y] ^ (!b[(x + 1) % 5][y] & b[(x + 2) % 5][y]);
            }
        }
        a[0][0] ^= round_constant(round);
    }
}

pub fn oracle_keccak256(data: &[u8]) -> [u8; 32] {
    const RATE: usize = 136;
    let mut msg = data.to_vec();
    msg.push(0x01);
    while msg.len() % RATE != 0 {
        msg.push(0);
    }
    *msg.last_mut().unwrap() |= 0x80;
    let mut state = [[0u64; 5]; 5];
    for block in msg.chunks(RATE) {
        for i in 0..RATE / 8 {
            let lane = u64::from_le_bytes(block[8 * i..8 * i + 8].try_into().unwrap());
            state[i % 5][i / 5] ^= lane;
        }
        keccak_f(&mut state);
    }
    let mut out = [0u8; 32];
    for i in 0..4 {
        out[8 * i..8 * i + 8].copy_from_slice(&state[i % 5][i / 5].to_le_bytes());
    }
    out
}

// ---------------------------------------------------------------------------
// RLP encoding.

pub enum Rlp {
    Bytes(Vec<u8>),
    List(Vec<Rlp>),
}

fn length_prefix(len: usize, offset: u8) -> Vec<u8> {
    if len < 56 {
        return vec![offset + len as u8];
    }
    let be: Vec<u8> = (len as u64).to_be_bytes().into_iter().skip_while(|b| *b == 0).collect();
    let mut out = vec![offset + 55 + be.len() as u8];
    out.extend(be);
    out
}

pub fn oracle_rlp(item: &Rlp) -> Vec<u8> {
    match item {
        Rlp::Bytes(b) if b.len() == 1 && b[0] < 0x80 => b.clone(),
        Rlp::Bytes(b) => {
            let mut out = length_prefix(b.len(), 0x80);
            out.extend(b);
            out
        }
        Rlp::List(items) => {
            let body: Vec<u8> = items.iter().flat_map(oracle_rlp).collect();
            let mut out = length_prefix(body.len(), 0xc0);
            out.extend(body);
            out
        }
    }
}

pub fn rlp_uint(n: u64) -> Rlp {
    Rlp::Bytes(n.to_be_bytes().into_iter().skip_while(|b| *b == 0).collect())
}

pub fn oracle_contract_address(sender: &[u8; 20], nonce: u64) -> [u8; 20] {
    let encoded = oracle_rlp(&Rlp::List(vec![Rlp::Bytes(sender.to_vec()), rlp_uint(nonce)]));
    oracle_keccak256(&encoded)[12..].try_into().unwrap()
}

// ---------------------------------------------------------------------------
// Edit distance and neighbour selection by exhaustive computation.

pub fn oracle_levenshtein(a: &[u8], b: &[u8]) -> usize {
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        dp[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = dp[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
        }
    }
    dp[a.len()][b.len()]
}

/// Full sort by (XOR distance of Keccak hashes, node id), then the first k.
pub fn oracle_select_neighbors(ids: &[[u8; 64]], target_hash: &[u8; 32], k: usize) -> Vec<[u8; 64]> {
    let mut keyed: Vec<([u8; 32], [u8; 64])> = ids
        .iter()
        .map(|id| {
            let h = oracle_keccak256(id);
            let mut d = [0u8; 32];
            for i in 0..32 {
                d[i] = h[i] ^ target_hash[i];
            }
            (d, *id)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().take(k).map(|(_, id)| id).collect()
}

pub const ADDRESS_VECTORS: &[(&str, u64, &str)] = &[
    ("6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", 0, "cd234a471b72ba2f1ccf0a70fcaba648a5eecd8d"),
    ("6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", 1, "343c43a37d37dff08ae8c4a11544c718abb4fcf8"),
    ("6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", 2, "f778b86fa74e846c4f0a1fbd1335fe81c00a0c91"),
    ("6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", 3, "fffd933a0bc612844eaf0c6fe3e5b8e9b6c1d19c"),
    ("0000000000000000000000000000000000000000", 0, "bd770416a3345f91e4b34576cb804a576fa48eb1"),
    ("ffffffffffffffffffffffffffffffffffffffff", 127, "1a8fec5a9862c9e82b0a2fe9449986955cee923e"),
    ("00000000000000000000000000000000000000ff", 128, "447d29eb66a993952c99aa0698a8f06c31baf257"),
    ("1234567890abcdef1234567890abcdef12345678", 255, "d3a076c93cb7222b7c962ca029f63d66b73428c9"),
    ("deadbeefdeadbeefdeadbeefdeadbeefdeadbeef", 65536, "a9e70c1638ede11e60a54cc0c0573350e27128fa"),
    ("a990077c3205cbdf861e17fa532eeb069ce9ff96", u64::MAX, "5eeb75799e41db60261e906a4e900969c6732ebe"),
];


// ---------------------------------------------------------------------------
// Ledger fixtures.

pub fn hash_hex(tag: u64, a: u64, b: u64) -> String {
    format!("0x{tag:016x}{a:016x}{b:032x}")
}

pub fn addr(n: u64) -> String {
    format!("0x{n:040x}")
}

pub fn temp_store() -> (TempDir, Store) {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    (dir, store)
}

/// Builds NDJSON dumps line by line. Hashes are derived from heights and
/// indices so fixtures stay short.
pub struct Fixture {
    pub chain: ChainKind,
    pub lines: Vec<String>,
}

impl Fixture {
    pub fn new(chain: ChainKind) -> Self {
        Fixture { chain, lines: Vec::new() }
    }

    pub fn block_hash(height: u64) -> String {
        hash_hex(0xb10c, height, 0)
    }

    pub fn tx_hash(height: u64, index: u64) -> String {
        hash_hex(0x7e, height, index)
    }

    pub fn block(&mut self, height: u64, time: u64, extra: Value) -> &mut Self {
        let mut v = json!({
            "type": "block",
            "chain": self.chain.tag(),
            "height": height,
            "hash": Self::block_hash(height),
            "parent": Self::block_hash(height.wrapping_sub(1)),
            "time": time,
        });
        merge(&mut v, extra);
        self.lines.push(v.to_string());
        self
    }

    pub fn tx(&mut self, height: u64, index: u64, extra: Value) -> &mut Self {
        let mut v = json!({
            "type": "tx",
            "chain": self.chain.tag(),
            "hash": Self::tx_hash(height, index),
            "height": height,
            "index": index,
            "from": addr(0xf00),
            "to": addr(0xbeef),
            "value": "0",
            "input": "0x",
        });
        merge(&mut v, extra);
        self.lines.push(v.to_string());
        self
    }

    pub fn raw(&mut self, line: &str) -> &mut Self {
        self.lines.push(line.to_string());
        self
    }

    pub fn text(&self) -> String {
        self.lines.join("\n") + "\n"
    }

    pub fn ingest(&self, store: &Store) -> IngestSummary {
        ingest_blocks(Cursor::new(self.text()), self.chain, store, IngestOptions::default()).unwrap()
    }
}

fn merge(base: &mut Value, extra: Value) {
    if let (Value::Object(b), Value::Object(e)) = (base, extra) {
        for (k, v) in e {
            b.insert(k, v);
        }
    }
}

/// Seconds since the epoch for a UTC calendar date at noon.
pub fn ts(y: i32, m: u32, d: u32) -> u64 {
    chrono::NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(12, 0, 0).unwrap().and_utc().timestamp() as u64
}
