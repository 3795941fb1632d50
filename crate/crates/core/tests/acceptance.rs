//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

mod common;

use std::collections::BTreeSet;
use std::net::{IpAddr, Ipv4Addr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use chainlens::bootstrap::{
    harvest_seeds, probe_ports, ConnectResult, ResolveErrorKind, ScriptedProber, ScriptedResolver, SeedSource,
    Selection, SimDnsParams, SimResolver,
};
use chainlens::chain::{
    detect_reregistrations, merge_mine_split, pos_pow_counts, weekly_fee_sums, ChainError, FeeSchedule, Granularity,
    Period,
};
use chainlens::discovery::{
    build_sim_overlay, crawl, precompute_targets, select_neighbors, CrawlConfig, DiscoveryTransport, NodeId,
    PeerInfo, SimOverlay, SimParams, TransportError,
};
use chainlens::eth::{
    bucket_similarity, build_registry_from_store, classify_transaction, derive_contract_address, levenshtein,
    monthly_class_counts, probe_suicidal, ClassCounts, ContractRecord, CreatorKind, EditDistance, FixtureExecutor,
    FixtureRefund, GasPolicy, ReferenceContract, RefundDestination, SelectorDictionary, SideRecord,
    SimilarityBuckets, TxClass,
};
use chainlens::period::{IsoWeek, YearMonth};
use chainlens::poison::{extract_payload, match_signatures, scan_corpus, SignatureDb};
use chainlens::primitives::{decode_hex, encode_hex_prefixed};
use chainlens::query::{apply_cutoff, monthly_tx_counts, summarize_chain};
use chainlens::{Address, ChainKind, NameOpKind};
use common::{
    addr, oracle_contract_address, oracle_keccak256, oracle_levenshtein, oracle_select_neighbors, temp_store, ts,
    Fixture, ADDRESS_VECTORS,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("target precomputation", c01_targets),
        ("crawler correctness", c02_crawler),
        ("neighbor selection oracle", c03_neighbors),
        ("levenshtein oracle", c04_levenshtein),
        ("similarity bucketing", c05_similarity),
        ("transaction classification", c06_classification),
        ("contract address derivation", c07_addresses),
        ("suicide probe", c08_probe),
        ("namecoin", c09_namecoin),
        ("peercoin", c10_peercoin),
        ("poison scan", c11_poison),
        ("bootstrap", c12_bootstrap),
        ("ingestion properties", c13_ingestion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| Err(panic_text(p)));
        let elapsed = started.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".into()
    }
}

fn prefix_of(hash: &[u8; 32], bits: u32) -> u32 {
    if bits == 0 {
        return 0;
    }
    u32::from_be_bytes([hash[0], hash[1], hash[2], hash[3]]) >> (32 - bits)
}

fn c01_targets() -> Outcome {
    let started = Instant::now();
    let targets = precompute_targets(13, Some(0x5eed));
    let took = started.elapsed();
    ensure!(targets.len() == 8192, "{} targets", targets.len());
    let keys: Vec<u32> = targets.keys().copied().collect();
    ensure!(keys == (0..8192).collect::<Vec<u32>>(), "prefix keys are not 0..8192");
    for (prefix, id) in &targets {
        let rehash = oracle_keccak256(&id.0);
        ensure!(prefix_of(&rehash, 13) == *prefix, "target for {prefix} re-hashes elsewhere");
    }
    ensure!(took < Duration::from_secs(30), "took {took:?}");
    Ok(format!("8192 targets re-hashed to their prefixes, generated in {took:.2?}"))
}

/// Wraps a transport and records the peak number of concurrent calls.
struct Counting<'a> {
    inner: &'a SimOverlay,
    now: AtomicUsize,
    peak: AtomicUsize,
}

impl<'a> Counting<'a> {
    fn new(inner: &'a SimOverlay) -> Self {
        Counting { inner, now: AtomicUsize::new(0), peak: AtomicUsize::new(0) }
    }

    fn enter(&self) {
        let n = self.now.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(n, Ordering::SeqCst);
        std::thread::yield_now();
    }

    fn leave(&self) {
        self.now.fetch_sub(1, Ordering::SeqCst);
    }
}

impl DiscoveryTransport for Counting<'_> {
    fn ping_pong(&self, peer: &PeerInfo) -> Result<(), TransportError> {
        self.enter();
        let r = self.inner.ping_pong(peer);
        self.leave();
        r
    }

    fn find_node(&self, peer: &PeerInfo, target: &NodeId) -> Result<Vec<PeerInfo>, TransportError> {
        self.enter();
        let r = self.inner.find_node(peer, target);
        self.leave();
        r
    }
}

fn c02_crawler() -> Outcome {
    let (overlay, truth) = build_sim_overlay(&SimParams::new(1000, 20, 7)).map_err(|e| e.to_string())?;
    let seeds: Vec<PeerInfo> = truth.peers[..3].to_vec();
    let config = CrawlConfig { prefix_bits: 8, max_in_flight: 500, workers: 64, rng_seed: Some(7), ..Default::default() };

    let mut reports = Vec::new();
    let mut peak = 0;
    let mut slowest = Duration::ZERO;
    for _ in 0..2 {
        let counting = Counting::new(&overlay);
        let started = Instant::now();
        reports.push(crawl(&counting, &seeds, &config).map_err(|e| e.to_string())?);
        slowest = slowest.max(started.elapsed());
        peak = peak.max(counting.peak.load(Ordering::SeqCst));
    }
    let report = &reports[0];
    let found = report.known_peers.len();
    ensure!(found >= 990, "only {found} peers discovered");
    ensure!(report.known_peers.iter().all(|p| truth.contains(&p.node_id)), "discovered a peer outside ground truth");
    ensure!(reports[0] == reports[1], "two seeded runs differ");
    ensure!(peak <= 500, "{peak} calls in flight");

    let narrow = CrawlConfig { max_in_flight: 6, workers: 64, ..config.clone() };
    let counting = Counting::new(&overlay);
    let small = crawl(&counting, &seeds, &narrow).map_err(|e| e.to_string())?;
    let narrow_peak = counting.peak.load(Ordering::SeqCst);
    ensure!(narrow_peak <= 6, "{narrow_peak} calls in flight with a cap of 6");
    ensure!(small.known_peers == report.known_peers, "cap changed the discovered set");

    ensure!(slowest < Duration::from_secs(60), "a crawl took {slowest:?}");
    Ok(format!(
        "{found}/1000 discovered, runs identical, peak in flight {peak} (cap 500), {narrow_peak} (cap 6), slowest crawl {slowest:.2?}"
    ))
}

fn c03_neighbors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut with_ties = 0;
    for case in 0..500 {
        let n = rng.gen_range(0..=200);
        let mut ids: Vec<[u8; 64]> = Vec::with_capacity(n);
        for _ in 0..n {
            if !ids.is_empty() && rng.gen_bool(0.1) {
                let dup = ids[rng.gen_range(0..ids.len())];
                ids.push(dup);
            } else {
                let mut id = [0u8; 64];
                rng.fill_bytes(&mut id);
                ids.push(id);
            }
        }
        if ids.iter().collect::<BTreeSet<_>>().len() < ids.len() {
            with_ties += 1;
        }
        let target = if n > 0 && rng.gen_bool(0.2) {
            oracle_keccak256(&ids[rng.gen_range(0..n)])
        } else {
            let mut t = [0u8; 32];
            rng.fill_bytes(&mut t);
            t
        };
        let k = rng.gen_range(0..=n + 4);
        let peers: Vec<PeerInfo> = ids
            .iter()
            .map(|id| PeerInfo::new(NodeId(*id), IpAddr::V4(Ipv4Addr::new(10, 0, 0, 1)), 30303))
            .collect();
        let got: Vec<[u8; 64]> = select_neighbors(&peers, &chainlens::discovery::NodeHash(target), k)
            .iter()
            .map(|p| p.node_id.0)
            .collect();
        let want = oracle_select_neighbors(&ids, &target, k);
        ensure!(got == want, "instance {case}: n={n} k={k} differs from full sort");
    }
    Ok(format!("500 instances equal to a full sort ({with_ties} with tied distances)"))
}

fn random_text(rng: &mut ChaCha8Rng, max_len: usize, alphabet: &[u8]) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

fn c04_levenshtein() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let alphabet: &[u8] = if case % 2 == 0 { b"ab" } else { b"0123456789abcdef" };
        let a = random_text(&mut rng, 64, alphabet);
        let b = if rng.gen_bool(0.3) {
            let mut b = a.clone();
            for _ in 0..rng.gen_range(0..6) {
                if !b.is_empty() {
                    let i = rng.gen_range(0..b.len());
                    b[i] = alphabet[rng.gen_range(0..alphabet.len())];
                }
            }
            b
        } else {
            random_text(&mut rng, 64, alphabet)
        };
        let want = oracle_levenshtein(&a, &b);
        ensure!(levenshtein(&a, &b, 128) == EditDistance::Within(want), "pair {case} differs from full DP");
    }

    let fixtures: [(Vec<u8>, Vec<u8>, usize); 4] = [
        (b"0x60606040".to_vec(), b"0x60606040".to_vec(), 0),
        (b"kitten".to_vec(), b"sitting".to_vec(), 3),
        ([b"a".repeat(100)].concat(), [b"a".repeat(50), b"b".repeat(50)].concat(), 50),
        (b"x".repeat(400), b"y".repeat(400), 400),
    ];
    for (a, b, d) in &fixtures {
        ensure!(oracle_levenshtein(a, b) == *d, "oracle disagrees with fixture distance {d}");
        ensure!(levenshtein(a, b, 1000) == EditDistance::Within(*d), "fixture distance {d} not reproduced");
    }

    let mut over = 0;
    for case in 0..200 {
        let a = random_text(&mut rng, 64, b"abc");
        let b = random_text(&mut rng, 64, b"abc");
        let want = oracle_levenshtein(&a, &b);
        let cutoff = (want as i64 + rng.gen_range(-4..=4)).max(0) as usize;
        let got = levenshtein(&a, &b, cutoff);
        if want > cutoff {
            over += 1;
            ensure!(got == EditDistance::OverCutoff, "case {case}: {want} > {cutoff} but got {got:?}");
        } else {
            ensure!(got == EditDistance::Within(want), "case {case}: expected {want} within {cutoff}, got {got:?}");
        }
    }
    Ok(format!("1000 random pairs, fixtures 0/3/50/400, 200 cutoff cases ({over} over cutoff)"))
}

fn contract(n: u64, code: String) -> ContractRecord {
    ContractRecord {
        address: addr(n).parse().unwrap(),
        creation_height: n,
        creation_index: Some(0),
        creation_tx: None,
        creator: addr(0xc7ea70).parse().unwrap(),
        creator_kind: CreatorKind::ByTransaction,
        termination_height: None,
        balance: 0,
        code,
    }
}

/// Replaces `count` evenly spread characters with `f`. The reference never
/// contains `f`, so the edit distance is exactly `count`.
fn substitute(reference: &str, count: usize) -> String {
    let mut chars: Vec<char> = reference.chars().collect();
    let step = chars.len() / count.max(1);
    for i in 0..count {
        chars[i * step] = 'f';
    }
    chars.into_iter().collect()
}

fn c05_similarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let long: String = (0..1400).map(|_| char::from(b'0' + rng.gen_range(0..8u8))).collect();
    let short: String = (0..40).map(|_| char::from(b'0' + rng.gen_range(0..8u8))).collect();
    let references = vec![
        ReferenceContract { name: "wallet".into(), optimized: false, bytecode: long.clone() },
        ReferenceContract { name: "token".into(), optimized: true, bytecode: format!("0x{short}") },
    ];
    let codes = vec![
        long.clone(),
        format!("0x{long}"),
        long.to_uppercase(),
        substitute(&long, 1),
        substitute(&long, 37),
        substitute(&long, 100),
        substitute(&long, 101),
        format!("{long}{}", "f".repeat(500)),
        substitute(&long, 1000),
        substitute(&long, 1001),
        "f".repeat(1400),
        short.clone(),
        substitute(&short, 40),
    ];
    let distances_long = [0, 0, 0, 1, 37, 100, 101, 500, 1000, 1001, 1400];
    for (code, d) in codes.iter().zip(distances_long) {
        let normalized = code.trim_start_matches("0x").to_ascii_lowercase();
        if d <= 101 {
            ensure!(oracle_levenshtein(normalized.as_bytes(), long.as_bytes()) == d, "corpus distance {d} is off");
        }
    }
    let corpus: Vec<ContractRecord> = codes.into_iter().enumerate().map(|(i, c)| contract(i as u64, c)).collect();
    let rows = bucket_similarity(&corpus, &references, &SimilarityBuckets::default());
    let got: Vec<(String, u64, u64, u64, usize)> =
        rows.iter().map(|r| (r.reference.clone(), r.exact, r.minor, r.heavy, r.size)).collect();
    let want = vec![("wallet".to_string(), 3, 3, 3, 700), ("token".to_string(), 1, 1, 0, 20)];
    ensure!(got == want, "bucket counts {got:?}, expected {want:?}");
    Ok("wallet 3/3/3, token 1/1/0 exact/minor/heavy".into())
}

fn c06_classification() -> Outcome {
    use TxClass::*;
    let (_dir, store) = temp_store();
    let (a, b, c) = (addr(0xa1), addr(0xb2), addr(0xc3));
    let sender_a: Address = a.parse().unwrap();
    let x = derive_contract_address(&sender_a, 1).to_string();
    let z = derive_contract_address(&sender_a, 2).to_string();
    let y = derive_contract_address(&sender_a, 3).to_string();
    let w = addr(0x77);

    let rows: Vec<(u64, u64, Value, TxClass)> = vec![
        (1, 0, json!({"from": a, "to": b, "value": "5"}), ToAccount),
        (1, 1, json!({"from": a, "to": null, "input": "0x6060604052"}), CreateContract),
        (1, 2, json!({"from": b, "to": x, "value": "3"}), ToContract),
        (1, 3, json!({"from": a, "to": null, "input": "0x", "value": "10"}), ZombieCreate),
        (2, 0, json!({"from": c, "to": z, "value": "1"}), ToContract),
        (2, 1, json!({"from": c, "to": addr(0xdead)}), ToAccount),
        (2, 2, json!({"from": b, "to": y, "value": "7"}), ToAccount),
        (2, 3, json!({"from": c, "to": null, "input": ""}), ZombieCreate),
        (3, 0, json!({"from": a, "to": null, "input": "0x60"}), CreateContract),
        (3, 1, json!({"from": b, "to": y}), ToContract),
        (3, 2, json!({"from": c, "to": w}), ToAccount),
        (3, 3, json!({"from": a, "to": x}), ToContract),
        (4, 0, json!({"from": c, "to": w}), ToContract),
        (4, 1, json!({"from": b, "to": c}), ToAccount),
        (4, 2, json!({"from": b, "to": null, "input": null}), ZombieCreate),
        (5, 0, json!({"from": a, "to": addr(0)}), ToAccount),
        (5, 1, json!({"from": c, "to": null, "input": "0xDEADBEEF"}), CreateContract),
        (5, 2, json!({"from": b, "to": a}), ToAccount),
        (5, 3, json!({"from": a, "to": b}), ToAccount),
        (5, 4, json!({"from": b, "to": y}), ToContract),
    ];
    let days = [ts(2016, 1, 5), ts(2016, 1, 20), ts(2016, 2, 3), ts(2016, 2, 25), ts(2016, 3, 10)];
    let mut f = Fixture::new(ChainKind::Ethereum);
    for (h, t) in days.iter().enumerate() {
        f.block(h as u64 + 1, *t, json!({}));
    }
    for (h, i, extra, _) in &rows {
        f.tx(*h, *i, extra.clone());
    }
    let summary = f.ingest(&store);
    ensure!(summary.txs_loaded == 20 && summary.rejected_lines() == 0, "fixture ingest: {summary:?}");

    let side = vec![SideRecord::InternalCreate { parent: x.parse().unwrap(), address: w.parse().unwrap(), height: 3 }];
    let registry = build_registry_from_store(&store, None, &side).map_err(|e| e.to_string())?;
    let txs = store.transactions(ChainKind::Ethereum, None).map_err(|e| e.to_string())?;
    ensure!(txs.len() == 20, "{} transactions stored", txs.len());
    let mut matched = 0;
    for (tx, (h, i, _, label)) in txs.iter().zip(&rows) {
        let got = classify_transaction(tx, &registry);
        ensure!(got == *label, "tx ({h},{i}) classified {got:?}, labelled {label:?}");
        matched += 1;
    }

    let months = store.month_index(ChainKind::Ethereum).map_err(|e| e.to_string())?;
    let monthly = monthly_class_counts(&txs, &registry, &months);
    let counts = |to_account, to_contract, create_contract, zombie_create| ClassCounts {
        to_account,
        to_contract,
        create_contract,
        zombie_create,
    };
    let want = vec![
        (YearMonth { year: 2016, month: 1 }, counts(3, 2, 1, 2)),
        (YearMonth { year: 2016, month: 2 }, counts(2, 3, 1, 1)),
        (YearMonth { year: 2016, month: 3 }, counts(3, 1, 1, 0)),
    ];
    ensure!(monthly == want, "monthly counts {monthly:?}");
    let mut total = ClassCounts::default();
    for (_, m) in &monthly {
        total.to_account += m.to_account;
        total.to_contract += m.to_contract;
        total.create_contract += m.create_contract;
        total.zombie_create += m.zombie_create;
    }
    ensure!(total == counts(8, 6, 3, 3) && total.total() == 20, "monthly sums {total:?}");
    Ok(format!("{matched}/20 labels matched; monthly sums 8/6/3/3 = 20"))
}

fn c07_addresses() -> Outcome {
    for (sender, nonce, expected) in ADDRESS_VECTORS {
        let bytes: [u8; 20] = hex::decode(sender).unwrap().try_into().unwrap();
        let oracle = hex::encode(oracle_contract_address(&bytes, *nonce));
        let library = hex::encode(derive_contract_address(&Address(bytes), *nonce).0);
        ensure!(oracle == *expected, "oracle drifted from stored vector for nonce {nonce}");
        ensure!(library == oracle, "{sender} nonce {nonce}: {library} != {oracle}");
    }
    Ok(format!("{} vectors byte-exact", ADDRESS_VECTORS.len()))
}

fn c08_probe() -> Outcome {
    let dict = SelectorDictionary::default();
    ensure!(dict.len() == 14, "default dictionary has {} selectors", dict.len());
    let sel = |i: usize| dict.entries()[i].selector;
    let caller: Address = addr(0xca11).parse().unwrap();
    let creator: Address = addr(0xc7ea70).parse().unwrap();
    let other: Address = addr(0xfeed).parse().unwrap();
    let c = |n: u64| -> Address { addr(0xc000 + n).parse().unwrap() };
    let gas = |n: u64, i: usize, estimate: u64, terminates: bool, refund_to: FixtureRefund| SideRecord::GasFixture {
        address: c(n),
        selector: sel(i),
        estimate,
        terminates,
        refund_to,
    };

    let mut side = vec![
        gas(1, 0, 10_000, true, FixtureRefund::Caller),
        gas(1, 1, 30_000, false, FixtureRefund::None),
        gas(3, 0, 21_000, true, FixtureRefund::Caller),
        gas(4, 2, 15_000, false, FixtureRefund::None),
        gas(4, 5, 12_000, true, FixtureRefund::To(creator)),
        gas(6, 9, 20_999, true, FixtureRefund::To(Address::ZERO)),
        gas(8, 3, 5_000, true, FixtureRefund::To(other)),
        gas(9, 13, 100, true, FixtureRefund::None),
    ];
    for i in 0..14 {
        side.push(gas(2, i, 25_000, true, FixtureRefund::Caller));
        side.push(gas(5, i, 9_000, false, FixtureRefund::None));
    }
    let contracts: Vec<ContractRecord> = (1..=9)
        .map(|n| ContractRecord { address: c(n), creator, balance: u128::from(n) * 1000, ..contract(n, "60".into()) })
        .collect();
    let executor = FixtureExecutor::from_records(&side);
    let batch = probe_suicidal(&contracts, &executor, &dict, &GasPolicy::default(), &caller);
    ensure!(batch.failures.is_empty(), "failures: {:?}", batch.failures);

    let probed: Vec<Address> = batch.results.iter().map(|r| r.contract).collect();
    ensure!(probed == vec![c(1), c(4), c(5), c(6), c(8), c(9)], "probed set {probed:?}");

    type Expect = (Option<usize>, bool, RefundDestination, bool, u64);
    let want: [Expect; 6] = [
        (Some(0), true, RefundDestination::Caller, false, 10_000),
        (Some(5), true, RefundDestination::Creator, false, 12_000),
        (None, false, RefundDestination::None, true, 9_000),
        (Some(9), true, RefundDestination::NullAddress, false, 20_999),
        (Some(3), true, RefundDestination::Other(other), false, 5_000),
        (Some(13), true, RefundDestination::None, false, 100),
    ];
    for (r, (trigger, confirmed, refund, suspicious, estimate)) in batch.results.iter().zip(want) {
        ensure!(r.triggering_selector == trigger.map(sel), "{}: trigger {:?}", r.contract, r.triggering_selector);
        ensure!(r.confirmed_terminated == confirmed, "{}: confirmed {}", r.contract, r.confirmed_terminated);
        ensure!(r.refund_destination == refund, "{}: refund {:?}", r.contract, r.refund_destination);
        ensure!(r.suspicious_default_function == suspicious, "{}: suspicious flag", r.contract);
        ensure!(r.gas_estimate == estimate, "{}: estimate {}", r.contract, r.gas_estimate);
        ensure!(r.gas_used.is_some() == confirmed, "{}: gas_used {:?}", r.contract, r.gas_used);
    }
    let c4 = &batch.results[1];
    ensure!(c4.candidates == vec![(sel(2), 15_000), (sel(5), 12_000)], "candidates {:?}", c4.candidates);
    ensure!(batch.results[2].candidates.len() == 14, "suspicious contract candidates");
    Ok("6 of 9 contracts probed; triggers, refunds and the all-14 suspicious flag match".into())
}

fn name_op(kind: &str, name: &str, fee: u64) -> Value {
    if kind == "new" {
        json!({"name_op": {"kind": "new", "name_hash": format!("{:040x}", name.len()), "paid_fee": fee}})
    } else {
        json!({"name_op": {"kind": kind, "name": name, "paid_fee": fee}})
    }
}

fn c09_namecoin() -> Outcome {
    let schedule = FeeSchedule::default();
    let (_dir, store) = temp_store();
    let mut f = Fixture::new(ChainKind::Namecoin);
    f.block(19198, ts(2011, 1, 3), json!({"auxpow": false}))
        .block(19199, ts(2011, 1, 5), json!({}))
        .block(19200, ts(2011, 1, 12), json!({"auxpow": true}))
        .block(19201, ts(2011, 1, 20), json!({"auxpow": true}))
        .block(19202, ts(2011, 2, 1), json!({"auxpow": false}))
        .block(19203, ts(2011, 2, 2), json!({"auxpow": true}))
        .tx(19198, 0, name_op("new", "d/a", 1_000_000))
        .tx(19198, 1, json!({}))
        .tx(19199, 0, name_op("firstupdate", "d/a", 5_000_000_000))
        .tx(19200, 0, name_op("new", "d/b", 1_000_001))
        .tx(19200, 1, name_op("firstupdate", "d/b", 2_500_500_000))
        .tx(19200, 2, json!({}))
        .tx(19201, 0, name_op("update", "d/a", 500_000))
        .tx(19202, 0, name_op("update", "d/b", 499_999))
        .tx(19202, 1, json!({}))
        .tx(19203, 0, name_op("new", "d/c", 2_500_000))
        .tx(19203, 1, name_op("new", "d/d", 3_333_333));
    let s = f.ingest(&store);
    ensure!(s.rejected_lines() == 0, "fixture rejected: {:?}", s.rejected);

    let split = merge_mine_split(&store, &schedule, None).map_err(|e| e.to_string())?;
    let got: Vec<(&str, u64, u64)> = split.iter().map(|r| (r.category.as_str(), r.normal, r.merged)).collect();
    let want = vec![
        ("blocks", 3, 3),
        ("transactions", 5, 6),
        ("name_new", 1, 3),
        ("name_firstupdate", 1, 1),
        ("name_update", 1, 1),
    ];
    ensure!(got == want, "split {got:?}");
    ensure!((split[2].merged_pct - 75.0).abs() < 1e-9, "name_new merged share {}", split[2].merged_pct);

    let (_dir2, early) = temp_store();
    let mut bad = Fixture::new(ChainKind::Namecoin);
    bad.block(19198, ts(2011, 1, 3), json!({})).block(19199, ts(2011, 1, 4), json!({"auxpow": true}));
    bad.ingest(&early);
    match merge_mine_split(&early, &schedule, None) {
        Err(ChainError::AuxPowBeforeActivation(19199)) => {}
        other => return Err(format!("auxpow below activation gave {other:?}")),
    }

    let weekly = weekly_fee_sums(&store, None).map_err(|e| e.to_string())?;
    let got: Vec<(String, NameOpKind, u64)> = weekly.iter().map(|r| (r.week.to_string(), r.kind, r.paid_fee)).collect();
    let (n, fu, up) = (NameOpKind::New, NameOpKind::FirstUpdate, NameOpKind::Update);
    let hand: [(&str, [u64; 3]); 5] = [
        ("2011-W01", [1_000_000, 5_000_000_000, 0]),
        ("2011-W02", [1_000_001, 2_500_500_000, 0]),
        ("2011-W03", [0, 0, 500_000]),
        ("2011-W04", [0, 0, 0]),
        ("2011-W05", [5_833_333, 0, 499_999]),
    ];
    let want: Vec<(String, NameOpKind, u64)> = hand
        .iter()
        .flat_map(|(w, fees)| [n, fu, up].into_iter().zip(*fees).map(move |(k, f)| (w.to_string(), k, f)))
        .collect();
    ensure!(got == want, "weekly sums {got:?}");
    ensure!(weekly[0].week == "2011-W01".parse::<IsoWeek>().unwrap(), "week parsing");

    let (_dir3, names) = temp_store();
    let day = chrono::NaiveDate::from_ymd_opt(2012, 6, 1).unwrap();
    let mut r = Fixture::new(ChainKind::Namecoin);
    r.block(5_000, ts(2011, 3, 1), json!({}))
        .block(10_000, ts(2011, 5, 1), json!({}))
        .block(13_999, ts(2011, 6, 1), json!({}))
        .block(14_000, ts(2011, 6, 2), json!({}))
        .block(20_000, ts(2011, 8, 1), json!({}))
        .block(50_000, ts(2012, 6, 1), json!({}))
        .block(50_100, ts(2012, 6, 2), json!({}))
        .tx(5_000, 0, name_op("firstupdate", "d/eta", 0))
        .tx(10_000, 0, name_op("firstupdate", "d/alpha", 0))
        .tx(10_000, 1, name_op("firstupdate", "d/beta", 0))
        .tx(13_999, 0, name_op("firstupdate", "d/delta", 0))
        .tx(14_000, 0, name_op("firstupdate", "d/gamma", 0))
        .tx(20_000, 0, name_op("update", "d/beta", 0))
        .tx(50_000, 0, name_op("firstupdate", "d/alpha", 0))
        .tx(50_000, 1, name_op("firstupdate", "d/beta", 0))
        .tx(50_000, 2, name_op("firstupdate", "d/gamma", 0))
        .tx(50_000, 3, name_op("firstupdate", "d/delta", 0))
        .tx(50_000, 4, name_op("firstupdate", "d/epsilon", 0))
        .tx(50_000, 5, name_op("new", "d/zeta", 0))
        .tx(50_100, 0, name_op("firstupdate", "d/eta", 0));
    r.ingest(&names);
    let report = detect_reregistrations(&names, &schedule, day, None).map_err(|e| e.to_string())?;
    let flagged: Vec<(&str, u64)> =
        report.reregistered.iter().map(|e| (e.name.as_str(), e.last_renewal_height)).collect();
    let live: Vec<(&str, u64)> = report.anomalies.iter().map(|e| (e.name.as_str(), e.last_renewal_height)).collect();
    ensure!(report.firstupdates_on_day == 5, "{} firstupdates on the day", report.firstupdates_on_day);
    ensure!(flagged == vec![("d/alpha", 10_000), ("d/delta", 13_999)], "re-registrations {flagged:?}");
    ensure!(live == vec![("d/beta", 20_000), ("d/gamma", 14_000)], "live re-registrations {live:?}");
    Ok("split 3/3 blocks, 5/6 txs; auxpow@19199 rejected; 15 weekly sums exact; 2 expired re-registrations".into())
}

fn c10_peercoin() -> Outcome {
    let (_dir, store) = temp_store();
    let mut f = Fixture::new(ChainKind::Peercoin);
    let proofs = [
        (ts(2013, 1, 2), "pow"),
        (ts(2013, 1, 9), "pos"),
        (ts(2013, 1, 15), "pow"),
        (ts(2013, 1, 28), "pos"),
        (ts(2013, 1, 31), "pow"),
        (ts(2013, 3, 1), "pos"),
        (ts(2013, 3, 2), "pos"),
        (ts(2013, 3, 17), "pow"),
        (ts(2013, 3, 30), "pos"),
        (ts(2013, 3, 31), "pos"),
        (ts(2013, 4, 4), "pow"),
        (ts(2013, 4, 30), "pow"),
    ];
    for (h, (t, p)) in proofs.iter().enumerate() {
        f.block(h as u64, *t, json!({"proof": p}));
    }
    f.ingest(&store);
    let rows = pos_pow_counts(&store, Granularity::Month, None).map_err(|e| e.to_string())?;
    let got: Vec<(Period, u64, u64)> = rows.iter().map(|r| (r.period, r.pos, r.pow)).collect();
    let m = |month| Period::Month(YearMonth { year: 2013, month });
    let want = vec![(m(1), 2, 3), (m(2), 0, 0), (m(3), 4, 1), (m(4), 0, 2)];
    ensure!(got == want, "monthly counts {got:?}");
    let sum: u64 = rows.iter().map(|r| r.pos + r.pow).sum();
    ensure!(sum == proofs.len() as u64, "sum {sum} != {} blocks", proofs.len());

    let (_dir2, untagged) = temp_store();
    let mut g = Fixture::new(ChainKind::Peercoin);
    g.block(0, ts(2013, 1, 1), json!({"proof": "pow"})).block(1, ts(2013, 1, 2), json!({}));
    g.ingest(&untagged);
    ensure!(
        matches!(pos_pow_counts(&untagged, Granularity::Month, None), Err(ChainError::MissingProofTag(1))),
        "untagged block not reported"
    );
    Ok("Jan 2/3, Feb 0/0, Mar 4/1, Apr 0/2 PoS/PoW; sum 12 = total".into())
}

struct CorpusCase {
    label: String,
    payload: Vec<u8>,
    detected: BTreeSet<String>,
    verified: BTreeSet<String>,
}

fn split_set(field: &str) -> BTreeSet<String> {
    field.split(';').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn read_fixture(name: &str) -> Vec<Vec<String>> {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect()
}

/// Formats whose leading `min(len, 2)` magic bytes sit at their offset.
fn oracle_detect(payload: &[u8], table: &[(String, Vec<u8>, usize)]) -> BTreeSet<String> {
    table
        .iter()
        .filter(|(_, magic, offset)| {
            let n = magic.len().min(2);
            payload.len() >= offset + n && payload[*offset..offset + n] == magic[..n]
        })
        .map(|(name, _, _)| name.clone())
        .collect()
}

fn c11_poison() -> Outcome {
    let db = SignatureDb::default();
    for row in read_fixture("magic_oracle.csv") {
        let entry = db.get(&row[0]).ok_or_else(|| format!("{} missing from the shipped table", row[0]))?;
        ensure!(hex::encode(&entry.magic) == row[1], "{}: shipped magic {}", row[0], hex::encode(&entry.magic));
        ensure!(entry.offset.to_string() == row[2], "{}: shipped offset {}", row[0], entry.offset);
    }
    let table: Vec<(String, Vec<u8>, usize)> =
        db.entries().iter().map(|e| (e.format_name.clone(), e.magic.clone(), e.offset)).collect();

    let cases: Vec<CorpusCase> = read_fixture("poison_corpus.csv")
        .into_iter()
        .map(|r| CorpusCase {
            label: r[0].clone(),
            payload: hex::decode(&r[1]).unwrap(),
            detected: split_set(&r[2]),
            verified: split_set(r.get(3).map_or("", String::as_str)),
        })
        .collect();
    let mut collisions = 0;
    for case in &cases {
        ensure!(oracle_detect(&case.payload, &table) == case.detected, "{}: fixture enumeration is stale", case.label);
        collisions += case.detected.len() - 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut random = Vec::new();
    while random.len() < 50 {
        let len = rng.gen_range(1..400);
        let mut p = vec![0u8; len];
        rng.fill_bytes(&mut p);
        if oracle_detect(&p, &table).is_empty() {
            random.push(p);
        }
    }

    let (_dir, store) = temp_store();
    let mut f = Fixture::new(ChainKind::Ethereum);
    f.block(1, ts(2016, 5, 1), json!({}));
    let payloads: Vec<&Vec<u8>> = cases.iter().map(|c| &c.payload).chain(&random).collect();
    for (i, p) in payloads.iter().enumerate() {
        f.tx(1, i as u64, json!({"input": encode_hex_prefixed(p)}));
    }
    f.ingest(&store);
    let out = tempfile::tempdir().unwrap();
    let report = scan_corpus(&store, ChainKind::Ethereum, &db, Some(out.path()), None).map_err(|e| e.to_string())?;
    ensure!(report.scanned == cases.len() + 50, "scanned {}", report.scanned);
    ensure!(report.write_failures.is_empty(), "write failures {:?}", report.write_failures);

    for (i, case) in cases.iter().enumerate() {
        let hash = Fixture::tx_hash(1, i as u64);
        let rows: Vec<_> = report.rows.iter().filter(|r| r.tx_hash.to_string() == hash).collect();
        let detected: BTreeSet<String> = rows.iter().map(|r| r.format_name.clone()).collect();
        let verified: BTreeSet<String> = rows.iter().filter(|r| r.verified).map(|r| r.format_name.clone()).collect();
        ensure!(detected == case.detected, "{}: detected {detected:?}", case.label);
        ensure!(verified == case.verified, "{}: verified {verified:?}", case.label);
        let direct: BTreeSet<String> = match_signatures(&case.payload, &db).into_iter().map(str::to_string).collect();
        ensure!(direct == case.detected, "{}: match_signatures {direct:?}", case.label);
        for r in &rows {
            let path = r.extracted_to.as_ref().ok_or("row without extracted file")?;
            ensure!(std::fs::read(path).unwrap() == case.payload, "{}: extracted bytes differ", case.label);
        }
    }
    let random_hits = report.rows.iter().filter(|r| {
        let idx = (cases.len()..cases.len() + 50).map(|i| Fixture::tx_hash(1, i as u64));
        idx.into_iter().any(|h| h == r.tx_hash.to_string())
    });
    ensure!(random_hits.count() == 0, "a random non-matching input was flagged");

    for i in 0..1000 {
        let len = rng.gen_range(0..256);
        let mut bytes = vec![0u8; len];
        rng.fill_bytes(&mut bytes);
        let text = encode_hex_prefixed(&bytes);
        ensure!(decode_hex(&text).ok().as_ref() == Some(&bytes), "hex round trip {i}");
        ensure!(extract_payload(&text.to_uppercase().replacen("0X", "0x", 1)).ok() == Some(bytes), "payload {i}");
    }
    Ok(format!(
        "{} fixture payloads exact ({collisions} enumerated prefix collisions), 50 random inputs clean, 1000 hex round trips",
        cases.len()
    ))
}

fn ip(a: u8, b: u8, c: u8, d: u8) -> IpAddr {
    IpAddr::V4(Ipv4Addr::new(a, b, c, d))
}

fn c12_bootstrap() -> Outcome {
    let source = |names: &[&str]| SeedSource { port: 8333, hardcoded: vec![], dns: names.iter().map(|s| s.to_string()).collect() };

    let fixed = ScriptedResolver::new().script("seed.a", vec![Ok(vec![ip(1, 1, 1, 1), ip(2, 2, 2, 2)])]);
    let h = harvest_seeds(fixed, &source(&["seed.a"]), 3).map_err(|e| e.to_string())?;
    ensure!(h.cumulative_curve() == vec![2, 2, 2], "fixed answers gave {:?}", h.cumulative_curve());

    let params = SimDnsParams {
        pool_size: 10,
        per_query: 2,
        selection: Selection::RoundRobin,
        servfail_rate: 0.0,
        ptr_rate: 0.0,
        seed: 1,
    };
    let rr = SimResolver::new(&["seed.rr".to_string()], params);
    let h = harvest_seeds(rr, &source(&["seed.rr"]), 7).map_err(|e| e.to_string())?;
    ensure!(h.cumulative_curve() == vec![2, 4, 6, 8, 10, 10, 10], "round robin gave {:?}", h.cumulative_curve());

    let failing = ScriptedResolver::new()
        .script("seed.ok", vec![Ok(vec![ip(3, 3, 3, 3)]), Ok(vec![ip(3, 3, 3, 3), ip(4, 4, 4, 4)])])
        .script("seed.bad", vec![Err(ResolveErrorKind::ServFail)]);
    let h = harvest_seeds(failing, &source(&["seed.ok", "seed.bad", "seed.gone"]), 3).map_err(|e| e.to_string())?;
    ensure!(h.cumulative_curve() == vec![1, 2, 2], "servfail scenario gave {:?}", h.cumulative_curve());
    let unresolved: Vec<(&str, ResolveErrorKind)> = h.unresolved().into_iter().collect();
    ensure!(
        unresolved == vec![("seed.bad", ResolveErrorKind::ServFail), ("seed.gone", ResolveErrorKind::NxDomain)],
        "unresolved {unresolved:?}"
    );

    let three: BTreeSet<IpAddr> = [ip(5, 0, 0, 1), ip(5, 0, 0, 2), ip(5, 0, 0, 3)].into();
    let prober = ScriptedProber::from_pairs(
        8333,
        [
            (ip(5, 0, 0, 1), ConnectResult::Accepted),
            (ip(5, 0, 0, 2), ConnectResult::Refused),
            (ip(5, 0, 0, 3), ConnectResult::TimedOut),
        ],
    );
    let s = probe_ports(&prober, &three, 8333, 4).summary;
    ensure!((s.open, s.filtered, s.closed, s.total) == (1, 1, 1, 3), "three-host summary {s:?}");
    let s = probe_ports(&prober, &three, 18333, 4).summary;
    ensure!((s.open, s.filtered, s.closed) == (0, 3, 0), "other port summary {s:?}");

    let ten: BTreeSet<IpAddr> = (1..=10).map(|d| ip(6, 0, 0, d)).collect();
    let prober = ScriptedProber::from_pairs(
        8333,
        (1..=4).map(|d| (ip(6, 0, 0, d), ConnectResult::Accepted)).chain([(ip(6, 0, 0, 10), ConnectResult::Refused)]),
    );
    let s = probe_ports(&prober, &ten, 8333, 3).summary;
    ensure!((s.open, s.filtered, s.closed) == (4, 5, 1), "ten-host summary {s:?}");
    ensure!((s.open_pct, s.filtered_pct, s.closed_pct) == (40.0, 50.0, 10.0), "percentages {s:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for scenario in 0..100 {
        let names: Vec<String> = (0..rng.gen_range(1..5)).map(|i| format!("seed{i}.sim")).collect();
        let params = SimDnsParams {
            pool_size: rng.gen_range(1..60),
            per_query: rng.gen_range(1..12),
            selection: if rng.gen_bool(0.5) { Selection::Random } else { Selection::RoundRobin },
            servfail_rate: rng.gen_range(0.0..0.5),
            ptr_rate: 0.5,
            seed: rng.gen(),
        };
        let pool_total = params.pool_size * names.len();
        let rounds = rng.gen_range(1..20);
        let resolver = SimResolver::new(&names, params);
        let src = SeedSource { port: 8333, hardcoded: vec![ip(9, 9, 9, 9)], dns: names };
        let h = harvest_seeds(resolver, &src, rounds).map_err(|e| e.to_string())?;
        let curve = h.cumulative_curve();
        ensure!(curve.len() == rounds, "scenario {scenario}: {} rounds", curve.len());
        ensure!(curve.windows(2).all(|w| w[0] <= w[1]), "scenario {scenario}: curve {curve:?} decreases");
        let added: usize = h.rounds.iter().map(|r| r.new_ips).sum();
        ensure!(added == *curve.last().unwrap(), "scenario {scenario}: new_ips do not add up");
        ensure!(*curve.last().unwrap() <= pool_total, "scenario {scenario}: more addresses than pools hold");
        ensure!(h.all_ips.len() == curve.last().unwrap() + 1, "scenario {scenario}: hard-coded seed not merged");
    }
    Ok("curves [2,2,2] and [2,4,6,8,10,10,10]; summaries (1,1,1) and (4,5,1); 100 simulated curves nondecreasing".into())
}

fn c13_ingestion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..50 {
        let n = rng.gen_range(1..40);
        let mut t = 1_400_000_000u64;
        let mut times = Vec::new();
        let mut values: Vec<Vec<u64>> = Vec::new();
        let mut f = Fixture::new(ChainKind::Ethereum);
        for h in 0..n {
            t += rng.gen_range(1..5_000_000);
            times.push(t);
            f.block(h, t, json!({}));
            let txs: Vec<u64> = (0..rng.gen_range(0..5)).map(|_| rng.gen_range(0..1_000_000_000)).collect();
            for (i, v) in txs.iter().enumerate() {
                f.tx(h, i as u64, json!({"value": v.to_string(), "from": addr(i as u64 + 1)}));
            }
            values.push(txs);
        }

        let (_a, once) = temp_store();
        let (_b, twice) = temp_store();
        f.ingest(&once);
        f.ingest(&twice);
        let again = f.ingest(&twice);
        ensure!(again.blocks_loaded + again.txs_loaded == 0, "chain {case}: second ingest loaded records");
        ensure!(once.dump().unwrap() == twice.dump().unwrap(), "chain {case}: double ingest differs");

        let mut cutoffs: Vec<u64> = (0..4).map(|_| times[rng.gen_range(0..times.len())] + rng.gen_range(1..100)).collect();
        cutoffs.sort();
        let mut last = (0u64, 0u64);
        for c in cutoffs {
            let h = apply_cutoff(&once, ChainKind::Ethereum, c).map_err(|e| e.to_string())?;
            let s = summarize_chain(&once, ChainKind::Ethereum, Some(h)).map_err(|e| e.to_string())?;
            ensure!(h >= last.0 && s.tx_count >= last.1, "chain {case}: cutoff {c} not monotone");
            last = (h, s.tx_count);
            let upto = &values[..=h as usize];
            let count: usize = upto.iter().map(Vec::len).sum();
            let volume: u128 = upto.iter().flatten().map(|v| u128::from(*v)).sum();
            ensure!(s.tx_count == count as u64 && s.tx_volume == volume, "chain {case}: summary not conserved");
            ensure!(s.block_count == h + 1, "chain {case}: block count");
        }
        let monthly: u64 = monthly_tx_counts(&once, ChainKind::Ethereum, None)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|m| m.1)
            .sum();
        let total: u64 = values.iter().map(|v| v.len() as u64).sum();
        ensure!(monthly == total, "chain {case}: monthly counts sum to {monthly}, not {total}");
    }
    Ok("50 random chains: idempotent, monotone cutoffs, conserved summaries".into())
}
