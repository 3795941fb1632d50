//! Ethereum ledger analytics.

mod address;
mod classify;
mod levenshtein;
mod lifecycle;
mod probe;
mod registry;
pub mod rpc;
mod selector;
mod similarity;

pub use address::derive_contract_address;
pub use classify::{classify_transaction, monthly_class_counts, ClassCounts, TxClass};
pub use levenshtein::{levenshtein, EditDistance};
pub use lifecycle::{
    find_precreation_funding, lifetime_histogram, zombie_report, LifetimeBucket, PrecreationFunding, ZombieEntry,
    ZombieReport, DEFAULT_LIFETIME_EDGES,
};
pub use probe::{
    classify_refund, probe_suicidal, ContractExecutor, ExecutorError, FixtureExecutor, GasPolicy, Invocation,
    ProbeBatch, ProbeFailure, ProbeResult, RefundDestination,
};
pub use registry::{
    build_contract_registry, build_registry_from_store, parse_side_records, scan_creations, ContractRecord,
    ContractRegistry, CreatorKind, Creation, FixtureRefund, RegistryError, SideRecord,
};
pub use selector::{function_selector, DictionaryEntry, DictionaryError, Selector, SelectorDictionary};
pub use similarity::{
    bucket_similarity, parse_references, Band, ReferenceContract, ReferenceParseError, SimilarityBuckets,
    SimilarityRow,
};
