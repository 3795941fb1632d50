//! Namecoin and Peercoin analytics.

mod fees;
mod namecoin;
mod peercoin;

pub use fees::{expected_fee, FeeSchedule, NetworkFeeCurve, COIN};
pub use namecoin::{
    classify_name_op, detect_reregistrations, merge_mine_split, weekly_fee_sums, Reregistration,
    ReregistrationReport, SplitRow, WeeklyFeeRow,
};
pub use peercoin::{pos_pow_counts, Granularity, Period, PosPowRow};

use crate::model::ChainKind;
use crate::primitives::Hash32;
use crate::store::StoreError;

#[derive(Debug, thiserror::Error)]
pub enum ChainError {
    #[error("no blocks for chain {0} within the requested range")]
    EmptyChain(ChainKind),
    #[error("block {0} is merge-mined before merge mining was activated")]
    AuxPowBeforeActivation(u64),
    #[error("block {0} has no proof-of-stake/proof-of-work tag")]
    MissingProofTag(u64),
    #[error("transaction {tx}: malformed name operation, `{field}` missing")]
    MalformedNameOp { tx: Hash32, field: String },
    #[error("expected a {expected} transaction, got {got}")]
    WrongChain { expected: ChainKind, got: ChainKind },
    #[error(transparent)]
    Store(#[from] StoreError),
}
