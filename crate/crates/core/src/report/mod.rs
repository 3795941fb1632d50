//! Tabular report output and the optional rate/geo joins.

mod joins;
mod table;

pub use joins::{format_coins, join_country, join_usd, GeoTable, RateTable, UNKNOWN_COUNTRY};
pub use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("rate table line {0}: expected `week,usd` with an ISO week and a non-negative number")]
    MalformedRateRow(u64),
    #[error("geo table line {0}: expected `cidr_or_ip,country`")]
    MalformedGeoRow(u64),
    #[error("table row {row} has {got} cells, expected {expected}")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
