use std::path::PathBuf;

use chainlens::ChainKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chainlens", version, about = "Ledger forensics and peer-to-peer measurement")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Store directory.
    #[arg(long, global = true)]
    pub db: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Only consider blocks strictly before this RFC 3339 instant.
    #[arg(long, global = true, value_parser = parse_rfc3339)]
    pub cutoff: Option<u64>,
    /// Write run metadata to `<out>.stamp.json`.
    #[arg(long, global = true)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_rfc3339(s: &str) -> Result<u64, String> {
    let t = chrono::DateTime::parse_from_rfc3339(s).map_err(|e| format!("expected RFC 3339 time: {e}"))?;
    u64::try_from(t.timestamp()).map_err(|_| "cut-off must be after 1970".to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load an NDJSON dump of blocks and transactions.
    Ingest {
        #[arg(long)]
        chain: ChainKind,
        #[arg(long)]
        input: PathBuf,
        /// Abort without writing anything on the first invalid line.
        #[arg(long)]
        strict: bool,
    },
    /// Chain summary table.
    Summarize {
        /// Summarize one chain; all non-empty chains otherwise.
        #[arg(long)]
        chain: Option<ChainKind>,
    },
    #[command(subcommand)]
    Report(ReportCmd),
    #[command(subcommand)]
    Eth(EthCmd),
    #[command(subcommand)]
    Nmc(NmcCmd),
    #[command(subcommand)]
    Ppc(PpcCmd),
    #[command(subcommand)]
    Poison(PoisonCmd),
    /// Discovery crawl over a simulated overlay or the live network.
    Crawl(CrawlArgs),
    #[command(subcommand)]
    Bootstrap(BootstrapCmd),
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Transactions per calendar month.
    TxMonthly {
        #[arg(long, default_value = "eth")]
        chain: ChainKind,
    },
}

#[derive(Debug, Args)]
pub struct SideArgs {
    /// NDJSON side file with internal creations, terminations and gas fixtures.
    #[arg(long)]
    pub side: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EthCmd {
    /// Contracts created without code.
    Zombies {
        #[command(flatten)]
        side: SideArgs,
        /// Rows in the largest-balance listing.
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Histogram of contract lifetimes in blocks.
    Lifetimes {
        #[command(flatten)]
        side: SideArgs,
        /// Inclusive bucket upper bounds.
        #[arg(long, value_delimiter = ',', default_values_t = chainlens::eth::DEFAULT_LIFETIME_EDGES)]
        edges: Vec<u64>,
    },
    /// Value sent to contract addresses before their creation.
    Precreation {
        #[command(flatten)]
        side: SideArgs,
    },
    /// Probe live contracts for unprotected termination functions.
    Probe {
        #[command(flatten)]
        side: SideArgs,
        /// JSON-RPC endpoint of a private chain copy; gas fixtures from --side otherwise.
        #[arg(long)]
        rpc: Option<String>,
        /// Unlocked account used as caller.
        #[arg(long, default_value = "0x00000000000000000000000000000000000000ca")]
        caller: String,
        /// Selector dictionary CSV (`selector,signature`).
        #[arg(long)]
        dictionary: Option<PathBuf>,
    },
    /// Edit-distance bands between contract code and reference bytecodes.
    Similarity {
        #[command(flatten)]
        side: SideArgs,
        /// CSV `name,optimized,bytecode`.
        #[arg(long)]
        references: PathBuf,
        #[arg(long, default_value_t = 100)]
        minor_max: usize,
        #[arg(long, default_value_t = 1000)]
        heavy_max: usize,
    },
    /// Transaction classes per month.
    Classify {
        #[command(flatten)]
        side: SideArgs,
        /// One row per transaction instead of monthly counts.
        #[arg(long)]
        per_tx: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum NmcCmd {
    /// Weekly sums of paid name-operation fees.
    Fees {
        /// CSV `week,usd` adding a USD column.
        #[arg(long)]
        rates: Option<PathBuf>,
    },
    /// Activity split between normally mined and merge-mined blocks.
    Mergemine,
    /// Re-registrations of expired names on one day.
    Rereg {
        #[arg(long)]
        day: chrono::NaiveDate,
        #[arg(long, default_value_t = 36_000)]
        expiry_blocks: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Granularity {
    Month,
    Week,
}

#[derive(Debug, Subcommand)]
pub enum PpcCmd {
    /// Proof-of-stake and proof-of-work block counts per period.
    PosPow {
        #[arg(long, value_enum, default_value_t = Granularity::Month)]
        by: Granularity,
    },
}

#[derive(Debug, Subcommand)]
pub enum PoisonCmd {
    /// Scan transaction inputs for embedded file signatures.
    Scan {
        #[arg(long, default_value = "eth")]
        chain: ChainKind,
        /// Signature CSV (`format,magic_hex,offset,extension`); bundled table otherwise.
        #[arg(long)]
        signatures: Option<PathBuf>,
        /// Write candidate payloads into this directory.
        #[arg(long)]
        extract: Option<PathBuf>,
        #[arg(long, default_value_t = chainlens::poison::DEFAULT_PREFIX_BYTES)]
        prefix_bytes: usize,
        /// Keep only rows whose full magic matched.
        #[arg(long)]
        verified_only: bool,
    },
}

#[derive(Debug, Args)]
pub struct CrawlArgs {
    /// Topology JSON for the simulated overlay.
    #[arg(long, conflicts_with = "live", required_unless_present = "live")]
    pub sim: Option<PathBuf>,
    #[arg(long, requires = "bootnodes")]
    pub live: bool,
    /// File of enode URLs, one per line.
    #[arg(long)]
    pub bootnodes: Option<PathBuf>,
    #[arg(long, default_value_t = 13)]
    pub prefix_bits: u32,
    #[arg(long, default_value_t = 500)]
    pub max_inflight: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of simulated peers used as crawl seeds.
    #[arg(long, default_value_t = 3)]
    pub sim_seeds: usize,
    /// Local UDP address for the live transport.
    #[arg(long, default_value = "0.0.0.0:0")]
    pub bind: std::net::SocketAddr,
    #[arg(long, default_value_t = 500)]
    pub timeout_ms: u64,
    /// CSV `cidr_or_ip,country`; adds a per-country count of crawled addresses.
    #[arg(long)]
    pub geo: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Seed source JSON `{"port":N,"hardcoded":[..],"dns":[..]}`.
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Query real DNS and connect to real hosts.
    #[arg(long)]
    pub live: bool,
    /// Simulation parameters JSON `{"dns":{..},"prober":{..}}`.
    #[arg(long, conflicts_with = "live")]
    pub sim: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    pub timeout_ms: u64,
}

#[derive(Debug, Subcommand)]
pub enum BootstrapCmd {
    /// Resolve DNS seeds repeatedly and track address growth.
    Harvest {
        #[command(flatten)]
        source: SourceArgs,
        /// CSV `match,pattern,category` classifying reverse DNS names.
        #[arg(long)]
        rdns_rules: Option<PathBuf>,
    },
    /// Harvest, then test the network port on every address.
    Probe {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 64)]
        concurrency: usize,
    },
}
