use std::collections::{BTreeMap, HashMap};
use std::net::IpAddr;

use ipnet::IpNet;

use super::{ReportError, Table};
use crate::chain::{WeeklyFeeRow, COIN};
use crate::period::IsoWeek;

pub const UNKNOWN_COUNTRY: &str = "??";

fn csv_rows(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// USD per whole coin, keyed by ISO week.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateTable(pub BTreeMap<IsoWeek, f64>);

impl RateTable {
    /// Parses `week,usd` rows (`2015-W15,0.42`); a leading `week,usd` header
    /// is skipped.
    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut rates = BTreeMap::new();
        for record in csv_rows(text).records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if line == 1 && record.get(0) == Some("week") {
                continue;
            }
            let bad = || ReportError::MalformedRateRow(line);
            if record.len() != 2 {
                return Err(bad());
            }
            let week: IsoWeek = record[0].parse().map_err(|_| bad())?;
            let usd: f64 = record[1].parse().map_err(|_| bad())?;
            if !usd.is_finite() || usd < 0.0 {
                return Err(bad());
            }
            rates.insert(week, usd);
        }
        Ok(RateTable(rates))
    }
}

/// Exact decimal rendering of an amount in 10^-8 units.
pub fn format_coins(units: u64) -> String {
    format!("{}.{:08}", units / COIN, units % COIN)
}

/// Weekly fee rows with a USD column; weeks without a rate get an empty cell.
pub fn join_usd(rows: &[WeeklyFeeRow], rates: &RateTable) -> Table {
    let mut table = Table::new(["week", "kind", "paid_fee", "fee_coins", "usd"]);
    for row in rows {
        let usd = rates
            .0
            .get(&row.week)
            .map(|rate| (row.paid_fee as f64 / COIN as f64 * rate).to_string())
            .unwrap_or_default();
        table.push([
            row.week.to_string(),
            row.kind.to_string(),
            row.paid_fee.to_string(),
            format_coins(row.paid_fee),
            usd,
        ]);
    }
    table
}

/// Address-to-country rules matched by longest prefix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeoTable(pub Vec<(IpNet, String)>);

impl GeoTable {
    /// Parses `cidr_or_ip,country` rows; a bare address is a host route.
    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut rules = Vec::new();
        for record in csv_rows(text).records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if line == 1 && matches!(record.get(0), Some("cidr" | "ip" | "network")) {
                continue;
            }
            let bad = || ReportError::MalformedGeoRow(line);
            if record.len() != 2 || record[1].is_empty() {
                return Err(bad());
            }
            let net = match record[0].parse::<IpNet>() {
                Ok(net) => net.trunc(),
                Err(_) => IpNet::from(record[0].parse::<IpAddr>().map_err(|_| bad())?),
            };
            rules.push((net, record[1].to_string()));
        }
        Ok(GeoTable(rules))
    }

    pub fn lookup(&self, ip: IpAddr) -> Option<&str> {
        self.0
            .iter()
            .filter(|(net, _)| net.contains(&ip))
            .max_by_key(|(net, _)| net.prefix_len())
            .map(|(_, c)| c.as_str())
    }
}

/// Per-country address counts, largest first (ties by country code).
/// Unmatched addresses are counted under `??`.
pub fn join_country(ips: impl IntoIterator<Item = IpAddr>, geo: &GeoTable) -> Vec<(String, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for ip in ips {
        let country = geo.lookup(ip).unwrap_or(UNKNOWN_COUNTRY);
        *counts.entry(country.to_string()).or_default() += 1;
    }
    let mut rows: Vec<(String, u64)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NameOpKind;

    fn ip(s: &str) -> IpAddr {
        s.parse().unwrap()
    }

    #[test]
    fn usd_join() {
        let week: IsoWeek = "2015-W15".parse().unwrap();
        let rows = vec![
            WeeklyFeeRow { week, kind: NameOpKind::FirstUpdate, paid_fee: 2 * COIN },
            WeeklyFeeRow { week: "2015-W16".parse().unwrap(), kind: NameOpKind::New, paid_fee: 1_000_000 },
        ];
        let rates = RateTable::parse("week,usd\n2015-W15,0.5\n").unwrap();
        let t = join_usd(&rows, &rates);
        assert_eq!(t.rows[0], ["2015-W15", "name_firstupdate", "200000000", "2.00000000", "1"]);
        assert_eq!(t.rows[1][4], "");
        assert!(matches!(RateTable::parse("2015-W15,abc\n"), Err(ReportError::MalformedRateRow(1))));
        assert!(matches!(RateTable::parse("2015-W15,1\n2015-15,1\n"), Err(ReportError::MalformedRateRow(2))));
    }

    #[test]
    fn country_join_longest_prefix() {
        let geo = GeoTable::parse("cidr,country\n10.0.0.0/8,US\n10.1.2.0/24,DE\n192.0.2.9,FR\n").unwrap();
        let rows = join_country(
            [ip("10.1.2.3"), ip("10.1.2.4"), ip("10.1.2.5"), ip("10.9.9.9"), ip("203.0.113.1"), ip("192.0.2.9")],
            &geo,
        );
        assert_eq!(
            rows,
            vec![("DE".into(), 3), ("??".into(), 1), ("FR".into(), 1), ("US".into(), 1)]
        );
        assert!(matches!(GeoTable::parse("not-an-ip,DE\n"), Err(ReportError::MalformedGeoRow(1))));
    }
}
