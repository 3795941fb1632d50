use std::collections::BTreeMap;
use std::net::IpAddr;
use std::str::FromStr;

use serde::Serialize;

use super::BootstrapError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum HostCategory {
    #[serde(rename = "ResidentialISP")]
    ResidentialIsp,
    Hosted,
    NoPtr,
    Other,
}

impl FromStr for HostCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "residentialisp" | "residential" => Ok(HostCategory::ResidentialIsp),
            "hosted" => Ok(HostCategory::Hosted),
            "noptr" => Ok(HostCategory::NoPtr),
            "other" => Ok(HostCategory::Other),
            _ => Err(format!("unknown category `{s}`")),
        }
    }
}

impl std::fmt::Display for HostCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HostCategory::ResidentialIsp => "ResidentialISP",
            HostCategory::Hosted => "Hosted",
            HostCategory::NoPtr => "NoPtr",
            HostCategory::Other => "Other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Substring,
    Prefix,
    Suffix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RdnsRule {
    pub kind: MatchKind,
    /// Stored lowercased; matching ignores case.
    pub pattern: String,
    pub category: HostCategory,
}

impl RdnsRule {
    pub fn matches(&self, name: &str) -> bool {
        let name = name.trim_end_matches('.').to_ascii_lowercase();
        match self.kind {
            MatchKind::Substring => name.contains(&self.pattern),
            MatchKind::Prefix => name.starts_with(&self.pattern),
            MatchKind::Suffix => name.ends_with(&self.pattern),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RdnsRules(pub Vec<RdnsRule>);

impl RdnsRules {
    /// Parses `match,pattern,category` rows, e.g. `substring,cpe-,ResidentialISP`.
    pub fn parse(text: &str) -> Result<Self, BootstrapError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut rules = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| BootstrapError::RuleLine {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |reason: String| BootstrapError::RuleLine { line, reason };
            if record.len() != 3 {
                return Err(bad("expected 3 fields: match,pattern,category".into()));
            }
            if line == 1 && &record[0] == "match" {
                continue;
            }
            let kind = match record[0].to_ascii_lowercase().as_str() {
                "substring" | "contains" => MatchKind::Substring,
                "prefix" => MatchKind::Prefix,
                "suffix" => MatchKind::Suffix,
                other => return Err(bad(format!("unknown match kind `{other}`"))),
            };
            if record[1].is_empty() {
                return Err(bad("empty pattern".into()));
            }
            let category = record[2].parse().map_err(bad)?;
            rules.push(RdnsRule { kind, pattern: record[1].to_ascii_lowercase(), category });
        }
        Ok(RdnsRules(rules))
    }

    pub fn classify(&self, name: Option<&str>) -> HostCategory {
        match name {
            None => HostCategory::NoPtr,
            Some(n) => self.0.iter().find(|r| r.matches(n)).map_or(HostCategory::Other, |r| r.category),
        }
    }
}

/// First matching rule wins; a missing PTR record yields `NoPtr`.
pub fn classify_rdns(names: &BTreeMap<IpAddr, Option<String>>, rules: &RdnsRules) -> BTreeMap<IpAddr, HostCategory> {
    names.iter().map(|(ip, name)| (*ip, rules.classify(name.as_deref()))).collect()
}
