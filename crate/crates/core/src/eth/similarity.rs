use rayon::prelude::*;
use serde::Serialize;

use super::levenshtein::{levenshtein, EditDistance};
use super::registry::ContractRecord;
use crate::primitives::strip_0x;

/// Distance bands: exact (0), minor (1..=minor_max), heavy (minor_max+1..=heavy_max).
/// Anything above `heavy_max` is discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimilarityBuckets {
    pub minor_max: usize,
    pub heavy_max: usize,
}

impl Default for SimilarityBuckets {
    fn default() -> Self {
        SimilarityBuckets { minor_max: 100, heavy_max: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Exact,
    Minor,
    Heavy,
}

impl SimilarityBuckets {
    pub fn validate(&self) -> Result<(), String> {
        if !(0 < self.minor_max && self.minor_max < self.heavy_max) {
            return Err(format!("bucket bounds must satisfy 0 < {} < {}", self.minor_max, self.heavy_max));
        }
        Ok(())
    }

    pub fn band(&self, d: usize) -> Option<Band> {
        match d {
            0 => Some(Band::Exact),
            d if d <= self.minor_max => Some(Band::Minor),
            d if d <= self.heavy_max => Some(Band::Heavy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceContract {
    pub name: String,
    pub optimized: bool,
    /// Compiled bytecode, hex.
    pub bytecode: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimilarityRow {
    pub reference: String,
    pub optimized: bool,
    /// Compiled size in bytes.
    pub size: usize,
    pub exact: u64,
    pub minor: u64,
    pub heavy: u64,
}

/// Hex text compared case-insensitively and without prefix, so one byte is
/// two characters of distance budget.
fn normalized(hex: &str) -> Vec<u8> {
    strip_0x(hex).to_ascii_lowercase().into_bytes()
}

pub fn bucket_similarity(
    corpus: &[ContractRecord],
    references: &[ReferenceContract],
    buckets: &SimilarityBuckets,
) -> Vec<SimilarityRow> {
    let codes: Vec<Vec<u8>> = corpus.iter().map(|c| normalized(&c.code)).collect();
    references
        .iter()
        .map(|r| {
            let reference = normalized(&r.bytecode);
            let bands: Vec<Option<Band>> = codes
                .par_iter()
                .map(|code| match levenshtein(code, &reference, buckets.heavy_max) {
                    EditDistance::Within(d) => buckets.band(d),
                    EditDistance::OverCutoff => None,
                })
                .collect();
            let count = |b: Band| bands.iter().filter(|x| **x == Some(b)).count() as u64;
            SimilarityRow {
                reference: r.name.clone(),
                optimized: r.optimized,
                size: reference.len() / 2,
                exact: count(Band::Exact),
                minor: count(Band::Minor),
                heavy: count(Band::Heavy),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("reference file line {line}: {reason}")]
pub struct ReferenceParseError {
    pub line: usize,
    pub reason: String,
}

/// Reads `name,optimized,bytecode_hex` rows; a leading `name,...` header is skipped.
pub fn parse_references(text: &str) -> Result<Vec<ReferenceContract>, ReferenceParseError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ReferenceParseError { line: i + 1, reason: e.to_string() })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let bad = |reason: String| ReferenceParseError { line, reason };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", rec.len())));
        }
        if i == 0 && &rec[0] == "name" {
            continue;
        }
        let optimized = match &rec[1] {
            "true" | "1" | "optim" | "yes" => true,
            "false" | "0" | "" | "no" => false,
            other => return Err(bad(format!("bad optimized flag {other:?}"))),
        };
        crate::primitives::decode_hex(&rec[2]).map_err(|e| bad(format!("bytecode: {e}")))?;
        out.push(ReferenceContract { name: rec[0].to_string(), optimized, bytecode: rec[2].to_string() });
    }
    Ok(out)
}
