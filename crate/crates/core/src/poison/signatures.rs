use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use super::PoisonError;

const DEFAULT_TABLE: &str = include_str!("../../data/signatures.csv");

/// Number of leading payload bytes compared by default.
pub const DEFAULT_PREFIX_BYTES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignatureEntry {
    pub format_name: String,
    #[serde(with = "hex::serde")]
    pub magic: Vec<u8>,
    pub offset: usize,
    pub extension: String,
}

impl SignatureEntry {
    /// Compares the first `min(|magic|, prefix_bytes)` magic bytes at the
    /// entry's offset.
    pub fn matches_prefix(&self, payload: &[u8], prefix_bytes: usize) -> bool {
        let n = self.magic.len().min(prefix_bytes);
        payload.get(self.offset..self.offset + n).is_some_and(|window| window == &self.magic[..n])
    }

    pub fn matches_full(&self, payload: &[u8]) -> bool {
        self.matches_prefix(payload, self.magic.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureDb {
    entries: Vec<SignatureEntry>,
    pub match_prefix_bytes: usize,
}

impl Default for SignatureDb {
    fn default() -> Self {
        SignatureDb::parse(DEFAULT_TABLE).expect("bundled signature table is valid")
    }
}

impl SignatureDb {
    /// Parses `format,magic_hex,offset,extension` rows. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, PoisonError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for record in reader.records() {
            let record = record.map_err(|e| PoisonError::BadSignatureLine {
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |reason: &str| PoisonError::BadSignatureLine { line, reason: reason.to_string() };
            if record.len() != 4 {
                return Err(bad("expected 4 fields: format,magic_hex,offset,extension"));
            }
            let format_name = record[0].to_string();
            if format_name.is_empty() {
                return Err(bad("empty format name"));
            }
            let magic = crate::primitives::decode_hex(&record[1]).map_err(|e| bad(&format!("magic: {e}")))?;
            if magic.is_empty() || magic.len() > 16 {
                return Err(bad("magic must be 1 to 16 bytes"));
            }
            let offset: usize = record[2].parse().map_err(|_| bad("offset is not a non-negative integer"))?;
            if !seen.insert((magic.clone(), offset)) {
                return Err(bad("duplicate magic at the same offset"));
            }
            entries.push(SignatureEntry { format_name, magic, offset, extension: record[3].to_string() });
        }
        if entries.is_empty() {
            return Err(PoisonError::EmptyDb);
        }
        Ok(SignatureDb { entries, match_prefix_bytes: DEFAULT_PREFIX_BYTES })
    }

    pub fn from_path(path: &Path) -> Result<Self, PoisonError> {
        SignatureDb::parse(&std::fs::read_to_string(path)?)
    }

    pub fn with_prefix_bytes(mut self, n: usize) -> Self {
        self.match_prefix_bytes = n;
        self
    }

    pub fn entries(&self) -> &[SignatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn longest_magic(&self) -> usize {
        self.entries.iter().map(|e| e.magic.len()).max().unwrap_or(0)
    }

    pub fn get(&self, format_name: &str) -> Option<&SignatureEntry> {
        self.entries.iter().find(|e| e.format_name == format_name)
    }
}

/// Names of all entries whose magic prefix matches, in table order.
pub fn match_signatures<'a>(payload: &[u8], db: &'a SignatureDb) -> Vec<&'a str> {
    matching_entries(payload, db).map(|e| e.format_name.as_str()).collect()
}

pub(crate) fn matching_entries<'a, 'p>(
    payload: &'p [u8],
    db: &'a SignatureDb,
) -> impl Iterator<Item = &'a SignatureEntry> + 'p
where
    'a: 'p,
{
    let n = db.match_prefix_bytes;
    db.entries.iter().filter(move |e| e.matches_prefix(payload, n))
}
