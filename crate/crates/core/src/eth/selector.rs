use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::primitives::{decode_hex, keccak256, ParseHexError};

/// 4-byte function selector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Selector(pub [u8; 4]);

/// First four bytes of the Keccak-256 of a canonical signature such as `kill()`.
pub fn function_selector(signature: &str) -> Selector {
    let h = keccak256(signature.as_bytes());
    Selector([h[0], h[1], h[2], h[3]])
}

impl FromStr for Selector {
    type Err = ParseHexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = decode_hex(s)?;
        let arr: [u8; 4] = b
            .as_slice()
            .try_into()
            .map_err(|_| ParseHexError::Length { expected: 4, got: b.len() })?;
        Ok(Selector(arr))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Selector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DictionaryEntry {
    pub selector: Selector,
    /// Source signature, when known.
    pub signature: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DictionaryError {
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("selector {0} listed twice")]
    Duplicate(Selector),
    #[error("dictionary is empty")]
    Empty,
}

/// Ordered list of selectors tried against each contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorDictionary {
    entries: Vec<DictionaryEntry>,
}

const DEFAULT_DICTIONARY: &str = include_str!("../../data/selectors.csv");

impl Default for SelectorDictionary {
    fn default() -> Self {
        Self::parse(DEFAULT_DICTIONARY).expect("bundled dictionary is valid")
    }
}

impl SelectorDictionary {
    pub fn new(entries: Vec<DictionaryEntry>) -> Result<Self, DictionaryError> {
        if entries.is_empty() {
            return Err(DictionaryError::Empty);
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.selector) {
                return Err(DictionaryError::Duplicate(e.selector));
            }
        }
        Ok(SelectorDictionary { entries })
    }

    /// Parses `selector,signature` lines; `#` starts a comment line. Either
    /// column may be blank, but not both. A bare `name()` line is also accepted.
    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| DictionaryError::BadLine { line: i + 1, reason };
            let (sel, sig) = match line.split_once(',') {
                Some((a, b)) => (a.trim(), b.trim()),
                None if line.contains('(') => ("", line),
                None => (line, ""),
            };
            let signature = (!sig.is_empty()).then(|| sig.to_string());
            let selector = match (sel.is_empty(), &signature) {
                (true, None) => return Err(bad("neither selector nor signature".into())),
                (true, Some(s)) => function_selector(s),
                (false, _) => sel.parse().map_err(|e| bad(format!("bad selector {sel:?}: {e}")))?,
            };
            if let Some(s) = &signature {
                if function_selector(s) != selector {
                    return Err(bad(format!("selector {selector} does not match {s}")));
                }
            }
            entries.push(DictionaryEntry { selector, signature });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name_of(&self, selector: &Selector) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.selector == *selector)
            .and_then(|e| e.signature.as_deref())
    }
}
