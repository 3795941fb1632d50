//! Recursive Length Prefix encoding, as used for contract addresses and
//! discovery packets.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Bytes(Vec<u8>),
    List(Vec<Item>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("input ended early")]
    Truncated,
    #[error("non-canonical length prefix")]
    NonCanonical,
    #[error("{0} trailing bytes after item")]
    Trailing(usize),
    #[error("expected {0}")]
    Unexpected(&'static str),
}

impl Item {
    pub fn bytes(b: impl Into<Vec<u8>>) -> Self {
        Item::Bytes(b.into())
    }

    /// Minimal big-endian encoding; zero is the empty string.
    pub fn uint(v: u64) -> Self {
        let be = v.to_be_bytes();
        let skip = be.iter().take_while(|b| **b == 0).count();
        Item::Bytes(be[skip..].to_vec())
    }

    pub fn as_bytes(&self) -> Result<&[u8], DecodeError> {
        match self {
            Item::Bytes(b) => Ok(b),
            Item::List(_) => Err(DecodeError::Unexpected("byte string")),
        }
    }

    pub fn as_list(&self) -> Result<&[Item], DecodeError> {
        match self {
            Item::List(l) => Ok(l),
            Item::Bytes(_) => Err(DecodeError::Unexpected("list")),
        }
    }

    pub fn as_u64(&self) -> Result<u64, DecodeError> {
        let b = self.as_bytes()?;
        if b.len() > 8 {
            return Err(DecodeError::Unexpected("integer of at most 8 bytes"));
        }
        Ok(b.iter().fold(0u64, |acc, x| (acc << 8) | u64::from(*x)))
    }
}

fn length_prefix(out: &mut Vec<u8>, len: usize, short_base: u8, long_base: u8) {
    if len < 56 {
        out.push(short_base + len as u8);
    } else {
        let be = (len as u64).to_be_bytes();
        let skip = be.iter().take_while(|b| **b == 0).count();
        out.push(long_base + (8 - skip) as u8);
        out.extend_from_slice(&be[skip..]);
    }
}

pub fn encode(item: &Item) -> Vec<u8> {
    let mut out = Vec::new();
    encode_into(item, &mut out);
    out
}

fn encode_into(item: &Item, out: &mut Vec<u8>) {
    match item {
        Item::Bytes(b) if b.len() == 1 && b[0] < 0x80 => out.push(b[0]),
        Item::Bytes(b) => {
            length_prefix(out, b.len(), 0x80, 0xb7);
            out.extend_from_slice(b);
        }
        Item::List(items) => {
            let mut body = Vec::new();
            for it in items {
                encode_into(it, &mut body);
            }
            length_prefix(out, body.len(), 0xc0, 0xf7);
            out.extend_from_slice(&body);
        }
    }
}

/// Decodes exactly one item spanning the whole input.
pub fn decode(input: &[u8]) -> Result<Item, DecodeError> {
    let (item, used) = decode_prefix(input)?;
    if used != input.len() {
        return Err(DecodeError::Trailing(input.len() - used));
    }
    Ok(item)
}

/// Decodes one item from the front of `input`, returning it with the number
/// of bytes consumed.
pub fn decode_prefix(input: &[u8]) -> Result<(Item, usize), DecodeError> {
    let first = *input.first().ok_or(DecodeError::Truncated)?;
    let (is_list, header, len) = match first {
        0x00..=0x7f => return Ok((Item::Bytes(vec![first]), 1)),
        0x80..=0xb7 => (false, 1, usize::from(first - 0x80)),
        0xb8..=0xbf => {
            let n = usize::from(first - 0xb7);
            (false, 1 + n, read_len(&input[1..], n)?)
        }
        0xc0..=0xf7 => (true, 1, usize::from(first - 0xc0)),
        0xf8..=0xff => {
            let n = usize::from(first - 0xf7);
            (true, 1 + n, read_len(&input[1..], n)?)
        }
    };
    let end = header.checked_add(len).ok_or(DecodeError::Truncated)?;
    let body = input.get(header..end).ok_or(DecodeError::Truncated)?;
    if !is_list {
        if first == 0x81 && body[0] < 0x80 {
            return Err(DecodeError::NonCanonical);
        }
        return Ok((Item::Bytes(body.to_vec()), end));
    }
    let mut items = Vec::new();
    let mut rest = body;
    while !rest.is_empty() {
        let (it, used) = decode_prefix(rest)?;
        items.push(it);
        rest = &rest[used..];
    }
    Ok((Item::List(items), end))
}

fn read_len(input: &[u8], n: usize) -> Result<usize, DecodeError> {
    let bytes = input.get(..n).ok_or(DecodeError::Truncated)?;
    if bytes.first() == Some(&0) {
        return Err(DecodeError::NonCanonical);
    }
    let len = bytes.iter().fold(0usize, |acc, b| (acc << 8) | usize::from(*b));
    if len < 56 {
        return Err(DecodeError::NonCanonical);
    }
    Ok(len)
}
