//! Canonical Huffman compression of the secret payload.
//!
//! Container layout, all integers big-endian:
//!
//! ```text
//! "HUF1" | original_len u32 | symbol_count u16 | (symbol u8, length u8) * symbol_count | bitstream
//! ```
//!
//! Only code lengths are stored; codewords are re-derived canonically
//! (length ascending, then symbol ascending) on both sides.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::bitio::{BitReader, BitWriter};

pub const MAGIC: &[u8; 4] = b"HUF1";
const HEADER_LEN: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HuffmanError {
    #[error("no symbols to code")]
    EmptyInput,
    #[error("input of {0} bytes exceeds the 32-bit length field")]
    TooLarge(usize),
    #[error("bad container magic")]
    BadMagic,
    #[error("corrupt code table: {0}")]
    CorruptTable(&'static str),
    #[error("bitstream ended after {decoded} of {expected} symbols")]
    Truncated { decoded: u32, expected: u32 },
    #[error("bitstream contains a bit sequence that is not a codeword")]
    InvalidCode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    pub counts: [u64; 256],
}

impl FrequencyTable {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

pub fn build_frequency_table(data: &[u8]) -> FrequencyTable {
    let mut counts = [0u64; 256];
    for &b in data {
        counts[b as usize] += 1;
    }
    FrequencyTable { counts }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    /// Code length per byte value; 0 means absent.
    pub lengths: [u8; 256],
    /// Canonical codeword per byte value, right-aligned.
    pub codes: [u64; 256],
}

impl CodeTable {
    /// Assigns canonical codewords to a set of code lengths.
    pub fn from_lengths(lengths: [u8; 256]) -> Self {
        let mut order: Vec<u8> = (0..=255u8).filter(|&s| lengths[s as usize] > 0).collect();
        order.sort_by_key(|&s| (lengths[s as usize], s));

        let mut codes = [0u64; 256];
        let mut code = 0u64;
        let mut prev_len = order.first().map_or(0, |&s| lengths[s as usize]);
        for &s in &order {
            let len = lengths[s as usize];
            code <<= len - prev_len;
            codes[s as usize] = code;
            code += 1;
            prev_len = len;
        }
        CodeTable { lengths, codes }
    }

    pub fn max_length(&self) -> u8 {
        self.lengths.iter().copied().max().unwrap_or(0)
    }

    /// Number of bitstream bits needed to code input with these frequencies.
    pub fn encoded_bits(&self, freq: &FrequencyTable) -> u64 {
        freq.counts
            .iter()
            .zip(self.lengths.iter())
            .map(|(&c, &l)| c * u64::from(l))
            .sum()
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    weight: u64,
    min_symbol: u8,
    id: usize,
}

/// Builds an optimal prefix code by repeatedly merging the two lightest
/// subtrees. Ties are broken by the smallest symbol each subtree contains.
pub fn build_canonical_codes(freq: &FrequencyTable) -> Result<CodeTable, HuffmanError> {
    let present: Vec<u8> = (0..=255u8).filter(|&s| freq.counts[s as usize] > 0).collect();
    let mut lengths = [0u8; 256];
    match present.len() {
        0 => return Err(HuffmanError::EmptyInput),
        1 => {
            lengths[present[0] as usize] = 1;
            return Ok(CodeTable::from_lengths(lengths));
        }
        _ => {}
    }

    // parent links over an implicit tree: leaves are 0..present.len()
    let mut parent: Vec<usize> = Vec::with_capacity(2 * present.len());
    let mut heap = BinaryHeap::new();
    for (id, &s) in present.iter().enumerate() {
        parent.push(usize::MAX);
        heap.push(Reverse(Node {
            weight: freq.counts[s as usize],
            min_symbol: s,
            id,
        }));
    }
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a.id] = id;
        parent[b.id] = id;
        heap.push(Reverse(Node {
            weight: a.weight + b.weight,
            min_symbol: a.min_symbol.min(b.min_symbol),
            id,
        }));
    }

    for (leaf, &s) in present.iter().enumerate() {
        let mut depth = 0u32;
        let mut n = leaf;
        while parent[n] != usize::MAX {
            n = parent[n];
            depth += 1;
        }
        lengths[s as usize] = u8::try_from(depth).map_err(|_| HuffmanError::CorruptTable("code length exceeds 255"))?;
    }
    Ok(CodeTable::from_lengths(lengths))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffContainer {
    pub original_len: u32,
    /// (symbol, code length) pairs in ascending symbol order.
    pub table: Vec<(u8, u8)>,
    pub bitstream: Vec<u8>,
}

impl HuffContainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 2 * self.table.len() + self.bitstream.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.original_len.to_be_bytes());
        out.extend_from_slice(&(self.table.len() as u16).to_be_bytes());
        for &(sym, len) in &self.table {
            out.push(sym);
            out.push(len);
        }
        out.extend_from_slice(&self.bitstream);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HuffmanError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(HuffmanError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(HuffmanError::CorruptTable("header truncated"));
        }
        let original_len = u32::from_be_bytes(bytes[4..8].try_into().unwrap());
        let symbol_count = u16::from_be_bytes(bytes[8..10].try_into().unwrap()) as usize;
        if symbol_count > 256 {
            return Err(HuffmanError::CorruptTable("more than 256 symbols"));
        }
        let table_end = HEADER_LEN + 2 * symbol_count;
        if bytes.len() < table_end {
            return Err(HuffmanError::CorruptTable("table truncated"));
        }
        let table = bytes[HEADER_LEN..table_end]
            .chunks_exact(2)
            .map(|p| (p[0], p[1]))
            .collect();
        Ok(HuffContainer {
            original_len,
            table,
            bitstream: bytes[table_end..].to_vec(),
        })
    }
}

pub fn huffman_compress(data: &[u8]) -> Result<HuffContainer, HuffmanError> {
    let original_len = u32::try_from(data.len()).map_err(|_| HuffmanError::TooLarge(data.len()))?;
    if data.is_empty() {
        return Ok(HuffContainer {
            original_len: 0,
            table: Vec::new(),
            bitstream: Vec::new(),
        });
    }
    let freq = build_frequency_table(data);
    let codes = build_canonical_codes(&freq)?;
    let table = (0..=255u8)
        .filter(|&s| codes.lengths[s as usize] > 0)
        .map(|s| (s, codes.lengths[s as usize]))
        .collect();

    let mut w = BitWriter::new();
    for &b in data {
        w.write_bits(codes.codes[b as usize], u32::from(codes.lengths[b as usize]));
    }
    Ok(HuffContainer {
        original_len,
        table,
        bitstream: w.into_bytes(),
    })
}

/// Per-length symbol lists for canonical decoding.
struct Decoder {
    counts: Vec<u32>,
    symbols: Vec<u8>,
}

impl Decoder {
    fn new(table: &[(u8, u8)]) -> Result<Self, HuffmanError> {
        let mut seen = [false; 256];
        let mut counts = vec![0u32; 256];
        for &(sym, len) in table {
            if len == 0 {
                return Err(HuffmanError::CorruptTable("zero code length"));
            }
            if std::mem::replace(&mut seen[sym as usize], true) {
                return Err(HuffmanError::CorruptTable("duplicate symbol"));
            }
            counts[len as usize] += 1;
        }
        let max_len = table.iter().map(|&(_, l)| l as usize).max().unwrap_or(0);
        counts.truncate(max_len + 1);

        if table.len() >= 2 {
            // Kraft equality. `left` is the number of unused codewords at the
            // current length; once it exceeds the symbols still to place it
            // can never return to zero, so it stays small.
            let mut left: i64 = 1;
            let mut remaining = table.len() as i64;
            for &c in counts.iter().skip(1) {
                left = 2 * left - i64::from(c);
                remaining -= i64::from(c);
                if left < 0 {
                    return Err(HuffmanError::CorruptTable("oversubscribed code"));
                }
                if left > remaining {
                    return Err(HuffmanError::CorruptTable("incomplete code"));
                }
            }
            if left != 0 {
                return Err(HuffmanError::CorruptTable("incomplete code"));
            }
        }

        let mut sorted: Vec<(u8, u8)> = table.to_vec();
        sorted.sort_by_key(|&(s, l)| (l, s));
        Ok(Decoder {
            counts,
            symbols: sorted.into_iter().map(|(s, _)| s).collect(),
        })
    }

    fn decode_symbol(&self, r: &mut BitReader<'_>) -> Result<Option<u8>, HuffmanError> {
        // offset of the read code from the first canonical code of its length
        let mut offset: u32 = 0;
        let mut index: usize = 0;
        for &count in self.counts.iter().skip(1) {
            match r.read_bit() {
                Ok(bit) => offset |= u32::from(bit),
                Err(_) => return Ok(None),
            }
            if offset < count {
                return Ok(Some(self.symbols[index + offset as usize]));
            }
            index += count as usize;
            offset = (offset - count) << 1;
        }
        Err(HuffmanError::InvalidCode)
    }
}

pub fn huffman_decompress(c: &HuffContainer) -> Result<Vec<u8>, HuffmanError> {
    if c.original_len == 0 {
        return Ok(Vec::new());
    }
    if c.table.is_empty() {
        return Err(HuffmanError::CorruptTable("no symbols for nonempty output"));
    }
    let decoder = Decoder::new(&c.table)?;
    let mut r = BitReader::new(&c.bitstream);
    let mut out = Vec::with_capacity(c.original_len as usize);
    while out.len() < c.original_len as usize {
        match decoder.decode_symbol(&mut r)? {
            Some(sym) => out.push(sym),
            None => {
                return Err(HuffmanError::Truncated {
                    decoded: out.len() as u32,
                    expected: c.original_len,
                })
            }
        }
    }
    Ok(out)
}

/// Compresses straight to container bytes.
pub fn compress_bytes(data: &[u8]) -> Result<Vec<u8>, HuffmanError> {
    Ok(huffman_compress(data)?.to_bytes())
}

pub fn decompress_bytes(bytes: &[u8]) -> Result<Vec<u8>, HuffmanError> {
    huffman_decompress(&HuffContainer::from_bytes(bytes)?)
}
