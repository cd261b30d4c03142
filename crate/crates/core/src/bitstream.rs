// SPDX-License-Identifier: Apache-2.0

//! Symbol extraction, bit packing and the two light post-processing
//! correctors.
//!
//! Bits are carried as `u8` values `0`/`1`. Ordering is fixed: a symbol's
//! least-significant bit comes first, and packing fills each byte from its
//! least-significant bit. Trailing partial data (an odd bit before a pair
//! operation) is dropped, never padded.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Random symbol carried by effective code `m`: `m mod 2^m_bits`.
pub fn extract_symbol(m: u32, m_bits: u32) -> u32 {
    m & ((1u32 << m_bits) - 1)
}

/// Expand symbols into bits, LSB first.
pub fn symbols_to_bits<I>(symbols: I, m_bits: u32) -> Vec<u8>
where
    I: IntoIterator<Item = u32>,
{
    let symbols = symbols.into_iter();
    let mut bits = Vec::with_capacity(symbols.size_hint().0 * m_bits as usize);
    for s in symbols {
        for b in 0..m_bits {
            bits.push(((s >> b) & 1) as u8);
        }
    }
    bits
}

/// Packed symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitBuffer {
    pub bytes: Vec<u8>,
    pub bit_count: usize,
    pub symbol_width: u32,
}

impl BitBuffer {
    /// Wrap whole bytes as a bit buffer of `symbol_width` 1.
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_count = bytes.len() * 8;
        BitBuffer {
            bytes,
            bit_count,
            symbol_width: 1,
        }
    }

    pub fn bit(&self, i: usize) -> u8 {
        (self.bytes[i / 8] >> (i % 8)) & 1
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.bit_count).map(|i| self.bit(i)).collect()
    }

    /// Inverse of [`pack`].
    pub fn symbols(&self) -> Vec<u32> {
        let w = self.symbol_width as usize;
        (0..self.bit_count / w)
            .map(|s| (0..w).fold(0u32, |acc, b| acc | (u32::from(self.bit(s * w + b)) << b)))
            .collect()
    }
}

/// Pack symbols LSB-first: the first symbol lands in the low bits of the
/// first byte.
pub fn pack(symbols: &[u32], m_bits: u32) -> BitBuffer {
    let bits = symbols_to_bits(symbols.iter().copied(), m_bits);
    let mut buf = pack_bits(&bits);
    buf.symbol_width = m_bits;
    buf
}

/// Pack a bit sequence, LSB-first within each byte.
pub fn pack_bits(bits: &[u8]) -> BitBuffer {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        bytes[i / 8] |= (b & 1) << (i % 8);
    }
    BitBuffer {
        bytes,
        bit_count: bits.len(),
        symbol_width: 1,
    }
}

/// Unpack whole bytes, LSB first.
pub fn unpack_bytes(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).map(move |i| (byte >> i) & 1))
        .collect()
}

/// Von Neumann corrector over non-overlapping pairs: `01 → 0`, `10 → 1`,
/// equal pairs discarded.
pub fn von_neumann(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() / 4);
    PostProcessor::new(PostMode::VonNeumann).feed(bits, &mut out);
    out
}

/// XOR of non-overlapping pairs; halves the rate.
pub fn xor_decimate(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() / 2);
    PostProcessor::new(PostMode::Xor).feed(bits, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostMode {
    #[default]
    None,
    #[serde(rename = "vn")]
    VonNeumann,
    Xor,
}

impl FromStr for PostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "raw" => Ok(PostMode::None),
            "vn" | "von_neumann" | "vonneumann" => Ok(PostMode::VonNeumann),
            "xor" => Ok(PostMode::Xor),
            other => Err(format!(
                "unknown post-processing mode `{other}` (none|vn|xor)"
            )),
        }
    }
}

impl fmt::Display for PostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PostMode::None => "none",
            PostMode::VonNeumann => "vn",
            PostMode::Xor => "xor",
        })
    }
}

/// Streaming form of the correctors. A bit left over at the end of one chunk
/// is paired with the first bit of the next.
#[derive(Debug, Clone, Default)]
pub struct PostProcessor {
    mode: PostMode,
    pending: Option<u8>,
}

impl PostProcessor {
    pub fn new(mode: PostMode) -> Self {
        PostProcessor {
            mode,
            pending: None,
        }
    }

    pub fn mode(&self) -> PostMode {
        self.mode
    }

    pub fn feed(&mut self, bits: &[u8], out: &mut Vec<u8>) {
        if self.mode == PostMode::None {
            out.extend_from_slice(bits);
            return;
        }
        for &b in bits {
            let Some(first) = self.pending.take() else {
                self.pending = Some(b);
                continue;
            };
            match self.mode {
                PostMode::VonNeumann => {
                    if first != b {
                        out.push(first);
                    }
                }
                PostMode::Xor => out.push(first ^ b),
                PostMode::None => unreachable!(),
            }
        }
    }

    /// Drop any half pair.
    pub fn reset(&mut self) {
        self.pending = None;
    }
}

/// Debug dump: one line of `0`/`1` characters per `width` bits.
pub fn write_bits_text<W: Write>(bits: &[u8], width: usize, mut out: W) -> io::Result<()> {
    for line in bits.chunks(width.max(1)) {
        let s: String = line
            .iter()
            .map(|&b| if b == 0 { '0' } else { '1' })
            .collect();
        writeln!(out, "{s}")?;
    }
    Ok(())
}
