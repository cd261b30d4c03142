// SPDX-License-Identifier: Apache-2.0

//! Wire format: `7E | cmd | len (u16 LE) | payload | crc (u16 BE)`, where
//! the CRC is CRC-16/CCITT-FALSE over cmd, len and payload.

use crc::{Crc, CRC_16_IBM_3740};
use thiserror::Error;

pub const SOF: u8 = 0x7E;
pub const MAX_PAYLOAD: usize = 4096;
/// Frame bytes that are not payload.
pub const OVERHEAD: usize = 6;

const CCITT_FALSE: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

pub fn crc16(data: &[u8]) -> u16 {
    CCITT_FALSE.checksum(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("CRC mismatch: frame says {found:#06x}, computed {computed:#06x}")]
    BadCrc { found: u16, computed: u16 },
    #[error("payload length {0} exceeds {MAX_PAYLOAD}")]
    BadLength(usize),
    #[error("truncated frame: have {got} of {needed} octets")]
    Truncated { needed: usize, got: usize },
    #[error("expected start-of-frame 0x7e, found {0:#04x}")]
    NoStart(u8),
    #[error("{0} trailing octets after frame")]
    Trailing(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub cmd: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(cmd: u8, payload: impl Into<Vec<u8>>) -> Result<Self, FrameError> {
        let payload = payload.into();
        if payload.len() > MAX_PAYLOAD {
            return Err(FrameError::BadLength(payload.len()));
        }
        Ok(Frame { cmd, payload })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload.len() + OVERHEAD);
        out.push(SOF);
        out.push(self.cmd);
        out.extend_from_slice(&(self.payload.len() as u16).to_le_bytes());
        out.extend_from_slice(&self.payload);
        let crc = crc16(&out[1..]);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }
}

pub fn encode_frame(cmd: u8, payload: &[u8]) -> Result<Vec<u8>, FrameError> {
    Ok(Frame::new(cmd, payload)?.encode())
}

/// Parse the first frame in `bytes`, returning it and the octets consumed.
fn parse(bytes: &[u8]) -> Result<(Frame, usize), FrameError> {
    match bytes.first() {
        None => {
            return Err(FrameError::Truncated {
                needed: OVERHEAD,
                got: 0,
            })
        }
        Some(&b) if b != SOF => return Err(FrameError::NoStart(b)),
        _ => {}
    }
    if bytes.len() < 4 {
        return Err(FrameError::Truncated {
            needed: OVERHEAD,
            got: bytes.len(),
        });
    }
    let len = usize::from(u16::from_le_bytes([bytes[2], bytes[3]]));
    if len > MAX_PAYLOAD {
        return Err(FrameError::BadLength(len));
    }
    let total = len + OVERHEAD;
    if bytes.len() < total {
        return Err(FrameError::Truncated {
            needed: total,
            got: bytes.len(),
        });
    }
    let found = u16::from_be_bytes([bytes[total - 2], bytes[total - 1]]);
    let computed = crc16(&bytes[1..total - 2]);
    if found != computed {
        return Err(FrameError::BadCrc { found, computed });
    }
    let frame = Frame {
        cmd: bytes[1],
        payload: bytes[4..4 + len].to_vec(),
    };
    Ok((frame, total))
}

/// Decode exactly one frame occupying all of `bytes`.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    let (frame, used) = parse(bytes)?;
    if used != bytes.len() {
        return Err(FrameError::Trailing(bytes.len() - used));
    }
    Ok(frame)
}

/// Incremental decoder for a byte stream. Garbage before a start octet is
/// skipped silently; a corrupt frame yields one error and scanning resumes
/// at the octet after its start octet.
#[derive(Debug, Default, Clone)]
pub struct FrameDecoder {
    buf: Vec<u8>,
    start: usize,
    skipped: u64,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        if self.start > 0 && self.start >= self.buf.len() / 2 {
            self.buf.drain(..self.start);
            self.start = 0;
        }
        self.buf.extend_from_slice(bytes);
    }

    /// Octets discarded while hunting for a start octet.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// Octets held back waiting for the rest of a frame.
    pub fn buffered(&self) -> usize {
        self.buf.len() - self.start
    }

    fn seek_start(&mut self) {
        let rest = &self.buf[self.start..];
        let off = rest.iter().position(|&b| b == SOF).unwrap_or(rest.len());
        self.skipped += off as u64;
        self.start += off;
    }

    /// Next decoded frame or error, or `None` when more input is needed.
    pub fn next_frame(&mut self) -> Option<Result<Frame, FrameError>> {
        self.seek_start();
        match parse(&self.buf[self.start..]) {
            Ok((frame, used)) => {
                self.start += used;
                Some(Ok(frame))
            }
            Err(FrameError::Truncated { .. }) => None,
            Err(e) => {
                self.start += 1;
                Some(Err(e))
            }
        }
    }

    /// End of stream: drain what is left. A partial frame is reported as
    /// truncated and scanning continues behind its start octet, so a frame
    /// hidden inside a bogus length field is still found.
    pub fn finish(&mut self) -> Vec<Result<Frame, FrameError>> {
        let mut out = Vec::new();
        loop {
            if let Some(r) = self.next_frame() {
                out.push(r);
                continue;
            }
            if self.buffered() == 0 {
                break;
            }
            let got = self.buffered();
            let needed = match parse(&self.buf[self.start..]) {
                Err(FrameError::Truncated { needed, .. }) => needed,
                _ => got,
            };
            out.push(Err(FrameError::Truncated { needed, got }));
            self.start += 1;
        }
        self.buf.clear();
        self.start = 0;
        out
    }
}
