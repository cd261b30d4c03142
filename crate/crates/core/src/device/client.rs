// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Read, Write};

use super::frame::{Frame, FrameDecoder, FrameError};
use super::service::{cmd, DiagSummary, Status};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("device replied with error code {0:#04x}")]
    Device(u8),
    #[error("unexpected reply to command {0:#04x}")]
    Unexpected(u8),
    #[error("connection closed")]
    Closed,
}

/// Blocking request/response client over any byte stream.
pub struct Client<S> {
    stream: S,
    dec: FrameDecoder,
}

impl<S: Read + Write> Client<S> {
    pub fn new(stream: S) -> Self {
        Client {
            stream,
            dec: FrameDecoder::new(),
        }
    }

    pub fn into_inner(self) -> S {
        self.stream
    }

    pub fn request(&mut self, command: u8, payload: &[u8]) -> Result<Frame, ClientError> {
        self.stream
            .write_all(&Frame::new(command, payload)?.encode())?;
        self.stream.flush()?;
        let mut buf = [0u8; 4096];
        let reply = loop {
            if let Some(r) = self.dec.next_frame() {
                break r?;
            }
            match self.stream.read(&mut buf)? {
                0 => return Err(ClientError::Closed),
                n => self.dec.push(&buf[..n]),
            }
        };
        if reply.cmd == cmd::ERROR {
            return Err(ClientError::Device(
                reply.payload.first().copied().unwrap_or(0),
            ));
        }
        if reply.cmd != command {
            return Err(ClientError::Unexpected(command));
        }
        Ok(reply)
    }

    pub fn get_random(&mut self, n: u16) -> Result<Vec<u8>, ClientError> {
        Ok(self.request(cmd::GET_RANDOM, &n.to_le_bytes())?.payload)
    }

    pub fn get_status(&mut self) -> Result<Status, ClientError> {
        let p = self.request(cmd::GET_STATUS, &[])?.payload;
        Status::decode(&p).ok_or(ClientError::Unexpected(cmd::GET_STATUS))
    }

    pub fn get_raw(&mut self, count: u16) -> Result<Vec<u16>, ClientError> {
        let p = self.request(cmd::GET_RAW, &count.to_le_bytes())?.payload;
        Ok(p.chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect())
    }

    pub fn set_config(&mut self, text: &str) -> Result<(), ClientError> {
        self.request(cmd::SET_CONFIG, text.as_bytes()).map(drop)
    }

    pub fn diag(&mut self) -> Result<DiagSummary, ClientError> {
        let p = self.request(cmd::DIAG, &[])?.payload;
        DiagSummary::decode(&p).ok_or(ClientError::Unexpected(cmd::DIAG))
    }
}
