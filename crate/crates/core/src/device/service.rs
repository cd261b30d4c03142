// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Read, Write};
use std::net::{TcpListener, ToSocketAddrs};

use serde::Serialize;

use super::frame::{Frame, FrameDecoder, FrameError, MAX_PAYLOAD};
use crate::chaos_map::Violation;
use crate::config::RunConfig;
use crate::generator::EntropySource;
use crate::quality::{tamper_check, TamperFlags, TamperOptions, TamperReport};
use crate::sim::{Fault, SimError};

pub mod cmd {
    pub const GET_RANDOM: u8 = 0x01;
    pub const GET_STATUS: u8 = 0x02;
    pub const GET_RAW: u8 = 0x03;
    pub const SET_CONFIG: u8 = 0x04;
    pub const DIAG: u8 = 0x05;
    pub const ERROR: u8 = 0xFF;
}

pub mod err {
    pub const UNKNOWN_CMD: u8 = 0x01;
    pub const BAD_PARAMS: u8 = 0x02;
    pub const TAMPER_LOCKOUT: u8 = 0x03;
    /// Malformed request frame (bad CRC or length).
    pub const BAD_FRAME: u8 = 0x04;
}

pub const DIAG_CYCLES: usize = 10_000;
pub const MAX_RAW_SAMPLES: usize = MAX_PAYLOAD / 2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DeviceError {
    #[error("configuration rejected: {0:?}")]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Decoded GET_STATUS reply: flags, cycle count, buffered bytes, then the
/// configuration text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Status {
    pub flags: TamperFlags,
    pub cycle: u64,
    pub buffered_bytes: u32,
    pub config: String,
}

impl Status {
    pub fn encode(&self) -> Vec<u8> {
        let mut p = vec![self.flags.bits()];
        p.extend_from_slice(&self.cycle.to_le_bytes());
        p.extend_from_slice(&self.buffered_bytes.to_le_bytes());
        p.extend_from_slice(self.config.as_bytes());
        p
    }

    pub fn decode(p: &[u8]) -> Option<Self> {
        if p.len() < 13 {
            return None;
        }
        Some(Status {
            flags: TamperFlags::from_bits_truncate(p[0]),
            cycle: u64::from_le_bytes(p[1..9].try_into().ok()?),
            buffered_bytes: u32::from_le_bytes(p[9..13].try_into().ok()?),
            config: String::from_utf8(p[13..].to_vec()).ok()?,
        })
    }
}

/// Decoded DIAG reply: flags, branch score (f64 LE), max occupancy (f64 LE).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagSummary {
    pub flags: TamperFlags,
    pub score: f64,
    pub max_occupancy: f64,
}

impl DiagSummary {
    pub fn encode(&self) -> Vec<u8> {
        let mut p = vec![self.flags.bits()];
        p.extend_from_slice(&self.score.to_le_bytes());
        p.extend_from_slice(&self.max_occupancy.to_le_bytes());
        p
    }

    pub fn decode(p: &[u8]) -> Option<Self> {
        if p.len() != 17 {
            return None;
        }
        Some(DiagSummary {
            flags: TamperFlags::from_bits_truncate(p[0]),
            score: f64::from_le_bytes(p[1..9].try_into().ok()?),
            max_occupancy: f64::from_le_bytes(p[9..17].try_into().ok()?),
        })
    }
}

/// The virtual peripheral. Tamper flags latch: once a health block or DIAG
/// raises one, random output stays refused until a clean DIAG or a
/// SET_CONFIG.
#[derive(Debug, Clone)]
pub struct Device {
    rc: RunConfig,
    source: EntropySource,
    flags: TamperFlags,
}

fn error_frame(code: u8) -> Frame {
    Frame {
        cmd: cmd::ERROR,
        payload: vec![code],
    }
}

fn u16_param(p: &[u8]) -> Option<usize> {
    let b: [u8; 2] = p.try_into().ok()?;
    Some(usize::from(u16::from_le_bytes(b)))
}

impl Device {
    pub fn new(rc: RunConfig) -> Result<Self, DeviceError> {
        let v = rc.validate();
        if !v.is_ok() {
            return Err(DeviceError::Invalid(v.violations));
        }
        let source = EntropySource::new(&rc)?;
        Ok(Device {
            rc,
            source,
            flags: TamperFlags::empty(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.rc
    }

    pub fn flags(&self) -> TamperFlags {
        self.flags
    }

    /// Test hook standing in for a physical attack on the analog loop.
    pub fn inject_fault(&mut self, fault: Fault) {
        self.source.simulator_mut().set_fault(fault);
    }

    pub fn status(&self) -> Status {
        Status {
            flags: self.flags,
            cycle: self.source.simulator().state().cycle,
            buffered_bytes: (self.source.buffered_bits() / 8) as u32,
            config: self.rc.to_text(),
        }
    }

    /// Fresh `DIAG_CYCLES` trace from the running loop. The result replaces
    /// the latched flags.
    pub fn diagnose(&mut self) -> TamperReport {
        let cfg = *self.source.simulator().config();
        let trace = self.source.simulator_mut().run(DIAG_CYCLES);
        let report = tamper_check(&trace, &cfg, &TamperOptions::for_config(&cfg))
            .expect("diagnostic trace is long enough");
        self.flags = report.flags;
        report
    }

    pub fn handle(&mut self, req: &Frame) -> Frame {
        let p = &req.payload;
        match req.cmd {
            cmd::GET_RANDOM => {
                let Some(n) = u16_param(p).filter(|&n| n <= MAX_PAYLOAD) else {
                    return error_frame(err::BAD_PARAMS);
                };
                if !self.flags.is_empty() {
                    return error_frame(err::TAMPER_LOCKOUT);
                }
                let mut out = vec![0u8; n];
                match self.source.fill_bytes_checked(&mut out) {
                    Ok(()) => Frame {
                        cmd: cmd::GET_RANDOM,
                        payload: out,
                    },
                    Err(report) => {
                        self.flags = report.flags;
                        error_frame(err::TAMPER_LOCKOUT)
                    }
                }
            }
            cmd::GET_STATUS if p.is_empty() => Frame {
                cmd: cmd::GET_STATUS,
                payload: self.status().encode(),
            },
            cmd::GET_RAW => {
                let Some(c) = u16_param(p).filter(|&c| c <= MAX_RAW_SAMPLES) else {
                    return error_frame(err::BAD_PARAMS);
                };
                let sim = self.source.simulator_mut();
                let payload = (0..c)
                    .flat_map(|_| sim.step().m_hat.to_le_bytes())
                    .collect();
                Frame {
                    cmd: cmd::GET_RAW,
                    payload,
                }
            }
            cmd::SET_CONFIG => {
                let Ok(text) = std::str::from_utf8(p) else {
                    return error_frame(err::BAD_PARAMS);
                };
                match RunConfig::parse(text).map(Device::new) {
                    Ok(Ok(dev)) => {
                        *self = dev;
                        Frame {
                            cmd: cmd::SET_CONFIG,
                            payload: Vec::new(),
                        }
                    }
                    _ => error_frame(err::BAD_PARAMS),
                }
            }
            cmd::DIAG if p.is_empty() => {
                let r = self.diagnose();
                let summary = DiagSummary {
                    flags: r.flags,
                    score: r.fit.score,
                    max_occupancy: r.max_occupancy,
                };
                Frame {
                    cmd: cmd::DIAG,
                    payload: summary.encode(),
                }
            }
            cmd::GET_STATUS | cmd::DIAG => error_frame(err::BAD_PARAMS),
            _ => error_frame(err::UNKNOWN_CMD),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SessionStats {
    pub requests: u64,
    pub bad_frames: u64,
    pub skipped_octets: u64,
}

/// Serve one session until the reader hits end of stream. Malformed frames
/// get an ERROR reply and the decoder resynchronizes.
pub fn serve<R: Read, W: Write>(
    device: &mut Device,
    mut reader: R,
    mut writer: W,
) -> io::Result<SessionStats> {
    let mut dec = FrameDecoder::new();
    let mut stats = SessionStats::default();
    let mut buf = [0u8; 4096];
    loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        dec.push(&buf[..n]);
        while let Some(r) = dec.next_frame() {
            respond(device, r, &mut writer, &mut stats)?;
        }
        writer.flush()?;
    }
    for r in dec.finish() {
        if !matches!(r, Err(FrameError::Truncated { .. })) {
            respond(device, r, &mut writer, &mut stats)?;
        }
    }
    writer.flush()?;
    stats.skipped_octets = dec.skipped();
    Ok(stats)
}

fn respond<W: Write>(
    device: &mut Device,
    r: Result<Frame, FrameError>,
    writer: &mut W,
    stats: &mut SessionStats,
) -> io::Result<()> {
    let reply = match r {
        Ok(req) => {
            stats.requests += 1;
            device.handle(&req)
        }
        Err(_) => {
            stats.bad_frames += 1;
            error_frame(err::BAD_FRAME)
        }
    };
    writer.write_all(&reply.encode())
}

/// Accept clients one at a time on `listener`. Stops after `max_sessions`
/// sessions when given.
pub fn serve_listener(
    device: &mut Device,
    listener: &TcpListener,
    max_sessions: Option<usize>,
) -> io::Result<()> {
    for (served, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let reader = stream.try_clone()?;
        serve(device, reader, stream)?;
        if max_sessions.is_some_and(|m| served + 1 >= m) {
            break;
        }
    }
    Ok(())
}

pub fn serve_tcp<A: ToSocketAddrs>(device: &mut Device, addr: A) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    serve_listener(device, &listener, None)
}
