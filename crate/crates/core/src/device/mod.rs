// SPDX-License-Identifier: Apache-2.0

//! Framed host protocol and the virtual device behind it.
//!
//! Requests and replies share one frame format. A reply carries the request's
//! command code, or `ERROR` (0xFF) with a one-octet code. Transport
//! encryption is not implemented; a wrapper around the byte stream handed to
//! [`serve`] is where it would go.

mod client;
mod frame;
mod service;

pub use client::{Client, ClientError};
pub use frame::{
    crc16, decode_frame, encode_frame, Frame, FrameDecoder, FrameError, MAX_PAYLOAD, OVERHEAD, SOF,
};
pub use service::{
    cmd, err, serve, serve_listener, serve_tcp, Device, DeviceError, DiagSummary, SessionStats,
    Status, DIAG_CYCLES, MAX_RAW_SAMPLES,
};
