// SPDX-License-Identifier: Apache-2.0

//! Behavioral model of a chaotic entropy source built from an ADC, a DAC and
//! a gain-of-k amplifier in a loop, with the tooling around it: bit
//! extraction, statistical quality checks, a return-map self-diagnostic and a
//! framed host protocol for a virtual device.
//!

pub mod bitstream;
pub mod chaos_map;
pub mod cli;
pub mod config;
pub mod device;
pub mod generator;
pub mod quality;
pub mod sim;

pub use chaos_map::{CircuitConfig, MapParams};
pub use config::RunConfig;
pub use sim::{NonIdealities, Simulator};
