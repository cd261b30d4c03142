// SPDX-License-Identifier: Apache-2.0

//! Simulator, symbol extraction and post-processing wired into one byte
//! source.

use crate::bitstream::{symbols_to_bits, PostMode, PostProcessor};
use crate::config::RunConfig;
use crate::quality::{tamper_check, TamperOptions, TamperReport};
use crate::sim::{SimError, Simulator, Trace};

/// Cycles per health-checked block.
pub const HEALTH_BLOCK: usize = 4096;

/// Raw bits of a trace: `m_bits` LSB-first bits per cycle.
pub fn raw_bits(trace: &Trace, m_bits: u32) -> Vec<u8> {
    symbols_to_bits(trace.codes().map(u32::from), m_bits)
}

#[derive(Debug, Clone)]
pub struct EntropySource {
    sim: Simulator,
    post: PostProcessor,
    m_bits: u32,
    pending: Vec<u8>,
    health: TamperOptions,
}

impl EntropySource {
    pub fn new(rc: &RunConfig) -> Result<Self, SimError> {
        let sim = Simulator::new(rc.circuit, rc.nonideal, rc.initial)?;
        Ok(EntropySource {
            health: TamperOptions::for_config(&rc.circuit),
            sim,
            post: PostProcessor::new(rc.post),
            m_bits: rc.circuit.m_bits,
            pending: Vec::new(),
        })
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn simulator_mut(&mut self) -> &mut Simulator {
        &mut self.sim
    }

    pub fn post_mode(&self) -> PostMode {
        self.post.mode()
    }

    /// Post-processed bits waiting to be handed out.
    pub fn buffered_bits(&self) -> usize {
        self.pending.len()
    }

    fn run_block(&mut self, cycles: usize) -> Trace {
        let trace = self.sim.run(cycles);
        let bits = raw_bits(&trace, self.m_bits);
        self.post.feed(&bits, &mut self.pending);
        trace
    }

    fn take_bits(&mut self, n: usize) -> Vec<u8> {
        let rest = self.pending.split_off(n);
        std::mem::replace(&mut self.pending, rest)
    }

    /// `n` post-processed bits, unchecked.
    pub fn next_bits(&mut self, n: usize) -> Vec<u8> {
        while self.pending.len() < n {
            let want = (n - self.pending.len()) / self.m_bits as usize + 1;
            self.run_block(want.clamp(64, HEALTH_BLOCK * 16));
        }
        self.take_bits(n)
    }

    /// `n` post-processed bits, produced in blocks that each pass the tamper
    /// check. A failing block is discarded together with everything buffered
    /// and its report is returned instead.
    pub fn next_bits_checked(&mut self, n: usize) -> Result<Vec<u8>, TamperReport> {
        while self.pending.len() < n {
            let trace = self.run_block(HEALTH_BLOCK);
            let report = tamper_check(&trace, self.sim.config(), &self.health)
                .expect("health block exceeds minimum trace length");
            if !report.flags.is_empty() {
                self.pending.clear();
                self.post.reset();
                return Err(report);
            }
        }
        Ok(self.take_bits(n))
    }

    /// Fill `buf` with post-processed bytes, bits packed LSB first.
    pub fn fill_bytes(&mut self, buf: &mut [u8]) {
        let bits = self.next_bits(buf.len() * 8);
        pack_into(&bits, buf);
    }

    pub fn fill_bytes_checked(&mut self, buf: &mut [u8]) -> Result<(), TamperReport> {
        let bits = self.next_bits_checked(buf.len() * 8)?;
        pack_into(&bits, buf);
        Ok(())
    }
}

fn pack_into(bits: &[u8], buf: &mut [u8]) {
    for (byte, chunk) in buf.iter_mut().zip(bits.chunks(8)) {
        *byte = chunk
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b & 1) << i));
    }
}
