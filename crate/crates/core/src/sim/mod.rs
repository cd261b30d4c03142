// SPDX-License-Identifier: Apache-2.0

//! Cycle-level behavioral model of the ADC → DAC → difference amplifier →
//! track-and-hold loop, including resolution degradation and non-idealities.
//!
//! The master-slave track-and-hold pair is modelled as a single one-cycle
//! delay register (`LoopState::v_hold`).
//!
//! With every noise source switched off the loop is a deterministic
//! floating-point map, i.e. a PRNG. Entropy in the simulated source comes from
//! the seeded noise stream, so every result is tied to its seed.

mod blocks;
pub mod export;
mod nonideal;

pub use blocks::{
    adc_convert, amplifier, dac_code, dac_convert, degrade_resolution, Clamped, DacRangeError,
};
pub use export::{
    read_raw_codes, read_trace_csv, write_raw_codes, write_trace_csv, TraceFileError, CSV_HEADER,
};
pub use nonideal::{Fault, NoiseSource, NonIdealities};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos_map::{validate_config, CircuitConfig, ValidationOptions, Violation};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid circuit configuration: {0:?}")]
    InvalidConfig(Vec<Violation>),
    #[error("invalid non-idealities: {0}")]
    InvalidNonIdealities(String),
    #[error("cycle count must be at least 1")]
    ZeroCycles,
}

/// Analog and digital state between two cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopState {
    /// Slave track-and-hold output, i.e. the next `v_in`.
    pub v_hold: f64,
    pub cycle: u64,
    /// Last raw `n_hat`-bit code.
    pub m_hat: u16,
    /// Last effective `n`-bit code.
    pub m: u16,
    pub noise_stream_position: u128,
    pub saturation_events: u64,
}

impl LoopState {
    pub fn new(v_hold: f64) -> Self {
        LoopState {
            v_hold,
            cycle: 0,
            m_hat: 0,
            m: 0,
            noise_stream_position: 0,
            saturation_events: 0,
        }
    }
}

/// One simulated cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub cycle: u64,
    pub v_in: f64,
    pub m_hat: u16,
    pub m: u16,
    pub v_out: f64,
}

/// Sequence of cycles plus the saturation events seen while producing it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub saturation_events: u64,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn codes(&self) -> impl Iterator<Item = u16> + '_ {
        self.records.iter().map(|r| r.m)
    }

    pub fn raw_codes(&self) -> impl Iterator<Item = u16> + '_ {
        self.records.iter().map(|r| r.m_hat)
    }
}

/// Starting voltage of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Initial {
    Voltage(f64),
    /// Uniform over the loop interval, drawn from the seeded noise stream.
    Random,
}

/// Advance the loop by one cycle.
pub fn loop_step(
    cfg: &CircuitConfig,
    nonideal: &NonIdealities,
    fault: Fault,
    state: LoopState,
    noise: &mut NoiseSource,
) -> (LoopState, TraceRecord) {
    let mut saturations = 0;
    let v_in = state.v_hold - nonideal.droop + noise.gaussian(nonideal.sigma_th);

    let conv = adc_convert(cfg, nonideal, v_in, noise);
    saturations += u64::from(conv.saturated);
    let m_hat = match fault {
        Fault::None => conv.value,
        Fault::StuckCode(code) => code,
        Fault::RandomCodes(p) => {
            if noise.chance(p) {
                noise.below(1u32 << cfg.n_hat) as u16
            } else {
                conv.value
            }
        }
    };

    let m = degrade_resolution(cfg, m_hat);
    let v_dac = dac_convert(cfg, dac_code(cfg, m)).expect("effective code always fits the DAC");
    let out = amplifier(cfg, nonideal, v_in - v_dac);
    saturations += u64::from(out.saturated);

    let record = TraceRecord {
        cycle: state.cycle,
        v_in,
        m_hat,
        m,
        v_out: out.value,
    };
    let next = LoopState {
        v_hold: out.value,
        cycle: state.cycle + 1,
        m_hat,
        m,
        noise_stream_position: noise.position(),
        saturation_events: state.saturation_events + saturations,
    };
    (next, record)
}

/// A running loop instance. Single-threaded; independent instances share
/// nothing.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: CircuitConfig,
    nonideal: NonIdealities,
    fault: Fault,
    state: LoopState,
    noise: NoiseSource,
}

impl Simulator {
    pub fn new(
        cfg: CircuitConfig,
        nonideal: NonIdealities,
        initial: Initial,
    ) -> Result<Self, SimError> {
        let validation = validate_config(&cfg, &ValidationOptions::for_config(&cfg));
        if !validation.is_ok() {
            return Err(SimError::InvalidConfig(validation.violations));
        }
        nonideal.check().map_err(SimError::InvalidNonIdealities)?;
        let mut noise = NoiseSource::new(nonideal.seed);
        let v0 = match initial {
            Initial::Voltage(v) => v,
            Initial::Random => {
                let (lo, hi) = cfg.interval();
                lo + noise.uniform() * (hi - lo)
            }
        };
        let mut state = LoopState::new(v0);
        state.noise_stream_position = noise.position();
        Ok(Simulator {
            cfg,
            nonideal,
            fault: Fault::None,
            state,
            noise,
        })
    }

    pub fn config(&self) -> &CircuitConfig {
        &self.cfg
    }

    pub fn nonidealities(&self) -> &NonIdealities {
        &self.nonideal
    }

    pub fn state(&self) -> &LoopState {
        &self.state
    }

    pub fn fault(&self) -> Fault {
        self.fault
    }

    pub fn set_fault(&mut self, fault: Fault) {
        self.fault = fault;
    }

    pub fn step(&mut self) -> TraceRecord {
        let (next, record) = loop_step(
            &self.cfg,
            &self.nonideal,
            self.fault,
            self.state,
            &mut self.noise,
        );
        self.state = next;
        record
    }

    /// Run `n` cycles, collecting the trace. The saturation count covers only
    /// these cycles.
    pub fn run(&mut self, n: usize) -> Trace {
        let before = self.state.saturation_events;
        let records = (0..n).map(|_| self.step()).collect();
        Trace {
            records,
            saturation_events: self.state.saturation_events - before,
        }
    }
}

/// Fresh simulator, `n_cycles` steps. Identical inputs give bit-identical
/// traces.
pub fn run_trajectory(
    cfg: &CircuitConfig,
    nonideal: &NonIdealities,
    n_cycles: usize,
    initial: Initial,
) -> Result<Trace, SimError> {
    if n_cycles == 0 {
        return Err(SimError::ZeroCycles);
    }
    let mut sim = Simulator::new(*cfg, *nonideal, initial)?;
    Ok(sim.run(n_cycles))
}
