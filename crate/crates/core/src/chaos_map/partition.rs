// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{validate_config, voltage_to_x, CircuitConfig, MapError, ValidationOptions};

/// Index `i` of the Markov state `I_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct State(pub u32);

impl State {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "I_{}", self.0)
    }
}

/// Range of effective ADC codes visited by the loop:
/// `m_min = floor(2^n·k·v_b / v_ref)` and `m_max = m_min + k`.
pub fn markov_bounds(cfg: &CircuitConfig) -> Result<(i64, i64), MapError> {
    let validation = validate_config(cfg, &ValidationOptions::for_config(cfg));
    if !validation.is_ok() {
        return Err(MapError::InvalidConfig(validation.violations));
    }
    Ok(bounds_unchecked(cfg))
}

fn bounds_unchecked(cfg: &CircuitConfig) -> (i64, i64) {
    let y = f64::from(1u32 << cfg.n) / cfg.v_ref * f64::from(cfg.k) * cfg.v_b;
    let m_min = y.floor() as i64;
    (m_min, m_min + i64::from(cfg.k))
}

/// The `k`-state partition read directly off the effective ADC code.
///
/// State `I_(k-1)` owns the two codes `m_min` and `m_max`; state `I_i` for
/// `i < k-1` owns the single code `m_min + i + 1`. `p` is the partition
/// anchor in map units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovPartition {
    pub k: u32,
    pub m_min: i64,
    pub m_max: i64,
    pub p: f64,
}

impl MarkovPartition {
    /// Partition for a validated circuit; the anchor is placed at the voltage
    /// `(m_min + 1)·v_ref/2^n`, i.e. the first code transition inside the
    /// loop interval.
    pub fn from_config(cfg: &CircuitConfig) -> Result<Self, MapError> {
        let (m_min, m_max) = markov_bounds(cfg)?;
        let anchor_v = (m_min + 1) as f64 * cfg.step();
        Ok(MarkovPartition {
            k: cfg.k,
            m_min,
            m_max,
            p: voltage_to_x(cfg, anchor_v),
        })
    }

    /// State owning effective code `m`.
    pub fn state_from_code(&self, m: i64) -> Result<State, MapError> {
        if m < self.m_min || m > self.m_max {
            return Err(MapError::CodeOutOfRange {
                code: m,
                min: self.m_min,
                max: self.m_max,
            });
        }
        if m == self.m_min || m == self.m_max {
            Ok(State(self.k - 1))
        } else {
            Ok(State((m - self.m_min - 1) as u32))
        }
    }

    /// Observation through the partition intervals:
    /// `x ∈ I_i ⇔ i ≤ k·((x − p) mod 1) < i + 1`.
    pub fn state_of_x(&self, x: f64) -> Result<State, MapError> {
        if !(0.0..1.0).contains(&x) {
            return Err(MapError::OutOfDomain(x));
        }
        let i = (f64::from(self.k) * (x - self.p).rem_euclid(1.0)).floor() as u32;
        Ok(State(i.min(self.k - 1)))
    }

    /// Codes owned by `state`, lowest first.
    pub fn codes_of(&self, state: State) -> Vec<i64> {
        if state.0 + 1 == self.k {
            vec![self.m_min, self.m_max]
        } else {
            vec![self.m_min + i64::from(state.0) + 1]
        }
    }
}
