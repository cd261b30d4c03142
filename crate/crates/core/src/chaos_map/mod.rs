// SPDX-License-Identifier: Apache-2.0

//! The abstract shift map `x -> (alpha·x + beta) mod 1`, its Markov partition,
//! and the affine conjugation between loop voltages and map states.
//!
//! Everything here is exact arithmetic over the ideal model. The circuit
//! simulator in [`crate::sim`] is checked against it.

mod config;
mod partition;

pub use config::{
    validate_config, Advisory, CircuitConfig, Validation, ValidationOptions, Violation,
};
pub use partition::{markov_bounds, MarkovPartition, State};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("state {0} lies outside [0, 1)")]
    OutOfDomain(f64),
    #[error("alpha must be an integer >= 2, got {0}")]
    BadAlpha(u32),
    #[error("beta must lie in [0, alpha), got {0}")]
    BadBeta(f64),
    #[error("code {code} outside Markov range [{min}, {max}]")]
    CodeOutOfRange { code: i64, min: i64, max: i64 },
    #[error("invalid circuit configuration: {}", list(.0))]
    InvalidConfig(Vec<Violation>),
}

fn list(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parameters of the shift map. `beta` is kept unreduced in `[0, alpha)`
/// and only folded modulo 1 inside [`MapParams::iterate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub alpha: u32,
    pub beta: f64,
}

impl MapParams {
    pub fn new(alpha: u32, beta: f64) -> Result<Self, MapError> {
        if alpha < 2 {
            return Err(MapError::BadAlpha(alpha));
        }
        if !(beta >= 0.0 && beta < f64::from(alpha)) {
            return Err(MapError::BadBeta(beta));
        }
        Ok(MapParams { alpha, beta })
    }

    /// One application of the map.
    pub fn iterate(&self, x: f64) -> Result<f64, MapError> {
        if !(0.0..1.0).contains(&x) {
            return Err(MapError::OutOfDomain(x));
        }
        Ok((f64::from(self.alpha) * x + self.beta).rem_euclid(1.0))
    }

    /// Points of `[0, 1)` where the map jumps, i.e. where `alpha·x + beta`
    /// is an integer.
    pub fn discontinuities(&self) -> Vec<f64> {
        let a = f64::from(self.alpha);
        let first = self.beta.ceil();
        (0..self.alpha)
            .map(|j| (first + f64::from(j) - self.beta) / a)
            .filter(|x| (0.0..1.0).contains(x))
            .collect()
    }

    /// Distance from `x` to the nearest jump of the map, measured on the
    /// circle `[0, 1)`.
    pub fn distance_to_discontinuity(&self, x: f64) -> f64 {
        let y = f64::from(self.alpha) * x + self.beta;
        let frac = y - y.round();
        frac.abs() / f64::from(self.alpha)
    }
}

/// Free-function form of [`MapParams::iterate`].
pub fn iterate_map(params: &MapParams, x: f64) -> Result<f64, MapError> {
    params.iterate(x)
}

/// Theoretical transition matrix of the `alpha`-state chain induced by the
/// Markov partition: every entry is `1/alpha`.
pub fn transition_matrix(params: &MapParams) -> Vec<Vec<f64>> {
    let k = params.alpha as usize;
    let p = 1.0 / f64::from(params.alpha);
    vec![vec![p; k]; k]
}

/// Map a loop voltage to the abstract state: `x = 2^n/(k·v_ref)·(v − k·v_b)`.
pub fn voltage_to_x(cfg: &CircuitConfig, v: f64) -> f64 {
    let k = f64::from(cfg.k);
    f64::from(1u32 << cfg.n) / (k * cfg.v_ref) * (v - k * cfg.v_b)
}

/// Inverse of [`voltage_to_x`].
pub fn x_to_voltage(cfg: &CircuitConfig, x: f64) -> f64 {
    let k = f64::from(cfg.k);
    k * cfg.v_ref / f64::from(1u32 << cfg.n) * x + k * cfg.v_b
}
