// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chaos_map::CircuitConfig;

/// Non-ideal behavior layered on top of the ideal loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonIdealities {
    /// Gaussian noise added to the held voltage every cycle (V rms).
    pub sigma_th: f64,
    /// Input-referred ADC noise (V rms). Affects only the conversion, not the
    /// analog value the DAC output is subtracted from.
    pub sigma_adc: f64,
    /// Relative error on the amplifier gain `k`.
    pub gain_tol: f64,
    /// Error added to `v_b` (V).
    pub offset_err: f64,
    /// Probability that the lowest bit of a raw ADC code is toggled.
    pub lsb_flip_prob: f64,
    /// Hold-capacitor decay per cycle (V).
    pub droop: f64,
    /// Amplifier saturation voltages `(lo, hi)`.
    pub rails: (f64, f64),
    pub seed: u64,
}

impl NonIdealities {
    /// Default noise floor: 0.05 raw-ADC LSB rms at both injection points.
    /// Rails at `[0, v_ref]`.
    pub fn default_for(cfg: &CircuitConfig) -> Self {
        let sigma = 0.05 * cfg.raw_step();
        NonIdealities {
            sigma_th: sigma,
            sigma_adc: sigma,
            gain_tol: 0.0,
            offset_err: 0.0,
            lsb_flip_prob: 0.0,
            droop: 0.0,
            rails: (0.0, cfg.v_ref),
            seed: 0,
        }
    }

    /// Everything off. The loop is then a deterministic map evaluated in
    /// floating point; it produces pseudo-random output at best.
    pub fn ideal(cfg: &CircuitConfig) -> Self {
        NonIdealities {
            sigma_th: 0.0,
            sigma_adc: 0.0,
            ..Self::default_for(cfg)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.sigma_th >= 0.0 && self.sigma_adc >= 0.0) {
            return Err("noise sigmas must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.lsb_flip_prob) {
            return Err(format!(
                "lsb_flip_prob = {} must lie in [0, 1]",
                self.lsb_flip_prob
            ));
        }
        if self.rails.0.partial_cmp(&self.rails.1) != Some(std::cmp::Ordering::Less) {
            return Err(format!(
                "rails ({}, {}) must satisfy lo < hi",
                self.rails.0, self.rails.1
            ));
        }
        if !self.droop.is_finite() || !self.gain_tol.is_finite() || !self.offset_err.is_finite() {
            return Err("droop, gain_tol and offset_err must be finite".into());
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma_th == 0.0 && self.sigma_adc == 0.0 && self.lsb_flip_prob == 0.0
    }
}

/// Deliberate corruption of the ADC output, used to exercise the tamper
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Fault {
    #[default]
    None,
    /// ADC always returns this raw code.
    StuckCode(u16),
    /// With the given probability, the raw code is replaced by a uniformly
    /// random `n_hat`-bit code.
    RandomCodes(f64),
}

/// Seeded noise stream shared by every stochastic element of one simulator.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        NoiseSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Zero-mean Gaussian sample; draws nothing when `sigma == 0`.
    pub fn gaussian(&mut self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        let z: f64 = self.rng.sample(StandardNormal);
        sigma * z
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Bernoulli draw; consumes nothing for `p == 0`.
    pub fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.random::<f64>() < p
    }

    pub fn below(&mut self, n: u32) -> u32 {
        self.rng.random_range(0..n)
    }

    /// Cursor into the underlying stream, in 32-bit words.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }
}
