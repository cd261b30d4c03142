// SPDX-License-Identifier: Apache-2.0

//! Static characteristics of the individual loop blocks.

use super::nonideal::{NoiseSource, NonIdealities};
use crate::chaos_map::CircuitConfig;

/// Value produced by a block that may have hit a limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped<T> {
    pub value: T,
    pub saturated: bool,
}

/// Flooring `n_hat`-bit conversion: `floor(2^n_hat / v_ref · (v + noise))`,
/// clamped to the code range. An LSB toggle is applied afterwards with
/// probability `lsb_flip_prob`.
pub fn adc_convert(
    cfg: &CircuitConfig,
    nonideal: &NonIdealities,
    v: f64,
    noise: &mut NoiseSource,
) -> Clamped<u16> {
    let full = (1u32 << cfg.n_hat) as f64;
    let v = v + noise.gaussian(nonideal.sigma_adc);
    let raw = (full / cfg.v_ref * v).floor();
    let top = full - 1.0;
    let (code, saturated) = if raw.is_nan() || raw < 0.0 {
        (0.0, true)
    } else if raw > top {
        (top, true)
    } else {
        (raw, false)
    };
    let mut code = code as u16;
    if noise.chance(nonideal.lsb_flip_prob) {
        code ^= 1;
    }
    Clamped {
        value: code,
        saturated,
    }
}

/// Drop the `n_hat - n` erratic low bits.
pub fn degrade_resolution(cfg: &CircuitConfig, m_hat: u16) -> u16 {
    m_hat >> cfg.adc_shift()
}

/// Left-align an effective code on the `n_tilde`-bit DAC, zero padded.
pub fn dac_code(cfg: &CircuitConfig, m: u16) -> u32 {
    u32::from(m) << cfg.dac_shift()
}

/// Ideal `n_tilde`-bit DAC: `code · v_ref / 2^n_tilde`.
pub fn dac_convert(cfg: &CircuitConfig, code: u32) -> Result<f64, DacRangeError> {
    let full = 1u32 << cfg.n_tilde;
    if code >= full {
        return Err(DacRangeError { code, full });
    }
    Ok(f64::from(code) * cfg.v_ref / f64::from(full))
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("DAC code {code} outside [0, {full})")]
pub struct DacRangeError {
    pub code: u32,
    pub full: u32,
}

/// Difference amplifier `k_actual · (v_err + v_b_actual)`, limited by the
/// rails.
pub fn amplifier(cfg: &CircuitConfig, nonideal: &NonIdealities, v_err: f64) -> Clamped<f64> {
    let gain = f64::from(cfg.k) * (1.0 + nonideal.gain_tol);
    let offset = cfg.v_b + nonideal.offset_err;
    let out = gain * (v_err + offset);
    let (lo, hi) = nonideal.rails;
    if out < lo {
        Clamped {
            value: lo,
            saturated: true,
        }
    } else if out > hi {
        Clamped {
            value: hi,
            saturated: true,
        }
    } else {
        Clamped {
            value: out,
            saturated: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook() -> (CircuitConfig, NonIdealities) {
        let cfg = CircuitConfig::TEXTBOOK;
        (cfg, NonIdealities::ideal(&cfg))
    }

    #[test]
    fn adc_examples() {
        let (cfg, ni) = textbook();
        let mut noise = NoiseSource::new(0);
        assert_eq!(adc_convert(&cfg, &ni, 3.0, &mut noise).value, 2);
        let c = adc_convert(&cfg, &ni, 6.6, &mut noise);
        assert_eq!((c.value, c.saturated), (5, false));
        let c = adc_convert(&cfg, &ni, 10.5, &mut noise);
        assert_eq!((c.value, c.saturated), (7, true));
        let c = adc_convert(&cfg, &ni, -0.1, &mut noise);
        assert_eq!((c.value, c.saturated), (0, true));
        assert_eq!(noise.position(), 0, "ideal conversion must not draw noise");
    }

    #[test]
    fn adc_lsb_flip() {
        let (cfg, mut ni) = textbook();
        ni.lsb_flip_prob = 1.0;
        let mut noise = NoiseSource::new(0);
        assert_eq!(adc_convert(&cfg, &ni, 3.0, &mut noise).value, 3);
    }

    #[test]
    fn degradation_and_padding() {
        let cfg = CircuitConfig::PROTOTYPE;
        assert_eq!(degrade_resolution(&cfg, 733), 5);
        assert_eq!(dac_code(&cfg, 5), 160);
        for m in 0..8u16 {
            assert_eq!(degrade_resolution(&cfg, (dac_code(&cfg, m) << 2) as u16), m);
        }
    }

    #[test]
    fn dac_examples() {
        let (cfg, _) = textbook();
        assert_eq!(dac_convert(&cfg, 5).unwrap(), 6.25);
        assert_eq!(dac_convert(&cfg, 0).unwrap(), 0.0);
        assert!(dac_convert(&cfg, 8).is_err());
        let v = dac_convert(&CircuitConfig::PROTOTYPE, 160).unwrap();
        assert!((v - 2.56).abs() < 1e-12);
        // same voltage a 3-bit DAC would give for m = 5
        let three_bit = CircuitConfig {
            n_tilde: 3,
            n_hat: 3,
            ..CircuitConfig::PROTOTYPE
        };
        assert!((dac_convert(&three_bit, 5).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn amplifier_examples() {
        let (cfg, mut ni) = textbook();
        let out = amplifier(&cfg, &ni, 0.35);
        assert!((out.value - 3.0).abs() < 1e-12 && !out.saturated);
        let zero = CircuitConfig { v_b: 0.0, ..cfg };
        assert_eq!(amplifier(&zero, &ni, 0.0).value, 0.0);
        ni.rails = (0.0, 5.0);
        let out = amplifier(&cfg, &ni, 10.0);
        assert_eq!((out.value, out.saturated), (5.0, true));
    }

    #[test]
    fn amplifier_gain_and_offset_errors() {
        let (cfg, mut ni) = textbook();
        ni.gain_tol = 0.01;
        ni.offset_err = 0.01;
        let out = amplifier(&cfg, &ni, 0.35);
        assert!((out.value - 4.04 * 0.76).abs() < 1e-12);
    }
}
