// SPDX-License-Identifier: Apache-2.0

//! Run configuration and its flat `key = value` text form.
//!
//! ```text
//! # prototype setup
//! n_hat = 10
//! n = 3
//! v_b = 0.192
//! seed = 42
//! post = vn
//! ```
//!
//! `#` and `;` start comments, `[section]` lines are ignored, and every
//! missing key takes its default. Noise sigmas that are not given follow the
//! circuit (0.05 raw LSB), and rails default to `[0, v_ref]`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::bitstream::PostMode;
use crate::chaos_map::{validate_config, CircuitConfig, Validation, ValidationOptions};
use crate::sim::{Initial, NonIdealities};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub circuit: CircuitConfig,
    pub nonideal: NonIdealities,
    pub initial: Initial,
    pub cycles: usize,
    pub bits: usize,
    pub post: PostMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        let circuit = CircuitConfig::PROTOTYPE;
        RunConfig {
            circuit,
            nonideal: NonIdealities::default_for(&circuit),
            initial: Initial::Random,
            cycles: 100_000,
            bits: 1_000_000,
            post: PostMode::None,
        }
    }
}

const KEYS: &[&str] = &[
    "n_hat",
    "n",
    "m_bits",
    "n_tilde",
    "v_ref",
    "v_b",
    "k",
    "sigma_th",
    "sigma_adc",
    "gain_tol",
    "offset_err",
    "lsb_flip_prob",
    "droop",
    "rail_lo",
    "rail_hi",
    "seed",
    "initial",
    "cycles",
    "bits",
    "post",
];

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.nonideal.seed
    }

    /// Parse the text form on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() || (body.starts_with('[') && body.ends_with(']')) {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { line, key });
            }
            if entries.iter().any(|(_, k, _)| *k == key) {
                return Err(ConfigError::Duplicate { line, key });
            }
            entries.push((line, key, value.trim().to_string()));
        }
        let find = |key: &str| entries.iter().find(|(_, k, _)| k == key);

        fn value<T: std::str::FromStr>(
            entry: Option<&(usize, String, String)>,
            default: T,
        ) -> Result<T, ConfigError> {
            match entry {
                None => Ok(default),
                Some((line, key, v)) => v.parse().map_err(|_| ConfigError::BadValue {
                    line: *line,
                    key: key.clone(),
                    value: v.clone(),
                }),
            }
        }

        let d = CircuitConfig::PROTOTYPE;
        let m_bits: u32 = value(find("m_bits"), d.m_bits)?;
        // k follows m_bits unless given explicitly
        let k_default = if m_bits < 32 { 1u32 << m_bits } else { 0 };
        let circuit = CircuitConfig {
            n_hat: value(find("n_hat"), d.n_hat)?,
            n: value(find("n"), d.n)?,
            m_bits,
            n_tilde: value(find("n_tilde"), d.n_tilde)?,
            v_ref: value(find("v_ref"), d.v_ref)?,
            v_b: value(find("v_b"), d.v_b)?,
            k: value(find("k"), k_default)?,
        };
        let nd = if circuit.n_hat <= 16 && circuit.v_ref.is_finite() {
            NonIdealities::default_for(&circuit)
        } else {
            NonIdealities::default_for(&d)
        };
        let nonideal = NonIdealities {
            sigma_th: value(find("sigma_th"), nd.sigma_th)?,
            sigma_adc: value(find("sigma_adc"), nd.sigma_adc)?,
            gain_tol: value(find("gain_tol"), nd.gain_tol)?,
            offset_err: value(find("offset_err"), nd.offset_err)?,
            lsb_flip_prob: value(find("lsb_flip_prob"), nd.lsb_flip_prob)?,
            droop: value(find("droop"), nd.droop)?,
            rails: (
                value(find("rail_lo"), nd.rails.0)?,
                value(find("rail_hi"), nd.rails.1)?,
            ),
            seed: value(find("seed"), nd.seed)?,
        };
        let initial = match find("initial") {
            None => Initial::Random,
            Some((_, _, v)) if v.eq_ignore_ascii_case("random") => Initial::Random,
            entry => Initial::Voltage(value(entry, 0.0)?),
        };
        let dflt = RunConfig::default();
        Ok(RunConfig {
            circuit,
            nonideal,
            initial,
            cycles: value(find("cycles"), dflt.cycles)?,
            bits: value(find("bits"), dflt.bits)?,
            post: value(find("post"), dflt.post)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Text form with every key spelled out; `parse(to_text())` is the
    /// identity.
    pub fn to_text(&self) -> String {
        let c = &self.circuit;
        let ni = &self.nonideal;
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_hat", &c.n_hat);
        kv("n", &c.n);
        kv("m_bits", &c.m_bits);
        kv("n_tilde", &c.n_tilde);
        kv("v_ref", &c.v_ref);
        kv("v_b", &c.v_b);
        kv("k", &c.k);
        kv("sigma_th", &ni.sigma_th);
        kv("sigma_adc", &ni.sigma_adc);
        kv("gain_tol", &ni.gain_tol);
        kv("offset_err", &ni.offset_err);
        kv("lsb_flip_prob", &ni.lsb_flip_prob);
        kv("droop", &ni.droop);
        kv("rail_lo", &ni.rails.0);
        kv("rail_hi", &ni.rails.1);
        kv("seed", &ni.seed);
        match self.initial {
            Initial::Random => kv("initial", &"random"),
            Initial::Voltage(v) => kv("initial", &v),
        }
        kv("cycles", &self.cycles);
        kv("bits", &self.bits);
        kv("post", &self.post);
        s
    }

    /// Circuit bounds and advisories, with rail clearance measured against
    /// the configured rails.
    pub fn validate(&self) -> Validation {
        let mut opts = ValidationOptions::for_config(&self.circuit);
        opts.rails = self.nonideal.rails;
        validate_config(&self.circuit, &opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_prototype_defaults() {
        let rc = RunConfig::parse("").unwrap();
        assert_eq!(rc, RunConfig::default());
        assert_eq!(rc.circuit, CircuitConfig::PROTOTYPE);
        assert!((rc.nonideal.sigma_th - 0.0002).abs() < 1e-15);
    }

    #[test]
    fn text_roundtrip() {
        let mut rc = RunConfig::default();
        rc.nonideal.seed = 987654321;
        rc.nonideal.gain_tol = -0.003;
        rc.initial = Initial::Voltage(1.25);
        rc.post = PostMode::Xor;
        assert_eq!(RunConfig::parse(&rc.to_text()).unwrap(), rc);
    }

    #[test]
    fn comments_sections_and_case() {
        let rc = RunConfig::parse(
            "[circuit]\n# textbook\nN_HAT = 3 ; inline\nn_tilde=3\nv_ref = 10\nv_b = 0.4\n\npost = vn\n",
        )
        .unwrap();
        assert_eq!(rc.circuit, CircuitConfig::TEXTBOOK);
        assert_eq!(rc.post, PostMode::VonNeumann);
        // noise follows the 3-bit ADC
        assert!((rc.nonideal.sigma_th - 0.05 * 1.25).abs() < 1e-12);
        assert_eq!(rc.nonideal.rails, (0.0, 10.0));
    }

    #[test]
    fn k_follows_m_bits() {
        let rc = RunConfig::parse("m_bits = 1").unwrap();
        assert_eq!(rc.circuit.k, 2);
        let rc = RunConfig::parse("m_bits = 1\nk = 3").unwrap();
        assert_eq!(rc.circuit.k, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            RunConfig::parse("n = 3\nbogus").unwrap_err(),
            ConfigError::Syntax {
                line: 2,
                text: "bogus".into()
            }
        );
        assert!(matches!(
            RunConfig::parse("colour = red"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("k = four"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("k = 4\nk = 4"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("post = hash"),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn validation_uses_configured_rails() {
        let rc = RunConfig::parse("rail_hi = 2.9").unwrap();
        let v = rc.validate();
        assert!(v.is_ok());
        assert_eq!(v.advisories.len(), 1);
    }
}
