// SPDX-License-Identifier: Apache-2.0

//! Electrical and resolution parameters of the loop, and the rules that make
//! a parameter set produce a valid shift map.

use serde::{Deserialize, Serialize};

use super::MapParams;

/// Slack used when comparing voltage bounds computed in floating point.
const BOUND_EPS: f64 = 1e-12;

/// Circuit parameters of the ADC/DAC quantization-error loop.
///
/// `n_hat` is the nominal ADC resolution, `n` the effective resolution the map
/// is built on after discarding the `n_hat - n` low bits, `n_tilde` the DAC
/// resolution and `m_bits` the symbol width (`k = 2^m_bits`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n_hat: u32,
    pub n: u32,
    pub m_bits: u32,
    pub n_tilde: u32,
    pub v_ref: f64,
    pub v_b: f64,
    pub k: u32,
}

impl CircuitConfig {
    /// Prototype setup: 10-bit ADC degraded to 3 bits, 8-bit DAC, 4 symbols,
    /// 4.096 V reference and 192 mV offset.
    pub const PROTOTYPE: CircuitConfig = CircuitConfig {
        n_hat: 10,
        n: 3,
        m_bits: 2,
        n_tilde: 8,
        v_ref: 4.096,
        v_b: 0.192,
        k: 4,
    };

    /// Ideal 3-bit textbook setup (10 V reference, 0.4 V offset) with no
    /// resolution degradation.
    pub const TEXTBOOK: CircuitConfig = CircuitConfig {
        n_hat: 3,
        n: 3,
        m_bits: 2,
        n_tilde: 3,
        v_ref: 10.0,
        v_b: 0.4,
        k: 4,
    };

    /// Quantization step of the effective `n`-bit converter.
    pub fn step(&self) -> f64 {
        self.v_ref / f64::from(1u32 << self.n)
    }

    /// Quantization step of the raw `n_hat`-bit ADC.
    pub fn raw_step(&self) -> f64 {
        self.v_ref / f64::from(1u32 << self.n_hat)
    }

    /// Invariant voltage interval `[k·v_b, k·(v_b + step)]` spanned by the loop.
    pub fn interval(&self) -> (f64, f64) {
        let k = f64::from(self.k);
        (k * self.v_b, k * (self.v_b + self.step()))
    }

    /// Abstract map obtained from this circuit: `alpha = k`,
    /// `beta = k·2^n·v_b / v_ref`.
    pub fn map_params(&self) -> MapParams {
        let beta = f64::from(self.k) * f64::from(1u32 << self.n) * self.v_b / self.v_ref;
        MapParams {
            alpha: self.k,
            beta,
        }
    }

    /// Right shift turning a raw ADC code into an effective code.
    pub fn adc_shift(&self) -> u32 {
        self.n_hat - self.n
    }

    /// Left shift turning an effective code into a DAC code.
    pub fn dac_shift(&self) -> u32 {
        self.n_tilde - self.n
    }
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self::PROTOTYPE
    }
}

/// Hard requirement broken by a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    GainTooSmall { k: u32 },
    GainTooLarge { k: u32, max: u32 },
    GainNotPowerOfTwo { k: u32, m_bits: u32 },
    SymbolWidthTooLarge { m_bits: u32, n: u32 },
    DacResolution { n: u32, n_tilde: u32, n_hat: u32 },
    AdcResolution { n_hat: u32 },
    EffectiveResolution { n: u32 },
    NonPositiveReference { v_ref: f64 },
    NegativeOffset { v_b: f64 },
    OffsetTooLarge { v_b: f64, max: f64 },
    IntervalOutsideFullScale { lo: f64, hi: f64, v_ref: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::GainTooSmall { k } => write!(f, "k = {k} is below 2"),
            Violation::GainTooLarge { k, max } => write!(f, "k = {k} exceeds 2^n = {max}"),
            Violation::GainNotPowerOfTwo { k, m_bits } => {
                write!(f, "k = {k} does not equal 2^m_bits = 2^{m_bits}")
            }
            Violation::SymbolWidthTooLarge { m_bits, n } => {
                write!(f, "m_bits = {m_bits} must be strictly less than n = {n}")
            }
            Violation::DacResolution { n, n_tilde, n_hat } => {
                write!(
                    f,
                    "DAC resolution {n_tilde} must lie in [n, n_hat] = [{n}, {n_hat}]"
                )
            }
            Violation::AdcResolution { n_hat } => {
                write!(f, "ADC resolution n_hat = {n_hat} must lie in [1, 16]")
            }
            Violation::EffectiveResolution { n } => {
                write!(f, "effective resolution n = {n} must be at least 1")
            }
            Violation::NonPositiveReference { v_ref } => {
                write!(f, "v_ref = {v_ref} V must be positive and finite")
            }
            Violation::NegativeOffset { v_b } => write!(f, "v_b = {v_b} V is negative"),
            Violation::OffsetTooLarge { v_b, max } => {
                write!(f, "v_b = {v_b} V exceeds v_ref/k - v_ref/2^n = {max} V")
            }
            Violation::IntervalOutsideFullScale { lo, hi, v_ref } => {
                write!(
                    f,
                    "loop interval [{lo}, {hi}] V leaves ADC range [0, {v_ref}] V"
                )
            }
        }
    }
}

/// Recommendation the configuration does not follow. Never fatal.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Advisory {
    /// Effective resolution outside the 3..=5 bit sweet spot.
    EffectiveResolutionUnusual { n: u32 },
    /// Symbol width outside 2..=4 bits.
    SymbolWidthUnusual { m_bits: u32 },
    /// `k·v_b` is not near the middle of a code interval; `offset` is the
    /// fractional position in steps (0.5 is ideal).
    OffsetNotHalfway { offset: f64 },
    /// Loop interval comes closer than `margin` to a rail.
    LowRailClearance { clearance: f64, margin: f64 },
}

impl std::fmt::Display for Advisory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Advisory::EffectiveResolutionUnusual { n } => {
                write!(f, "effective resolution n = {n} is outside the recommended 3..5 bits")
            }
            Advisory::SymbolWidthUnusual { m_bits } => {
                write!(f, "symbol width m_bits = {m_bits} is outside the recommended 2..4 bits")
            }
            Advisory::OffsetNotHalfway { offset } => write!(
                f,
                "k*v_b sits at {offset:.3} of a quantization step; aim for 0.5 (halfway between transitions)"
            ),
            Advisory::LowRailClearance { clearance, margin } => write!(
                f,
                "loop interval clearance to rails is {clearance:.4} V, below margin {margin:.4} V"
            ),
        }
    }
}

/// Knobs of the advisory checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Amplifier saturation voltages `(lo, hi)`.
    pub rails: (f64, f64),
    /// Minimum acceptable distance between the loop interval and either rail.
    pub clearance_margin: f64,
    /// Allowed distance of `k·v_b` from the half-step position, in steps.
    pub halfway_tolerance: f64,
}

impl ValidationOptions {
    /// Rails at `[0, v_ref]`, clearance margin of half an effective step and
    /// ±0.25 step around the halfway point.
    pub fn for_config(cfg: &CircuitConfig) -> Self {
        ValidationOptions {
            rails: (0.0, cfg.v_ref),
            clearance_margin: cfg.step() / 2.0,
            halfway_tolerance: 0.25,
        }
    }
}

/// Outcome of [`validate_config`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub advisories: Vec<Advisory>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every hard bound on `cfg` and collect the softer design-rule
/// advisories. Never stops at the first problem.
pub fn validate_config(cfg: &CircuitConfig, opts: &ValidationOptions) -> Validation {
    let mut out = Validation::default();
    let v = &mut out.violations;

    if cfg.n_hat == 0 || cfg.n_hat > 16 {
        v.push(Violation::AdcResolution { n_hat: cfg.n_hat });
    }
    if cfg.n == 0 {
        v.push(Violation::EffectiveResolution { n: cfg.n });
    }
    if !(cfg.n <= cfg.n_tilde && cfg.n_tilde <= cfg.n_hat) {
        v.push(Violation::DacResolution {
            n: cfg.n,
            n_tilde: cfg.n_tilde,
            n_hat: cfg.n_hat,
        });
    }
    if cfg.m_bits >= cfg.n {
        v.push(Violation::SymbolWidthTooLarge {
            m_bits: cfg.m_bits,
            n: cfg.n,
        });
    }
    if cfg.k < 2 {
        v.push(Violation::GainTooSmall { k: cfg.k });
    }
    // n is bounded by n_hat <= 16 only when that check passed; avoid overflow.
    let max_k = 1u64 << cfg.n.min(32);
    if u64::from(cfg.k) > max_k {
        v.push(Violation::GainTooLarge {
            k: cfg.k,
            max: max_k.min(u64::from(u32::MAX)) as u32,
        });
    }
    if cfg.m_bits >= 32 || cfg.k != 1u32 << cfg.m_bits {
        v.push(Violation::GainNotPowerOfTwo {
            k: cfg.k,
            m_bits: cfg.m_bits,
        });
    }

    let reference_ok = cfg.v_ref.is_finite() && cfg.v_ref > 0.0;
    if !reference_ok {
        v.push(Violation::NonPositiveReference { v_ref: cfg.v_ref });
    }
    // Remaining checks need a well-formed resolution and reference.
    if !reference_ok || cfg.n == 0 || cfg.n > 16 || cfg.k == 0 {
        return out;
    }

    let tol = BOUND_EPS * cfg.v_ref;
    if cfg.v_b.is_nan() || cfg.v_b < 0.0 {
        v.push(Violation::NegativeOffset { v_b: cfg.v_b });
    }
    let max_vb = cfg.v_ref / f64::from(cfg.k) - cfg.step();
    if cfg.v_b > max_vb + tol {
        v.push(Violation::OffsetTooLarge {
            v_b: cfg.v_b,
            max: max_vb,
        });
    }
    let (lo, hi) = cfg.interval();
    if lo < -tol || hi > cfg.v_ref + tol {
        v.push(Violation::IntervalOutsideFullScale {
            lo,
            hi,
            v_ref: cfg.v_ref,
        });
    }

    let a = &mut out.advisories;
    if !(3..=5).contains(&cfg.n) {
        a.push(Advisory::EffectiveResolutionUnusual { n: cfg.n });
    }
    if !(2..=4).contains(&cfg.m_bits) {
        a.push(Advisory::SymbolWidthUnusual { m_bits: cfg.m_bits });
    }
    let position = (lo / cfg.step()).rem_euclid(1.0);
    if (position - 0.5).abs() > opts.halfway_tolerance + BOUND_EPS {
        a.push(Advisory::OffsetNotHalfway { offset: position });
    }
    let clearance = (lo - opts.rails.0).min(opts.rails.1 - hi);
    if clearance < opts.clearance_margin {
        a.push(Advisory::LowRailClearance {
            clearance,
            margin: opts.clearance_margin,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(cfg: &CircuitConfig) -> Validation {
        validate_config(cfg, &ValidationOptions::for_config(cfg))
    }

    #[test]
    fn prototype_is_clean() {
        let res = check(&CircuitConfig::PROTOTYPE);
        assert!(res.violations.is_empty(), "{:?}", res.violations);
        assert!(res.advisories.is_empty(), "{:?}", res.advisories);
    }

    #[test]
    fn textbook_is_valid() {
        let res = check(&CircuitConfig::TEXTBOOK);
        assert!(res.is_ok(), "{:?}", res.violations);
    }

    #[test]
    fn offset_above_bound() {
        let cfg = CircuitConfig {
            v_b: 1.3,
            ..CircuitConfig::TEXTBOOK
        };
        let res = check(&cfg);
        let hit = res.violations.iter().find_map(|v| match v {
            Violation::OffsetTooLarge { max, .. } => Some(*max),
            _ => None,
        });
        assert!((hit.expect("offset violation") - 1.25).abs() < 1e-12);
    }

    #[test]
    fn offset_at_bound_is_accepted() {
        let cfg = CircuitConfig {
            v_b: 1.25,
            ..CircuitConfig::TEXTBOOK
        };
        assert!(check(&cfg).is_ok());
    }

    #[test]
    fn unit_gain_rejected() {
        let cfg = CircuitConfig {
            k: 1,
            m_bits: 0,
            ..CircuitConfig::PROTOTYPE
        };
        let res = check(&cfg);
        assert!(res.violations.contains(&Violation::GainTooSmall { k: 1 }));
    }

    #[test]
    fn symbol_width_must_be_below_n() {
        let cfg = CircuitConfig {
            m_bits: 3,
            k: 8,
            ..CircuitConfig::PROTOTYPE
        };
        let res = check(&cfg);
        assert!(res
            .violations
            .contains(&Violation::SymbolWidthTooLarge { m_bits: 3, n: 3 }));
    }

    #[test]
    fn dac_resolution_window() {
        let cfg = CircuitConfig {
            n_tilde: 2,
            ..CircuitConfig::PROTOTYPE
        };
        assert!(matches!(
            check(&cfg).violations[..],
            [Violation::DacResolution { .. }]
        ));
        let cfg = CircuitConfig {
            n_tilde: 11,
            ..CircuitConfig::PROTOTYPE
        };
        assert!(!check(&cfg).is_ok());
    }

    #[test]
    fn negative_offset() {
        let cfg = CircuitConfig {
            v_b: -0.01,
            ..CircuitConfig::PROTOTYPE
        };
        assert!(check(&cfg)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeOffset { .. })));
    }

    #[test]
    fn zero_offset_is_advisory_only() {
        let cfg = CircuitConfig {
            v_b: 0.0,
            ..CircuitConfig::TEXTBOOK
        };
        let res = check(&cfg);
        assert!(res.is_ok());
        assert!(res
            .advisories
            .iter()
            .any(|a| matches!(a, Advisory::OffsetNotHalfway { .. })));
        // interval starts on the rail
        assert!(res
            .advisories
            .iter()
            .any(|a| matches!(a, Advisory::LowRailClearance { .. })));
    }

    #[test]
    fn unusual_resolutions_are_advisories() {
        let cfg = CircuitConfig {
            n_hat: 12,
            n: 6,
            n_tilde: 8,
            m_bits: 1,
            k: 2,
            v_ref: 4.096,
            v_b: 0.032 * 1.5 / 2.0,
        };
        let res = check(&cfg);
        assert!(res.is_ok(), "{:?}", res.violations);
        assert!(res
            .advisories
            .contains(&Advisory::EffectiveResolutionUnusual { n: 6 }));
        assert!(res
            .advisories
            .contains(&Advisory::SymbolWidthUnusual { m_bits: 1 }));
    }

    #[test]
    fn collects_every_violation() {
        let cfg = CircuitConfig {
            n_hat: 3,
            n: 3,
            m_bits: 3,
            n_tilde: 3,
            v_ref: 10.0,
            v_b: 5.0,
            k: 16,
        };
        let res = check(&cfg);
        assert!(res.violations.len() >= 3, "{:?}", res.violations);
    }

    #[test]
    fn derived_map_params() {
        let p = CircuitConfig::TEXTBOOK.map_params();
        assert_eq!(p.alpha, 4);
        assert!((p.beta - 1.28).abs() < 1e-12);
        let p = CircuitConfig::PROTOTYPE.map_params();
        assert!((p.beta - 1.5).abs() < 1e-12);
    }
}
