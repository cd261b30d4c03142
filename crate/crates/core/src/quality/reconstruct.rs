// SPDX-License-Identifier: Apache-2.0

//! Self-diagnostics from the raw `n_hat`-bit codes: the return map
//! `m_hat(n+1)` vs `m_hat(n)` is compared against the branch structure the
//! nominal circuit must produce, and simple occupancy/range checks flag a
//! stuck or tampered loop.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::QualityError;
use crate::chaos_map::{CircuitConfig, MarkovPartition};
use crate::sim::{dac_code, dac_convert, degrade_resolution, Trace};

pub const MIN_TRACE_LEN: usize = 1000;

/// Sparse count matrix of consecutive raw-code pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionMap {
    pub n_hat: u32,
    pub counts: BTreeMap<(u16, u16), u64>,
    pub total: u64,
}

impl ReconstructionMap {
    pub fn from_codes(codes: &[u16], n_hat: u32) -> Self {
        let mut counts = BTreeMap::new();
        for w in codes.windows(2) {
            *counts.entry((w[0], w[1])).or_insert(0) += 1;
        }
        ReconstructionMap {
            n_hat,
            counts,
            total: codes.len().saturating_sub(1) as u64,
        }
    }

    /// `m_hat_n,m_hat_next,count` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m_hat_n,m_hat_next,count")?;
        for (&(a, b), &c) in &self.counts {
            writeln!(out, "{a},{b},{c}")?;
        }
        out.flush()
    }
}

/// Range of raw codes the nominal loop can produce right after code `a`:
/// the image of `a`'s voltage bin through its branch.
pub fn branch_image(cfg: &CircuitConfig, a: u16) -> (f64, f64) {
    let rs = cfg.raw_step();
    let m = degrade_resolution(cfg, a);
    let v_dac = dac_convert(cfg, dac_code(cfg, m)).expect("code fits DAC");
    let k = f64::from(cfg.k);
    let lo = k * (f64::from(a) * rs - v_dac + cfg.v_b) / rs;
    let hi = k * (f64::from(a + 1) * rs - v_dac + cfg.v_b) / rs;
    // codes floor(lo) ..= ceil(hi) - 1
    ((lo + 1e-9).floor(), (hi - 1e-9).ceil() - 1.0)
}

/// Distance in raw codes from `b` to the branch image of `a`; zero when the
/// transition is exactly on a branch.
pub fn branch_distance(cfg: &CircuitConfig, a: u16, b: u16) -> f64 {
    let (lo, hi) = branch_image(cfg, a);
    let b = f64::from(b);
    (lo - b).max(b - hi).max(0.0)
}

/// Default branch tolerance: two effective steps' worth of raw codes.
pub fn default_tolerance(cfg: &CircuitConfig) -> f64 {
    2.0 * f64::from(1u32 << cfg.adc_shift())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchFit {
    /// Fraction of transitions within `tolerance` of a branch.
    pub score: f64,
    pub tolerance: f64,
    pub transitions: u64,
    pub off_branch: u64,
}

/// Build the return map of `codes` and score it against the branches of
/// `cfg`.
pub fn reconstruct_map(
    codes: &[u16],
    cfg: &CircuitConfig,
    tolerance: f64,
) -> Result<(ReconstructionMap, BranchFit), QualityError> {
    if codes.len() < MIN_TRACE_LEN {
        return Err(QualityError::InsufficientData {
            needed: MIN_TRACE_LEN,
            got: codes.len(),
        });
    }
    let map = ReconstructionMap::from_codes(codes, cfg.n_hat);
    let off_branch: u64 = map
        .counts
        .iter()
        .filter(|(&(a, b), _)| branch_distance(cfg, a, b) > tolerance)
        .map(|(_, &c)| c)
        .sum();
    let fit = BranchFit {
        score: 1.0 - off_branch as f64 / map.total as f64,
        tolerance,
        transitions: map.total,
        off_branch,
    };
    Ok((map, fit))
}

/// Diagnostic flags, wire-encoded as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct TamperFlags(u8);

impl TamperFlags {
    pub const STUCK: TamperFlags = TamperFlags(0x01);
    pub const OUT_OF_RANGE: TamperFlags = TamperFlags(0x02);
    pub const OFF_BRANCH: TamperFlags = TamperFlags(0x04);
    pub const SATURATION: TamperFlags = TamperFlags(0x08);

    const NAMES: [(TamperFlags, &'static str); 4] = [
        (Self::STUCK, "STUCK"),
        (Self::OUT_OF_RANGE, "OUT_OF_RANGE"),
        (Self::OFF_BRANCH, "OFF_BRANCH"),
        (Self::SATURATION, "SATURATION"),
    ];

    pub const fn empty() -> Self {
        TamperFlags(0)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn from_bits_truncate(bits: u8) -> Self {
        TamperFlags(bits & 0x0f)
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, other: TamperFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: TamperFlags) {
        self.0 |= other.0;
    }

    pub fn names(self) -> Vec<&'static str> {
        Self::NAMES
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|&(_, n)| n)
            .collect()
    }
}

impl std::ops::BitOr for TamperFlags {
    type Output = TamperFlags;

    fn bitor(self, rhs: Self) -> Self {
        TamperFlags(self.0 | rhs.0)
    }
}

impl fmt::Display for TamperFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&self.names().join("|"))
        }
    }
}

impl Serialize for TamperFlags {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.names())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TamperOptions {
    pub tolerance: f64,
    /// OFF_BRANCH is raised below this score.
    pub min_score: f64,
    /// STUCK is raised when one state holds more than this fraction.
    pub max_occupancy: f64,
}

impl TamperOptions {
    pub fn for_config(cfg: &CircuitConfig) -> Self {
        TamperOptions {
            tolerance: default_tolerance(cfg),
            min_score: 0.99,
            max_occupancy: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TamperReport {
    pub flags: TamperFlags,
    pub fit: BranchFit,
    /// Largest fraction of cycles spent in one state (out-of-range codes
    /// count as their own state).
    pub max_occupancy: f64,
    pub out_of_range: u64,
    pub saturation_events: u64,
}

pub fn tamper_check(
    trace: &Trace,
    cfg: &CircuitConfig,
    opts: &TamperOptions,
) -> Result<TamperReport, QualityError> {
    let partition =
        MarkovPartition::from_config(cfg).map_err(|e| QualityError::BadParameter(e.to_string()))?;
    let raw: Vec<u16> = trace.raw_codes().collect();
    let (_, fit) = reconstruct_map(&raw, cfg, opts.tolerance)?;

    let k = cfg.k as usize;
    let mut occupancy = vec![0u64; k + (1usize << cfg.n)];
    let mut out_of_range = 0u64;
    for m in trace.codes() {
        match partition.state_from_code(i64::from(m)) {
            Ok(s) => occupancy[s.index()] += 1,
            Err(_) => {
                out_of_range += 1;
                occupancy[k + usize::from(m)] += 1;
            }
        }
    }
    let max_occupancy = *occupancy.iter().max().unwrap_or(&0) as f64 / trace.records.len() as f64;

    let mut flags = TamperFlags::empty();
    if max_occupancy > opts.max_occupancy {
        flags.insert(TamperFlags::STUCK);
    }
    if out_of_range > 0 {
        flags.insert(TamperFlags::OUT_OF_RANGE);
    }
    if fit.score < opts.min_score {
        flags.insert(TamperFlags::OFF_BRANCH);
    }
    if trace.saturation_events > 0 {
        flags.insert(TamperFlags::SATURATION);
    }
    Ok(TamperReport {
        flags,
        fit,
        max_occupancy,
        out_of_range,
        saturation_events: trace.saturation_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_trajectory, Initial, NonIdealities, TraceRecord};

    fn record(cycle: u64, m_hat: u16, cfg: &CircuitConfig) -> TraceRecord {
        TraceRecord {
            cycle,
            v_in: 0.0,
            m_hat,
            m: degrade_resolution(cfg, m_hat),
            v_out: 0.0,
        }
    }

    #[test]
    fn branch_image_matches_hand_evaluation() {
        // textbook: code 2 spans [2.5, 3.75) V -> v_out in [1.6, 6.6) V,
        // i.e. raw codes 1..=5 (0.8 codes per volt)
        let cfg = CircuitConfig::TEXTBOOK;
        assert_eq!(branch_image(&cfg, 2), (1.0, 5.0));
        assert_eq!(branch_distance(&cfg, 2, 7), 2.0);
        assert_eq!(branch_distance(&cfg, 2, 4), 0.0);
        // prototype: code 300 (m = 2) spans [1.2, 1.204) V
        // -> [4·(1.2 − 1.024 + 0.192), 4·(1.204 − 1.024 + 0.192)) = [1.472, 1.488) V
        // -> raw codes 368..=371
        let cfg = CircuitConfig::PROTOTYPE;
        assert_eq!(branch_image(&cfg, 300), (368.0, 371.0));
    }

    #[test]
    fn total_is_samples_minus_one() {
        let codes: Vec<u16> = (0..1500).map(|i| (i % 700) as u16).collect();
        let (map, _) = reconstruct_map(&codes, &CircuitConfig::PROTOTYPE, 256.0).unwrap();
        assert_eq!(map.total, 1499);
        assert_eq!(map.counts.values().sum::<u64>(), 1499);
    }

    #[test]
    fn short_traces_rejected() {
        assert!(matches!(
            reconstruct_map(&[1; 999], &CircuitConfig::PROTOTYPE, 1.0),
            Err(QualityError::InsufficientData { .. })
        ));
    }

    #[test]
    fn zero_noise_traces_fit_exactly() {
        for cfg in [CircuitConfig::PROTOTYPE, CircuitConfig::TEXTBOOK] {
            let ni = NonIdealities::ideal(&cfg).with_seed(11);
            let trace = run_trajectory(&cfg, &ni, 5000, Initial::Random).unwrap();
            let raw: Vec<u16> = trace.raw_codes().collect();
            let (_, fit) = reconstruct_map(&raw, &cfg, 0.0).unwrap();
            assert_eq!(fit.score, 1.0, "{cfg:?}");
        }
    }

    #[test]
    fn constant_code_is_stuck() {
        let cfg = CircuitConfig::PROTOTYPE;
        let trace = Trace {
            records: (0..2000).map(|i| record(i, 300, &cfg)).collect(),
            saturation_events: 0,
        };
        let rep = tamper_check(&trace, &cfg, &TamperOptions::for_config(&cfg)).unwrap();
        assert!(rep.flags.contains(TamperFlags::STUCK));
        assert!(!rep.flags.contains(TamperFlags::OUT_OF_RANGE));
    }

    #[test]
    fn code_seven_is_out_of_range() {
        let cfg = CircuitConfig::PROTOTYPE;
        let ni = NonIdealities::default_for(&cfg).with_seed(5);
        let mut trace = run_trajectory(&cfg, &ni, 2000, Initial::Random).unwrap();
        trace.records[100] = record(100, 7 << 7, &cfg);
        let rep = tamper_check(&trace, &cfg, &TamperOptions::for_config(&cfg)).unwrap();
        assert!(rep.flags.contains(TamperFlags::OUT_OF_RANGE));
        assert_eq!(rep.out_of_range, 1);
    }

    #[test]
    fn healthy_run_raises_nothing() {
        let cfg = CircuitConfig::PROTOTYPE;
        let ni = NonIdealities::default_for(&cfg).with_seed(9);
        let trace = run_trajectory(&cfg, &ni, 10_000, Initial::Random).unwrap();
        let rep = tamper_check(&trace, &cfg, &TamperOptions::for_config(&cfg)).unwrap();
        assert!(rep.flags.is_empty(), "{rep:?}");
    }

    #[test]
    fn saturation_is_reported() {
        let cfg = CircuitConfig::PROTOTYPE;
        let ni = NonIdealities::default_for(&cfg).with_seed(9);
        let mut trace = run_trajectory(&cfg, &ni, 2000, Initial::Random).unwrap();
        trace.saturation_events = 3;
        let rep = tamper_check(&trace, &cfg, &TamperOptions::for_config(&cfg)).unwrap();
        assert_eq!(rep.flags, TamperFlags::SATURATION);
    }

    #[test]
    fn flag_names() {
        let f = TamperFlags::STUCK | TamperFlags::OFF_BRANCH;
        assert_eq!(f.bits(), 0x05);
        assert_eq!(f.to_string(), "STUCK|OFF_BRANCH");
        assert_eq!(TamperFlags::empty().to_string(), "none");
        assert_eq!(TamperFlags::from_bits_truncate(0xff).bits(), 0x0f);
    }
}
