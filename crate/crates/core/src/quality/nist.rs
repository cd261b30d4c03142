// SPDX-License-Identifier: Apache-2.0

//! Subset of the SP 800-22 battery: frequency, block frequency, runs,
//! longest run of ones, cumulative sums, serial and approximate entropy.
//!
//! The individual tests only enforce what their formulas need; the
//! [`nist_subset`] runner applies the recommended minimum lengths and
//! parameter choices.

use std::f64::consts::{LN_2, SQRT_2};

use serde::Serialize;
use statrs::function::erf::erfc;

use super::stats::igamc;
use super::{QualityError, TestReport};

pub const ALPHA: f64 = 0.01;

/// Statistic and p-value of a single test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub statistic: f64,
    pub p_value: f64,
}

impl Outcome {
    fn new(statistic: f64, p_value: f64) -> Self {
        Outcome {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
        }
    }

    pub fn passed(&self) -> bool {
        self.p_value >= ALPHA
    }
}

fn need(bits: &[u8], n: usize) -> Result<(), QualityError> {
    if bits.len() < n {
        Err(QualityError::InsufficientData {
            needed: n,
            got: bits.len(),
        })
    } else {
        Ok(())
    }
}

fn ones(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b != 0).count()
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Frequency (monobit). Statistic: `|S_n| / sqrt(n)`.
pub fn frequency(bits: &[u8]) -> Result<Outcome, QualityError> {
    need(bits, 1)?;
    let n = bits.len() as f64;
    let s = 2.0 * ones(bits) as f64 - n;
    let s_obs = s.abs() / n.sqrt();
    Ok(Outcome::new(s_obs, erfc(s_obs / SQRT_2)))
}

/// Frequency within blocks of `m` bits. Statistic: chi-square.
pub fn block_frequency(bits: &[u8], m: usize) -> Result<Outcome, QualityError> {
    if m == 0 {
        return Err(QualityError::BadParameter(
            "block length must be positive".into(),
        ));
    }
    need(bits, m)?;
    let blocks = bits.len() / m;
    let chi: f64 = bits
        .chunks_exact(m)
        .map(|blk| {
            let pi = ones(blk) as f64 / m as f64 - 0.5;
            pi * pi
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    Ok(Outcome::new(chi, igamc(blocks as f64 / 2.0, chi / 2.0)))
}

/// Runs test. Statistic: total number of runs `V_n`. When the frequency
/// prerequisite fails the p-value is 0.
pub fn runs(bits: &[u8]) -> Result<Outcome, QualityError> {
    need(bits, 2)?;
    let n = bits.len() as f64;
    let pi = ones(bits) as f64 / n;
    let v = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = v as f64;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(Outcome::new(v, 0.0));
    }
    let num = (v - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Ok(Outcome::new(v, erfc(num / den)))
}

struct LongestRunTable {
    block: usize,
    /// Run length mapped to class 0.
    v_min: usize,
    probs: &'static [f64],
}

const LONGEST_RUN_TABLES: [LongestRunTable; 3] = [
    LongestRunTable {
        block: 10_000,
        v_min: 10,
        probs: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
    },
    LongestRunTable {
        block: 128,
        v_min: 4,
        probs: &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124],
    },
    LongestRunTable {
        block: 8,
        v_min: 1,
        probs: &[0.21484375, 0.3671875, 0.23046875, 0.1875],
    },
];

/// Longest run of ones in a block. Block length follows the input size
/// (8 for n ≥ 128, 128 for n ≥ 6272, 10^4 for n ≥ 750000). Statistic:
/// chi-square.
pub fn longest_run_of_ones(bits: &[u8]) -> Result<Outcome, QualityError> {
    need(bits, 128)?;
    let n = bits.len();
    let table = if n >= 750_000 {
        &LONGEST_RUN_TABLES[0]
    } else if n >= 6272 {
        &LONGEST_RUN_TABLES[1]
    } else {
        &LONGEST_RUN_TABLES[2]
    };
    let classes = table.probs.len();
    let mut nu = vec![0u64; classes];
    let blocks = n / table.block;
    for blk in bits.chunks_exact(table.block) {
        let (mut best, mut cur) = (0usize, 0usize);
        for &b in blk {
            if b != 0 {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        let class = best.saturating_sub(table.v_min).min(classes - 1);
        nu[class] += 1;
    }
    let nb = blocks as f64;
    let chi: f64 = nu
        .iter()
        .zip(table.probs)
        .map(|(&c, &p)| {
            let e = nb * p;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let k = (classes - 1) as f64;
    Ok(Outcome::new(chi, igamc(k / 2.0, chi / 2.0)))
}

/// Cumulative sums, forward (`reverse == false`) or backward. Statistic: the
/// maximal excursion `z`.
pub fn cumulative_sums(bits: &[u8], reverse: bool) -> Result<Outcome, QualityError> {
    need(bits, 1)?;
    let step = |b: &u8| if *b != 0 { 1i64 } else { -1 };
    let mut s = 0i64;
    let mut z = 0i64;
    let mut visit = |b: &u8| {
        s += step(b);
        z = z.max(s.abs());
    };
    if reverse {
        bits.iter().rev().for_each(&mut visit);
    } else {
        bits.iter().for_each(&mut visit);
    }
    let n = bits.len() as f64;
    let z = z as f64;
    let sq = n.sqrt();
    let mut sum1 = 0.0;
    let start = ((-n / z + 1.0) / 4.0).floor() as i64;
    let end = ((n / z - 1.0) / 4.0).floor() as i64;
    for k in start..=end {
        let k = k as f64;
        sum1 += phi((4.0 * k + 1.0) * z / sq) - phi((4.0 * k - 1.0) * z / sq);
    }
    let mut sum2 = 0.0;
    let start = ((-n / z - 3.0) / 4.0).floor() as i64;
    for k in start..=end {
        let k = k as f64;
        sum2 += phi((4.0 * k + 3.0) * z / sq) - phi((4.0 * k + 1.0) * z / sq);
    }
    Ok(Outcome::new(z, 1.0 - sum1 + sum2))
}

/// Counts of every overlapping `m`-bit word over the cyclically extended
/// sequence. Index = word with the earliest bit most significant.
fn cyclic_word_counts(bits: &[u8], m: u32) -> Vec<u64> {
    let mut counts = vec![0u64; 1usize << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let mask = (1usize << m) - 1;
    let n = bits.len();
    let mut word = 0usize;
    for &b in bits.iter().take(m as usize - 1) {
        word = (word << 1) | usize::from(b & 1);
    }
    for i in 0..n {
        let b = bits[(i + m as usize - 1) % n];
        word = ((word << 1) | usize::from(b & 1)) & mask;
        counts[word] += 1;
    }
    counts
}

/// Collapse `m`-bit counts to `(m-1)`-bit counts by dropping the last bit.
fn marginalize(counts: &[u64]) -> Vec<u64> {
    counts.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}

fn psi_sq(counts: &[u64], n: usize) -> f64 {
    if counts.len() <= 1 {
        return 0.0;
    }
    let n = n as f64;
    let sum: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    counts.len() as f64 / n * sum - n
}

/// Serial test with pattern length `m` (≥ 2). Returns both p-values;
/// statistics are `∇ψ²_m` and `∇²ψ²_m`.
pub fn serial(bits: &[u8], m: u32) -> Result<[Outcome; 2], QualityError> {
    if !(2..=24).contains(&m) {
        return Err(QualityError::BadParameter(format!(
            "serial pattern length {m} must lie in 2..=24"
        )));
    }
    need(bits, m as usize)?;
    let n = bits.len();
    let c0 = cyclic_word_counts(bits, m);
    let c1 = marginalize(&c0);
    let c2 = marginalize(&c1);
    let (p0, p1, p2) = (psi_sq(&c0, n), psi_sq(&c1, n), psi_sq(&c2, n));
    let d1 = p0 - p1;
    let d2 = p0 - 2.0 * p1 + p2;
    let a1 = f64::from(1u32 << (m - 1)) / 2.0;
    let a2 = f64::from(1u32 << (m - 1)) / 4.0;
    Ok([
        Outcome::new(d1, igamc(a1, d1 / 2.0)),
        Outcome::new(d2, igamc(a2, d2 / 2.0)),
    ])
}

fn phi_m(counts: &[u64], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

/// Approximate entropy with block length `m` (≥ 1). Statistic: chi-square.
pub fn approximate_entropy(bits: &[u8], m: u32) -> Result<Outcome, QualityError> {
    if !(1..=23).contains(&m) {
        return Err(QualityError::BadParameter(format!(
            "approximate entropy block length {m} must lie in 1..=23"
        )));
    }
    need(bits, m as usize + 1)?;
    let n = bits.len();
    let upper = cyclic_word_counts(bits, m + 1);
    let lower = marginalize(&upper);
    let ap_en = phi_m(&lower, n) - phi_m(&upper, n);
    let chi = 2.0 * n as f64 * (LN_2 - ap_en);
    Ok(Outcome::new(
        chi,
        igamc(f64::from(1u32 << (m - 1)), chi / 2.0),
    ))
}

/// Minimum sequence length the runner accepts for each test.
pub const MIN_LEN_FREQUENCY: usize = 100;
pub const MIN_LEN_LONGEST_RUN: usize = 128;
/// Approximate entropy needs `m ≥ 2` with `m < log2(n) − 5`.
pub const MIN_LEN_APPROX_ENTROPY: usize = 256;
/// Serial needs `m ≥ 2` with `m < log2(n) − 2`.
pub const MIN_LEN_SERIAL: usize = 32;

pub const BLOCK_FREQUENCY_LEN: usize = 128;
pub const SERIAL_MAX_M: u32 = 16;
pub const APPROX_ENTROPY_MAX_M: u32 = 10;

/// Reports of the runner, plus tests that could not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub reports: Vec<TestReport>,
    pub skipped: Vec<(String, String)>,
}

impl SuiteResult {
    pub fn all_passed(&self) -> bool {
        self.skipped.is_empty() && self.reports.iter().all(|r| r.pass)
    }
}

fn log2_floor(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

/// Run the whole subset with the recommended parameters. Cumulative sums
/// and serial produce two reports each.
pub fn nist_subset(bits: &[u8], seed: Option<u64>) -> SuiteResult {
    let n = bits.len();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut record =
        |name: &str, min: usize, run: &dyn Fn() -> Result<Vec<Outcome>, QualityError>| {
            let res = if n < min {
                Err(QualityError::InsufficientData {
                    needed: min,
                    got: n,
                })
            } else {
                run()
            };
            match res {
                Ok(outcomes) => {
                    let multi = outcomes.len() > 1;
                    for (i, o) in outcomes.into_iter().enumerate() {
                        let name = if multi {
                            format!("{name}_{}", i + 1)
                        } else {
                            name.to_string()
                        };
                        reports.push(TestReport::new(name, o, n, seed));
                    }
                }
                Err(e) => skipped.push((name.to_string(), e.to_string())),
            }
        };

    record("frequency", MIN_LEN_FREQUENCY, &|| {
        Ok(vec![frequency(bits)?])
    });
    record("block_frequency", MIN_LEN_FREQUENCY, &|| {
        Ok(vec![block_frequency(
            bits,
            BLOCK_FREQUENCY_LEN.min(n / 5).max(20),
        )?])
    });
    record("runs", MIN_LEN_FREQUENCY, &|| Ok(vec![runs(bits)?]));
    record("longest_run", MIN_LEN_LONGEST_RUN, &|| {
        Ok(vec![longest_run_of_ones(bits)?])
    });
    record("cumulative_sums", MIN_LEN_FREQUENCY, &|| {
        Ok(vec![
            cumulative_sums(bits, false)?,
            cumulative_sums(bits, true)?,
        ])
    });
    record("serial", MIN_LEN_SERIAL, &|| {
        let m = SERIAL_MAX_M.min(log2_floor(n) - 3);
        Ok(serial(bits, m)?.to_vec())
    });
    record("approximate_entropy", MIN_LEN_APPROX_ENTROPY, &|| {
        let m = APPROX_ENTROPY_MAX_M.min(log2_floor(n) - 6);
        Ok(vec![approximate_entropy(bits, m)?])
    });
    SuiteResult { reports, skipped }
}
