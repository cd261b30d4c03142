// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};

use serde::Serialize;

use super::{entropy_profile, nist_subset, EntropyProfile, TestReport, MAX_ORDER};
use crate::bitstream::extract_symbol;
use crate::config::RunConfig;

/// Machine-readable summary of a bitstream: provenance, block entropy and one
/// record per statistical test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    /// Run that produced the data, when known. Without it the report is not
    /// reproducible.
    pub provenance: Option<RunConfig>,
    pub seed: Option<u64>,
    pub sample_bits: usize,
    pub ones_fraction: f64,
    pub entropy: Option<EntropyProfile>,
    pub tests: Vec<TestReport>,
    pub skipped: Vec<(String, String)>,
    pub all_passed: bool,
}

impl QualityReport {
    pub fn evaluate(bits: &[u8], provenance: Option<RunConfig>) -> Self {
        let seed = provenance.as_ref().map(RunConfig::seed);
        let suite = nist_subset(bits, seed);
        let ones = bits.iter().filter(|&&b| b != 0).count();
        QualityReport {
            seed,
            sample_bits: bits.len(),
            ones_fraction: if bits.is_empty() {
                0.0
            } else {
                ones as f64 / bits.len() as f64
            },
            entropy: entropy_profile(bits, MAX_ORDER).ok(),
            all_passed: suite.all_passed(),
            tests: suite.reports,
            skipped: suite.skipped,
            provenance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `m,symbol,count,frequency` rows for every effective code seen.
pub fn write_histogram_csv<W: Write>(codes: &[u16], m_bits: u32, mut out: W) -> io::Result<()> {
    let mut counts = std::collections::BTreeMap::<u16, u64>::new();
    for &m in codes {
        *counts.entry(m).or_insert(0) += 1;
    }
    let total = codes.len().max(1) as f64;
    writeln!(out, "m,symbol,count,frequency")?;
    for (m, c) in counts {
        writeln!(
            out,
            "{m},{},{c},{:.6}",
            extract_symbol(u32::from(m), m_bits),
            c as f64 / total
        )?;
    }
    out.flush()
}
