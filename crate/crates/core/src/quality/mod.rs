// SPDX-License-Identifier: Apache-2.0

//! Output-quality measurements: symbol balance, Markov transition
//! statistics, block entropy, an SP 800-22 subset and the return-map
//! self-diagnostic.

mod entropy;
pub mod nist;
mod reconstruct;
mod report;
mod stats;

pub use entropy::{entropy_profile, marginal_entropy, EntropyProfile, MAX_ORDER};
pub use nist::{nist_subset, Outcome, SuiteResult, ALPHA};
pub use reconstruct::{
    branch_distance, branch_image, default_tolerance, reconstruct_map, tamper_check, BranchFit,
    ReconstructionMap, TamperFlags, TamperOptions, TamperReport, MIN_TRACE_LEN,
};
pub use report::{write_histogram_csv, QualityReport};
pub use stats::{
    chi_square_uniformity, empirical_transition_matrix, symbol_counts, symbol_histogram,
    TransitionEstimate,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QualityError {
    #[error("input is empty")]
    Empty,
    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("symbol {symbol} outside alphabet of {k}")]
    SymbolOutOfRange { symbol: u32, k: u32 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// One named test result. `pass` is `p_value >= 0.01`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub sample_size: usize,
    pub seed: Option<u64>,
}

impl TestReport {
    pub fn new(
        name: impl Into<String>,
        outcome: Outcome,
        sample_size: usize,
        seed: Option<u64>,
    ) -> Self {
        TestReport {
            name: name.into(),
            statistic: outcome.statistic,
            p_value: outcome.p_value,
            pass: outcome.p_value >= ALPHA,
            sample_size,
            seed,
        }
    }
}
