// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use super::QualityError;

/// Upper regularized incomplete gamma `Q(a, x)`, tolerant of tiny negative
/// `x` produced by rounding.
pub(crate) fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(a, x).clamp(0.0, 1.0)
}

/// Relative frequency of each of the `k` symbols.
pub fn symbol_histogram(symbols: &[u32], k: u32) -> Result<Vec<f64>, QualityError> {
    let counts = symbol_counts(symbols, k)?;
    let n = symbols.len() as f64;
    Ok(counts.iter().map(|&c| c as f64 / n).collect())
}

pub fn symbol_counts(symbols: &[u32], k: u32) -> Result<Vec<u64>, QualityError> {
    if symbols.is_empty() {
        return Err(QualityError::Empty);
    }
    let mut counts = vec![0u64; k as usize];
    for &s in symbols {
        if s >= k {
            return Err(QualityError::SymbolOutOfRange { symbol: s, k });
        }
        counts[s as usize] += 1;
    }
    Ok(counts)
}

/// Pearson chi-square against the uniform distribution over the bins.
/// Returns `(statistic, p_value)` with `bins - 1` degrees of freedom.
pub fn chi_square_uniformity(counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let expected = n as f64 / counts.len() as f64;
    if counts.len() < 2 || n == 0 {
        return (0.0, 1.0);
    }
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let df = (counts.len() - 1) as f64;
    (stat, igamc(df / 2.0, stat / 2.0))
}

/// Row-normalized transition counts between consecutive states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionEstimate {
    pub counts: Vec<Vec<u64>>,
    pub probabilities: Vec<Vec<f64>>,
    /// Rows never left; their probabilities are all zero.
    pub empty_rows: Vec<usize>,
}

impl TransitionEstimate {
    /// Largest absolute gap between any entry and `target`, over non-empty
    /// rows.
    pub fn max_deviation(&self, target: f64) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.empty_rows.contains(i))
            .flat_map(|(_, row)| row.iter().map(|p| (p - target).abs()))
            .fold(0.0, f64::max)
    }

    /// Chi-square uniformity p-value of every row (1.0 for empty rows).
    pub fn row_p_values(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|row| chi_square_uniformity(row).1)
            .collect()
    }
}

pub fn empirical_transition_matrix(
    states: &[u32],
    k: u32,
) -> Result<TransitionEstimate, QualityError> {
    if states.len() < 2 {
        return Err(QualityError::InsufficientData {
            needed: 2,
            got: states.len(),
        });
    }
    let k = k as usize;
    let mut counts = vec![vec![0u64; k]; k];
    for w in states.windows(2) {
        let (from, to) = (w[0] as usize, w[1] as usize);
        if from >= k || to >= k {
            return Err(QualityError::SymbolOutOfRange {
                symbol: from.max(to) as u32,
                k: k as u32,
            });
        }
        counts[from][to] += 1;
    }
    let mut empty_rows = Vec::new();
    let probabilities = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                empty_rows.push(i);
                vec![0.0; k]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect();
    Ok(TransitionEstimate {
        counts,
        probabilities,
        empty_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_examples() {
        assert_eq!(
            symbol_histogram(&[2; 10], 4).unwrap(),
            vec![0.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(symbol_histogram(&[0, 1, 2, 3], 4).unwrap(), vec![0.25; 4]);
        assert_eq!(symbol_histogram(&[], 4), Err(QualityError::Empty));
        assert!(matches!(
            symbol_histogram(&[4], 4),
            Err(QualityError::SymbolOutOfRange { symbol: 4, k: 4 })
        ));
    }

    #[test]
    fn chi_square_reference_values() {
        // scipy.stats.chisquare([30, 20, 25, 25]) -> (2.0, 0.5724067)
        let (stat, p) = chi_square_uniformity(&[30, 20, 25, 25]);
        assert!((stat - 2.0).abs() < 1e-12);
        assert!((p - 0.572_406_7).abs() < 1e-6);
        let (_, p) = chi_square_uniformity(&[100, 0, 0, 0]);
        assert!(p < 1e-10);
    }

    #[test]
    fn transitions_of_alternator() {
        let est = empirical_transition_matrix(&[0, 1, 0, 1], 2).unwrap();
        assert_eq!(est.probabilities, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(est.empty_rows.is_empty());
        let est = empirical_transition_matrix(&[0, 1, 0, 1], 4).unwrap();
        assert_eq!(est.empty_rows, vec![2, 3]);
        assert_eq!(est.max_deviation(0.5), 0.5);
    }

    #[test]
    fn transitions_need_two_states() {
        assert!(matches!(
            empirical_transition_matrix(&[1], 4),
            Err(QualityError::InsufficientData { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn rows_sum_to_one() {
        let states: Vec<u32> = (0..1000u32).map(|i| (i * 7 + i / 3) % 4).collect();
        let est = empirical_transition_matrix(&states, 4).unwrap();
        for row in &est.probabilities {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
