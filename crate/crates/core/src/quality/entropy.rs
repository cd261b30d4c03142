// SPDX-License-Identifier: Apache-2.0

//! Block-entropy rate of a bitstream: `H_L / L` over non-overlapping `L`-bit
//! words. The conservative figure is the minimum over `L = 1..=8`.

use serde::Serialize;

use super::QualityError;

/// Words of each length needed per possible word value.
pub const WORDS_PER_BIN: usize = 100;

pub const MAX_ORDER: u32 = 8;

/// `H_L / L` in bits of entropy per bit. Needs at least `100·2^L` words.
pub fn marginal_entropy(bits: &[u8], order: u32) -> Result<f64, QualityError> {
    if order == 0 || order > 24 {
        return Err(QualityError::BadParameter(format!(
            "entropy order {order} must lie in 1..=24"
        )));
    }
    let l = order as usize;
    let words = bits.len() / l;
    let needed = WORDS_PER_BIN << order;
    if words < needed {
        return Err(QualityError::InsufficientData {
            needed: needed * l,
            got: bits.len(),
        });
    }
    let mut counts = vec![0u64; 1 << order];
    for w in bits.chunks_exact(l) {
        let v = w
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        counts[v] += 1;
    }
    let n = words as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    Ok((h / order as f64).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProfile {
    /// `(L, H_L/L)` for every order that had enough data.
    pub rates: Vec<(u32, f64)>,
    pub min: f64,
}

/// Rates for `L = 1..=max_order`; orders lacking data are skipped, but at
/// least `L = 1` must be computable.
pub fn entropy_profile(bits: &[u8], max_order: u32) -> Result<EntropyProfile, QualityError> {
    let mut rates = Vec::new();
    for l in 1..=max_order {
        match marginal_entropy(bits, l) {
            Ok(h) => rates.push((l, h)),
            Err(QualityError::InsufficientData { .. }) if l > 1 => break,
            Err(e) => return Err(e),
        }
    }
    let min = rates.iter().map(|&(_, h)| h).fold(f64::INFINITY, f64::min);
    Ok(EntropyProfile { rates, min })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stream_has_no_entropy() {
        let bits = vec![0u8; 204_800];
        for l in 1..=8 {
            assert_eq!(marginal_entropy(&bits, l).unwrap(), 0.0);
        }
    }

    #[test]
    fn alternation_is_caught_at_order_two() {
        let bits: Vec<u8> = (0..10_000).map(|i| (i % 2) as u8).collect();
        assert!((marginal_entropy(&bits, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(marginal_entropy(&bits, 2).unwrap(), 0.0);
    }

    #[test]
    fn uniform_words_reach_one_bit() {
        // de Bruijn-free construction: every 8-bit word exactly 200 times.
        let mut bits = Vec::new();
        for _ in 0..200 {
            for w in 0u32..256 {
                for b in (0..8).rev() {
                    bits.push(((w >> b) & 1) as u8);
                }
            }
        }
        assert!((marginal_entropy(&bits, 8).unwrap() - 1.0).abs() < 1e-12);
        // order 4 sees each 4-bit word equally often as well
        assert!((marginal_entropy(&bits, 4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_input_is_rejected() {
        let bits = vec![1u8; 199];
        assert!(matches!(
            marginal_entropy(&bits, 1),
            Err(QualityError::InsufficientData {
                needed: 200,
                got: 199
            })
        ));
        assert!(marginal_entropy(&bits, 0).is_err());
    }

    #[test]
    fn profile_stops_when_data_runs_out() {
        let bits: Vec<u8> = (0..1000).map(|i| ((i * 7 / 3) % 2) as u8).collect();
        let p = entropy_profile(&bits, 8).unwrap();
        // 1000 bits: L=1 needs 200, L=2 needs 800, L=3 needs 2400
        assert_eq!(p.rates.len(), 2);
        assert!(p.min <= 1.0);
    }
}
