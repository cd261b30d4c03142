// SPDX-License-Identifier: Apache-2.0

//! Symbols to bits, and the two extractors on a biased source.

use chaos_trng::bitstream::{
    extract_symbol, pack, symbols_to_bits, von_neumann, xor_decimate, PostMode, PostProcessor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ones(bits: &[u8]) -> f64 {
    bits.iter().map(|&b| f64::from(b)).sum::<f64>() / bits.len() as f64
}

fn main() {
    // codes 1..5 with M = 2: code 5 folds onto symbol 1
    let codes = [1u32, 2, 3, 4, 5];
    let bits = symbols_to_bits(codes.iter().map(|&m| extract_symbol(m, 2)), 2);
    println!("codes {codes:?} -> bits {bits:?}");
    let buf = pack(&[1, 2, 3, 0], 2);
    println!("packed {:02x?} ({} bits)", buf.bytes, buf.bit_count);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let biased: Vec<u8> = (0..1_000_000)
        .map(|_| u8::from(rng.random_bool(0.7)))
        .collect();
    let vn = von_neumann(&biased);
    let xr = xor_decimate(&biased);
    println!(
        "input   {:>7} bits, ones {:.4}",
        biased.len(),
        ones(&biased)
    );
    println!("vn      {:>7} bits, ones {:.4}", vn.len(), ones(&vn));
    println!("xor     {:>7} bits, ones {:.4}", xr.len(), ones(&xr));

    // streaming gives the same output however the input is chunked
    let mut pp = PostProcessor::new(PostMode::VonNeumann);
    let mut out = Vec::new();
    for chunk in biased.chunks(333) {
        pp.feed(chunk, &mut out);
    }
    println!("streamed vn equal: {}", out == vn);
}
