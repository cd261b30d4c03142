// SPDX-License-Identifier: Apache-2.0

//! Generate a post-processed stream and run the quality suite on it.
//! Pass a bit count to change the sample size.

use chaos_trng::bitstream::PostMode;
use chaos_trng::generator::EntropySource;
use chaos_trng::quality::QualityReport;
use chaos_trng::RunConfig;

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);
    let mut rc = RunConfig {
        post: PostMode::VonNeumann,
        bits: n,
        ..RunConfig::default()
    };
    rc.nonideal.seed = 11;

    let mut src = EntropySource::new(&rc).unwrap();
    let bits = src.next_bits(n);
    let rep = QualityReport::evaluate(&bits, Some(rc));
    println!(
        "{} bits from {} cycles",
        rep.sample_bits,
        src.simulator().state().cycle
    );
    if let Some(e) = &rep.entropy {
        for (l, h) in &e.rates {
            println!("H_{l}/{l} = {h:.5}");
        }
    }
    for t in &rep.tests {
        println!(
            "{:<20} {:>10.4} p = {:.4} {}",
            t.name,
            t.statistic,
            t.p_value,
            if t.pass { "pass" } else { "FAIL" }
        );
    }
    for (name, why) in &rep.skipped {
        println!("{name:<20} skipped: {why}");
    }
}
