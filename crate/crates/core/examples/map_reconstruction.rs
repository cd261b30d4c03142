// SPDX-License-Identifier: Apache-2.0

//! Return map of the raw ADC codes, healthy and under attack.

use chaos_trng::quality::{reconstruct_map, tamper_check, TamperOptions};
use chaos_trng::sim::{Fault, Initial, NonIdealities, Simulator, Trace};
use chaos_trng::CircuitConfig;

/// Coarse ASCII scatter of (m_hat(n), m_hat(n+1)).
fn plot(trace: &Trace) {
    const W: usize = 64;
    const H: usize = 24;
    let mut grid = [[0u32; W]; H];
    let raw: Vec<u16> = trace.raw_codes().collect();
    for p in raw.windows(2) {
        let x = usize::from(p[0]) * W / 1024;
        let y = usize::from(p[1]) * H / 1024;
        grid[H - 1 - y][x] += 1;
    }
    for row in grid {
        let line: String = row
            .iter()
            .map(|&c| match c {
                0 => ' ',
                1..=3 => '.',
                4..=30 => '+',
                _ => '#',
            })
            .collect();
        println!("|{line}|");
    }
}

fn main() {
    let cfg = CircuitConfig::PROTOTYPE;
    let opts = TamperOptions::for_config(&cfg);
    let ni = NonIdealities::default_for(&cfg).with_seed(5);

    for (name, fault) in [
        ("healthy", Fault::None),
        ("5% random codes", Fault::RandomCodes(0.05)),
        ("stuck at 300", Fault::StuckCode(300)),
    ] {
        let mut sim = Simulator::new(cfg, ni, Initial::Random).unwrap();
        sim.set_fault(fault);
        let trace = sim.run(20_000);
        let raw: Vec<u16> = trace.raw_codes().collect();
        let (map, fit) = reconstruct_map(&raw, &cfg, opts.tolerance).unwrap();
        let report = tamper_check(&trace, &cfg, &opts).unwrap();
        println!(
            "{name}: {} distinct pairs, score {:.4}, flags [{}]",
            map.counts.len(),
            fit.score,
            report.flags
        );
        if matches!(fault, Fault::None) {
            plot(&trace);
        }
    }
}
