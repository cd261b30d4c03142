// SPDX-License-Identifier: Apache-2.0

//! Run the prototype loop with its default noise and look at the trace.

use chaos_trng::bitstream::extract_symbol;
use chaos_trng::sim::{write_trace_csv, Initial, NonIdealities, Simulator};
use chaos_trng::CircuitConfig;

fn main() {
    let cfg = CircuitConfig::PROTOTYPE;
    let ni = NonIdealities::default_for(&cfg).with_seed(2024);
    let mut sim = Simulator::new(cfg, ni, Initial::Random).unwrap();

    let head = sim.run(8);
    write_trace_csv(&head.records, std::io::stdout().lock()).unwrap();

    let trace = sim.run(200_000);
    let mut counts = [0u64; 4];
    for m in trace.codes() {
        counts[extract_symbol(u32::from(m), cfg.m_bits) as usize] += 1;
    }
    let n = trace.len() as f64;
    println!();
    for (s, c) in counts.iter().enumerate() {
        println!("symbol {s}: {:.4}", *c as f64 / n);
    }
    let (vmin, vmax) = trace
        .records
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), r| {
            (a.min(r.v_in), b.max(r.v_in))
        });
    println!(
        "v_in range [{vmin:.4}, {vmax:.4}] V, interval {:?}",
        cfg.interval()
    );
    println!("saturation events {}", trace.saturation_events);

    // hold droop shifts the map; enough of it pushes the orbit off the
    // partition
    for droop in [0.05, 0.2, 0.4] {
        let leaky = NonIdealities { droop, ..ni };
        let mut sim = Simulator::new(cfg, leaky, Initial::Random).unwrap();
        let t = sim.run(200_000);
        let outside = t.codes().filter(|&m| !(1..=5).contains(&m)).count();
        println!(
            "droop {droop} V: {outside} codes outside [1, 5], {} saturations",
            t.saturation_events
        );
    }
}
