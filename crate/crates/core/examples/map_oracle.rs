// SPDX-License-Identifier: Apache-2.0

//! The abstract shift map behind the textbook circuit, and the circuit
//! agreeing with it step by step.

use chaos_trng::chaos_map::{transition_matrix, voltage_to_x, MarkovPartition};
use chaos_trng::sim::{Initial, NonIdealities, Simulator};
use chaos_trng::CircuitConfig;

fn main() {
    let cfg = CircuitConfig::TEXTBOOK;
    let map = cfg.map_params();
    let (lo, hi) = cfg.interval();
    println!("alpha = {}, beta = {}", map.alpha, map.beta);
    println!("loop interval [{lo}, {hi}] V");
    println!("discontinuities {:?}", map.discontinuities());

    let part = MarkovPartition::from_config(&cfg).unwrap();
    for m in part.m_min..=part.m_max {
        println!("code {m} -> {}", part.state_from_code(m).unwrap());
    }
    for row in transition_matrix(&map) {
        println!("{row:?}");
    }

    // zero noise: the loop is the map in voltage coordinates
    let mut sim =
        Simulator::new(cfg, NonIdealities::ideal(&cfg), Initial::Voltage(3.3137)).unwrap();
    println!(
        "{:>3} {:>12} {:>12} {:>10}",
        "n", "x circuit", "x map", "diff"
    );
    for n in 0..12 {
        let r = sim.step();
        let x = voltage_to_x(&cfg, r.v_in);
        let via_map = map.iterate(x).unwrap();
        let via_loop = voltage_to_x(&cfg, r.v_out);
        println!(
            "{n:>3} {via_loop:>12.9} {via_map:>12.9} {:>10.1e}",
            via_loop - via_map
        );
    }
}
