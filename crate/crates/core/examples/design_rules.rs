// SPDX-License-Identifier: Apache-2.0

//! Design-rule checks on a few circuits.

use chaos_trng::chaos_map::{validate_config, ValidationOptions};
use chaos_trng::CircuitConfig;

fn main() {
    let p = CircuitConfig::PROTOTYPE;
    let cases = [
        ("prototype", p),
        ("textbook", CircuitConfig::TEXTBOOK),
        ("gain 1", CircuitConfig { k: 1, ..p }),
        ("gain 8, M=2", CircuitConfig { k: 8, ..p }),
        ("N=6", CircuitConfig { n: 6, ..p }),
        ("V_B off-center", CircuitConfig { v_b: 0.05, ..p }),
        ("V_B too large", CircuitConfig { v_b: 1.2, ..p }),
        ("DAC narrower than N", CircuitConfig { n_tilde: 2, ..p }),
    ];
    for (name, cfg) in cases {
        let v = validate_config(&cfg, &ValidationOptions::for_config(&cfg));
        let verdict = if v.is_ok() { "ok" } else { "REJECTED" };
        println!("{name}: {verdict}");
        for x in &v.violations {
            println!("  violation: {x}");
        }
        for a in &v.advisories {
            println!("  advisory: {a}");
        }
    }

    // tight rails leave too little headroom above the loop interval
    let mut opts = ValidationOptions::for_config(&p);
    opts.rails = (0.0, 2.82);
    for a in validate_config(&p, &opts).advisories {
        println!("rails (0, 2.82): {a}");
    }
}
