//! Packs random streams, derives the terminal quantity `a` and the scenario
//! of each run, and compares the bin count with the total item weight.
//!
//! cargo run --release --example empirical

use advanced_harmonic::baselines::{generate_instance, Generator};
use advanced_harmonic::data;
use advanced_harmonic::engine::PackingState;
use advanced_harmonic::scenarios::enumerate_scenarios;
use advanced_harmonic::verifier::{empirical_check, EmpiricalOptions};

fn main() {
    let table = data::canonical_table();
    let scenarios = enumerate_scenarios(&table);
    let uvw = data::uvw_table();
    let opts = EmpiricalOptions { psi: 200, fallback: true, opt: None };
    for (name, seed) in [("uniform", 1), ("uniform(1/100,1/3)", 2), ("grid", 3), ("grid(small)", 4), ("grid(large)", 5)] {
        let g: Generator = name.parse().unwrap();
        let inst = generate_instance(&g, 10_000, seed, Some(&table)).unwrap();
        let mut state = PackingState::new(table.clone());
        state.pack_all(&inst.sizes, true).unwrap();
        println!("{:<36} {}", inst.descriptor, empirical_check(&state, &scenarios, &uvw, &opts));
    }
}
