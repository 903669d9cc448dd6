//! AH against Next Fit, First Fit, Best Fit, Harmonic and the optimum on
//! small random instances, and against the volume bound on larger ones.
//!
//! cargo run --release --example baselines

use advanced_harmonic::baselines::{generate_instance, opt_exact, run_baseline, Algorithm, Generator, DEFAULT_OPT_LIMIT};
use advanced_harmonic::data;
use advanced_harmonic::engine::PackingState;

fn main() {
    let table = data::canonical_table();
    let algs = [Algorithm::NextFit, Algorithm::FirstFit, Algorithm::BestFit, Algorithm::Harmonic(12)];
    let gens: [(&str, usize); 4] = [("uniform", 16), ("uniform(1/10,1/2)", 16), ("grid", 5000), ("uniform", 20000)];
    for (name, n) in gens {
        let g: Generator = name.parse().unwrap();
        let inst = generate_instance(&g, n, 42, Some(&table)).unwrap();
        let mut ah = PackingState::new(table.clone());
        ah.pack_all(&inst.sizes, false).unwrap();
        let opt = opt_exact(&inst.sizes, DEFAULT_OPT_LIMIT);
        print!("{:<32} ah {:>6}", inst.descriptor, ah.bins_used());
        for a in algs {
            print!("  {a} {:>6}", run_baseline(a, &inst.sizes).bins);
        }
        println!("  opt {} ({})", opt.bin_count, opt.method);
    }
}
