//! Certifies single scenarios: one small-threshold scenario from its `w`,
//! and the scenario (3/7,1/2] from its imported weight table.
//!
//! cargo run --release --example verify_scenario

use advanced_harmonic::data;
use advanced_harmonic::scenarios::Scenario;
use advanced_harmonic::verifier::{verify_scenario, verify_weights};
use advanced_harmonic::weights::{Uvw, WeightFunction};
use advanced_harmonic::Rational;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn main() {
    let table = data::canonical_table();

    let s = Scenario::new(&table, q("2/9"), q("3/13")).unwrap();
    let rep = verify_scenario(&table, &s, &Uvw::basic(q("9224745/1073741824")), Default::default());
    println!("{} threshold class {}", s.label(), s.k.j);
    println!("  case 1: {}", rep.r_case1.as_ref().unwrap().to_decimal(15));
    println!("  case 2: {}", rep.r_case2.as_ref().unwrap().to_decimal(15));
    println!("  r = {} via {}", rep.r().unwrap(), rep.worst_pattern);

    let wt = &data::weight_tables()[1];
    let (x, y) = wt.scenario.clone().unwrap();
    let s = Scenario::new(&table, x, y).unwrap();
    let wf = WeightFunction::from_table(&table, s.clone(), wt).unwrap();
    let rep = verify_weights(&table, &wf, Default::default());
    println!("{} from its weight table", s.label());
    println!("  r = {} ~ {} via {}", rep.r().unwrap(), rep.r().unwrap().to_decimal(12), rep.worst_pattern);
}
