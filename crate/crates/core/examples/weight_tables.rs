//! Builds weight functions from the parameters and compares them row by row
//! with the three shipped weight tables.
//!
//! cargo run --example weight_tables

use advanced_harmonic::data;
use advanced_harmonic::scenarios::Scenario;
use advanced_harmonic::weights::build_weight_function;
use advanced_harmonic::weights::Uvw;

fn main() {
    let table = data::canonical_table();
    for ((name, _), wt) in data::WEIGHT_TABLES.iter().zip(data::weight_tables()) {
        let (x, y) = wt.scenario.clone().unwrap();
        let s = Scenario::new(&table, x, y).unwrap();
        let uvw = Uvw { u: wt.u.clone(), v: wt.v.clone(), w: wt.w.clone().unwrap() };
        let built = build_weight_function(&table, &s, &uvw).unwrap().to_table(&table);
        let same = built.rows == wt.rows && built.rho() == wt.rho();
        println!("{name}: {} rows, rho {}, reproduced: {same}", built.rows.len(), built.rho.as_ref().unwrap());
        if s.label() == "(3/7,1/2]" {
            println!("  classes 6..165 weigh {}", built.weight_of_interval(table.boundary(165), table.boundary(5)).unwrap());
        }
    }
    let s = Scenario::new(&table, "1/6".parse().unwrap(), "15/88".parse().unwrap()).unwrap();
    let wf = build_weight_function(&table, &s, &Uvw::basic("40165/4194304".parse().unwrap())).unwrap();
    println!("\n{} exported:", s.label());
    for line in wf.to_table(&table).to_text().lines().take(12) {
        println!("  {line}");
    }
    println!("  ...");
}
