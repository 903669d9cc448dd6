//! The two bin-weight problems of a scenario: branch and bound against
//! complete enumeration on the densest item types.
//!
//! cargo run --release --example knapsack

use advanced_harmonic::data;
use advanced_harmonic::knapsack::{build_delta_case1, build_delta_case2, solve_bnb, solve_exhaustive};
use advanced_harmonic::scenarios::Scenario;
use advanced_harmonic::weights::{build_weight_function, Uvw};

fn main() {
    let table = data::canonical_table();
    let s = Scenario::new(&table, "17/50".parse().unwrap(), "653/1920".parse().unwrap()).unwrap();
    let rec = data::uvw_table().lookup(&s).unwrap().clone();
    let wf = build_weight_function(&table, &s, &rec.uvw).unwrap();
    for delta in [build_delta_case1(&wf, &table), build_delta_case2(&wf, &table)] {
        let full = solve_bnb(&delta).unwrap();
        println!(
            "case {}: {} item types, max {} ~ {} ({} nodes) pattern {}",
            delta.case.number(),
            delta.items.len(),
            full.max_weight,
            full.max_weight.to_decimal(15),
            full.nodes_explored,
            full.pattern_text()
        );
        let small = delta.densest(10);
        let (a, b) = (solve_bnb(&small).unwrap(), solve_exhaustive(&small, 14).unwrap());
        println!("  10 densest types: bnb {} exhaustive {} ({} nodes)", a.max_weight.to_decimal(12), b.max_weight.to_decimal(12), b.nodes_explored);
    }
    let basic = Scenario::new(&table, "2/9".parse().unwrap(), "3/13".parse().unwrap()).unwrap();
    let wf = build_weight_function(&table, &basic, &Uvw::basic("9224745/1073741824".parse().unwrap())).unwrap();
    let c2 = solve_bnb(&build_delta_case2(&wf, &table)).unwrap();
    println!("{} case 2: {} via {}", basic.label(), c2.max_weight, c2.pattern_text());
}
