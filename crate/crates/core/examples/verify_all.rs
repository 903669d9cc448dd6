//! Certifies every scenario that has shipped `u, v, w` data and prints the
//! global bound together with the uncovered scenarios.
//!
//! cargo run --release --example verify_all [JOBS]

use std::time::Instant;

use advanced_harmonic::data;
use advanced_harmonic::scenarios::{enumerate_scenarios, kind_counts};
use advanced_harmonic::verifier::{verify_all, Status, VerifyOptions};

fn main() {
    let jobs = std::env::args().nth(1).map(|j| j.parse().expect("JOBS must be a number"));
    let table = data::canonical_table();
    let scenarios = enumerate_scenarios(&table);
    let [_, large, small, tiny] = kind_counts(&scenarios);
    println!("{} scenarios: {large} large, {small} small, {tiny} tiny threshold classes", scenarios.len());

    let start = Instant::now();
    let report = verify_all(&table, &data::uvw_table(), VerifyOptions { jobs, ..Default::default() });
    println!(
        "certified {} / missing uvw {} / infeasible {} in {:.1?}",
        report.count(Status::Certified),
        report.count(Status::MissingUvw),
        report.count(Status::Infeasible),
        start.elapsed()
    );
    let g = report.global_r.clone().unwrap();
    println!("global r = {g} ~ {}", g.to_decimal(12));
    let worst = report.reports.iter().filter(|r| r.r() == Some(g.clone())).count();
    println!("attained by {worst} scenarios");
    println!("{} uncovered, first few:", report.uncovered.len());
    for (x, y) in report.uncovered.iter().take(5) {
        println!("  ({x},{y}]");
    }
}
