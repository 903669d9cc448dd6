//! Recovers the unpublished container proportions from the three weight
//! tables and checks the result against the completed parameter file.
//!
//! cargo run --release --example reconstruct

use advanced_harmonic::data;
use advanced_harmonic::params::reconstruct::{reconstruct_params, ClassStatus};

fn main() {
    let partial = data::published_partial();
    let missing = (2..=partial.m()).filter(|&j| partial.known_alphas(j).is_none()).count();
    println!("{} classes, {missing} without published proportions", partial.m());
    let report = reconstruct_params(&partial, &data::weight_tables(), &data::uvw_endpoints(&data::uvw_table()));
    let count = |f: fn(&ClassStatus) -> bool| report.classes.iter().filter(|c| f(&c.status)).count();
    println!("given {}", count(|s| *s == ClassStatus::Given));
    println!("determined {}", count(|s| *s == ClassStatus::Determined));
    println!("by endpoints {}", count(|s| *s == ClassStatus::ByEndpoints));
    println!("by hint {}", count(|s| *s == ClassStatus::ByHint));
    println!("undetermined {:?}, conflicts {}", report.undetermined(), report.conflicts().len());
    println!("tiny class: {}", report.tiny);
    for c in report.classes.iter().filter(|c| c.class == 167 || c.class == 183) {
        println!("class {}: {} {:?}", c.class, c.status, c.alphas);
    }
    let complete = report.table.into_table().unwrap();
    println!("matches shipped completed parameters: {}", complete == data::canonical_table());
}
