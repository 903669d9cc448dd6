//! Shipped data files, compiled in so the tools work from any directory.

use crate::params::{parse_params, parse_partial_params, ClassTable, PartialTable};
use crate::numerics::Rational;
use crate::verifier::UvwTable;
use crate::weights::WeightTable;

/// Published parameters; unprinted proportions are `?`.
pub const CANONICAL_PARAMS: &str = include_str!("../data/canonical.params");
/// Published parameters completed from the weight tables.
pub const COMPLETED_PARAMS: &str = include_str!("../data/canonical_completed.params");
pub const UVW_TABLE: &str = include_str!("../data/uvw.table");
pub const PUBLISHED_BOUNDS: &str = include_str!("../data/published_bounds.txt");

/// The three complete weight tables as `(file name, text)`.
pub const WEIGHT_TABLES: [(&str, &str); 3] = [
    ("scenario_17_50__653_1920.wt", include_str!("../data/weights/scenario_17_50__653_1920.wt")),
    ("scenario_3_7__1_2.wt", include_str!("../data/weights/scenario_3_7__1_2.wt")),
    ("scenario_2_9__3_13.wt", include_str!("../data/weights/scenario_2_9__3_13.wt")),
];

pub fn canonical_table() -> ClassTable {
    parse_params(COMPLETED_PARAMS).expect("shipped parameters are valid")
}

pub fn published_partial() -> PartialTable {
    parse_partial_params(CANONICAL_PARAMS).expect("shipped parameters parse")
}

pub fn uvw_table() -> UvwTable {
    UvwTable::parse(UVW_TABLE).expect("shipped uvw table parses")
}

pub fn weight_tables() -> Vec<WeightTable> {
    WEIGHT_TABLES
        .iter()
        .map(|(_, t)| WeightTable::parse(t).expect("shipped weight table parses"))
        .collect()
}

/// Every range endpoint of a uvw table, sorted and deduplicated. These are
/// scenario endpoints known to exist, which settles ambiguous reconstructions.
pub fn uvw_endpoints(uvw: &UvwTable) -> Vec<Rational> {
    let mut e: Vec<_> = uvw.records.iter().flat_map(|r| [r.x_lo.clone(), r.x_hi.clone()]).collect();
    e.sort();
    e.dedup();
    e
}

/// A published per-scenario or group bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublishedBound {
    Scenario { x: Rational, y: Rational, r: Rational },
    /// Every scenario within `(lo, hi]` is below `r` (`attained == false`) or
    /// at most `r` with equality for some scenario (`attained == true`).
    Group { lo: Rational, hi: Rational, r: Rational, attained: bool },
}

pub fn published_bounds() -> Vec<PublishedBound> {
    let mut out = Vec::new();
    for line in PUBLISHED_BOUNDS.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let q = |s: &str| s.parse::<Rational>().expect("shipped bound parses");
        if f[0] == "group" {
            out.push(PublishedBound::Group { lo: q(f[1]), hi: q(f[2]), r: q(f[3]), attained: f[4] == "max" });
        } else {
            out.push(PublishedBound::Scenario { x: q(f[0]), y: q(f[1]), r: q(f[2]) });
        }
    }
    out
}
