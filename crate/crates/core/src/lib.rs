//! Advanced Harmonic online bin packing and an exact certification pipeline
//! for its asymptotic competitive ratio.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: exact rationals used for every size, volume and weight.
//! * [`params`]: boundary points, container proportions, classification.
//! * [`engine`]: the online packing state machine with invariant audits.
//! * [`scenarios`]: the value sets and scenario intervals of the analysis.
//! * [`weights`]: per-scenario weight functions and the `u, v, w` constraints.
//! * [`knapsack`]: item alphabets and the branch-and-bound bin-weight bound.
//! * [`verifier`]: per-scenario and global certification, empirical checks.
//! * [`baselines`]: classic online algorithms, exact small OPT, generators.
//! * [`data`]: the shipped parameter, `u, v, w` and weight-table files.
//! * [`cli`]: the `ah` command-line front end.

pub mod numerics;
pub mod baselines;
pub mod cli;
pub mod data;
pub mod engine;
pub mod knapsack;
pub mod params;
pub mod scenarios;
pub mod verifier;
pub mod weights;

pub use numerics::{parse_rational, Rational};
