//! Worst-case bin weight per scenario: the two item alphabets and a
//! branch-and-bound knapsack over them, plus an exhaustive oracle.
//!
//! A pattern is a multiset of alphabet items whose total size stays strictly
//! below the capacity; the rest of the bin is filled with tiny items of
//! density `rho`. The value of a pattern is
//! `base + sum of weights + rho * (capacity - total size)`.
//!
//! Strictness is made exact by moving every size onto the grid `1/q`, `q` the
//! common denominator, and requiring `total <= capacity - 1/q`. The search
//! itself runs on `u128` grid sizes with `f64` weights; any leaf within a small
//! margin of the incumbent is re-evaluated exactly, and pruning keeps the same
//! margin, so the returned maximum is exact.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::numerics::{common_denominator, Rational};
use crate::params::{ClassKind, ClassTable};
use crate::weights::{ClassWeight, WeightFunction};

/// Absolute slack used when comparing floating-point bounds against the incumbent.
const MARGIN: f64 = 1e-9;

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnapsackError {
    #[error("node budget of {0} exhausted")]
    BudgetExceeded(u64),
    #[error("common denominator {0} does not fit in 128 bits")]
    GridTooFine(BigInt),
    #[error("{types} item types exceed the exhaustive limit of {limit}")]
    TooManyTypes { types: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaItem {
    pub size: Rational,
    pub weight: Rational,
}

impl DeltaItem {
    pub fn density(&self) -> Rational {
        &self.weight / &self.size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// A huge item of size at least `a` is present.
    HugeAtLeastA,
    /// No such item.
    NoHugeAtLeastA,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::HugeAtLeastA => 1,
            Case::NoHugeAtLeastA => 2,
        }
    }
}

/// Item alphabet and capacity of one knapsack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSet {
    pub case: Case,
    /// Sorted by density, non-increasing (ties: larger size first).
    pub items: Vec<DeltaItem>,
    pub capacity: Rational,
    pub strict: bool,
    pub base_weight: Rational,
    pub rho: Rational,
}

impl DeltaSet {
    pub fn new(case: Case, mut items: Vec<DeltaItem>, capacity: Rational, base_weight: Rational, rho: Rational) -> Self {
        items.sort_by(|a, b| b.density().cmp(&a.density()).then_with(|| b.size.cmp(&a.size)));
        DeltaSet { case, items, capacity, strict: true, base_weight, rho }
    }

    /// The same problem restricted to the `n` densest item types.
    pub fn densest(&self, n: usize) -> DeltaSet {
        let mut d = self.clone();
        d.items.truncate(n);
        d
    }

    /// Exact value of a pattern given as counts aligned with `items`.
    pub fn value(&self, counts: &[u64]) -> Rational {
        let mut total = Rational::zero();
        let mut weight = self.base_weight.clone();
        for (item, &c) in self.items.iter().zip(counts) {
            if c > 0 {
                let c = Rational::from(c);
                total += &item.size * &c;
                weight += &item.weight * &c;
            }
        }
        weight + &self.rho * &(&self.capacity - &total)
    }
}

fn weight_of(wf: &WeightFunction, j: usize) -> Rational {
    match wf.class_weight(j) {
        ClassWeight::Uniform(x) => x.clone(),
        ClassWeight::Threshold { u, .. } => u.clone(),
        other => unreachable!("class {j} has weight {other:?}"),
    }
}

/// Bins holding a huge item of size at least `a`: the rest has size below
/// `1 - a <= y`, so only classes `k..=M` can appear.
pub fn build_delta_case1(wf: &WeightFunction, table: &ClassTable) -> DeltaSet {
    let s = &wf.scenario;
    let k = s.k.j;
    let mut items = Vec::new();
    for j in (k + 1)..=table.m() {
        items.push(DeltaItem { size: table.boundary(j).clone(), weight: weight_of(wf, j) });
    }
    if s.k.kind != ClassKind::Tiny {
        items.push(DeltaItem { size: table.boundary(k).clone(), weight: weight_of(wf, k) });
    }
    DeltaSet::new(Case::HugeAtLeastA, items, s.y.clone(), Rational::one(), wf.rho.clone())
}

/// Bins without a huge item of size at least `a`.
pub fn build_delta_case2(wf: &WeightFunction, table: &ClassTable) -> DeltaSet {
    let s = &wf.scenario;
    let mut items = vec![DeltaItem { size: Rational::half(), weight: wf.uvw.w.clone() }];
    for j in 2..=table.m() {
        let size = table.boundary(j).clone();
        match wf.class_weight(j) {
            ClassWeight::Threshold { u, v } => {
                if s.x == size {
                    items.push(DeltaItem { size, weight: v.clone() });
                } else {
                    items.push(DeltaItem { size, weight: u.clone() });
                    items.push(DeltaItem { size: s.x.clone(), weight: v.clone() });
                }
            }
            _ => items.push(DeltaItem { size, weight: weight_of(wf, j) }),
        }
    }
    DeltaSet::new(Case::NoHugeAtLeastA, items, Rational::one(), Rational::zero(), wf.rho.clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbResult {
    pub max_weight: Rational,
    /// `(size, count)` with positive counts, in alphabet order.
    pub worst_pattern: Vec<(Rational, u64)>,
    /// Total size of the pattern (before tiny fill).
    pub pattern_size: Rational,
    pub nodes_explored: u64,
}

impl BnbResult {
    pub fn pattern_text(&self) -> String {
        if self.worst_pattern.is_empty() {
            return "-".into();
        }
        self.worst_pattern
            .iter()
            .map(|(s, c)| format!("{s}x{c}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub node_budget: u64,
    /// Disabling pruning turns the search into complete enumeration.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { node_budget: DEFAULT_NODE_BUDGET, prune: true }
    }
}

/// Sizes on the common grid.
struct Grid {
    q: u128,
    sizes: Vec<u128>,
    /// Full capacity on the grid.
    cap: u128,
    /// Largest admissible pattern total.
    limit: u128,
}

fn to_u128(x: &BigInt) -> Option<u128> {
    x.to_u128()
}

fn grid(delta: &DeltaSet, idx: &[usize]) -> Result<Grid, KnapsackError> {
    let q_big = common_denominator(idx.iter().map(|&i| &delta.items[i].size).chain([&delta.capacity]));
    let q = to_u128(&q_big).ok_or_else(|| KnapsackError::GridTooFine(q_big.clone()))?;
    let on_grid = |r: &Rational| -> Result<u128, KnapsackError> {
        let v = r.numer() * (&q_big / r.denom());
        to_u128(&v).ok_or_else(|| KnapsackError::GridTooFine(q_big.clone()))
    };
    let sizes = idx.iter().map(|&i| on_grid(&delta.items[i].size)).collect::<Result<Vec<_>, _>>()?;
    let cap = on_grid(&delta.capacity)?;
    let limit = if delta.strict { cap.saturating_sub(1) } else { cap };
    Ok(Grid { q, sizes, cap, limit })
}

struct Search<'a> {
    delta: &'a DeltaSet,
    /// Indices into `delta.items` of the types searched.
    idx: Vec<usize>,
    sizes: Vec<u128>,
    weights: Vec<f64>,
    density: Vec<f64>,
    cap: u128,
    qf: f64,
    rho: f64,
    prune: bool,
    budget: u64,
    nodes: u64,
    counts: Vec<u64>,
    best: Option<(Rational, Vec<u64>)>,
    best_f: f64,
    exhausted: bool,
}

impl Search<'_> {
    fn leaf(&mut self, used: u128, w: f64) {
        let value_f = w + self.rho * ((self.cap - used) as f64 / self.qf);
        if value_f < self.best_f - MARGIN {
            return;
        }
        let mut full = vec![0u64; self.delta.items.len()];
        for (k, &i) in self.idx.iter().enumerate() {
            full[i] = self.counts[k];
        }
        let exact = self.delta.value(&full);
        let better = match &self.best {
            None => true,
            Some((b, _)) => exact > *b,
        };
        if better {
            self.best_f = exact.to_f64();
            self.best = Some((exact, full));
        }
    }

    fn dfs(&mut self, start: usize, rem: u128, used: u128, w: f64) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let n = self.sizes.len();
        let mut i = start;
        while i < n && self.sizes[i] > rem {
            i += 1;
        }
        if i == n {
            self.leaf(used, w);
            return;
        }
        if self.prune {
            let room = (self.cap - used) as f64 / self.qf;
            let bound = w + self.density[i].max(self.rho) * room;
            if bound < self.best_f - MARGIN {
                return;
            }
        }
        let size = self.sizes[i];
        let max_count = rem / size;
        for c in (0..=max_count).rev() {
            self.counts[i] = c as u64;
            self.dfs(i + 1, rem - c * size, used + c * size, w + c as f64 * self.weights[i]);
            if self.exhausted {
                break;
            }
        }
        self.counts[i] = 0;
    }
}

fn run(delta: &DeltaSet, idx: Vec<usize>, opts: SolveOptions) -> Result<BnbResult, KnapsackError> {
    let g = grid(delta, &idx)?;
    let weights: Vec<f64> = idx.iter().map(|&i| delta.items[i].weight.to_f64()).collect();
    let density: Vec<f64> = idx.iter().map(|&i| delta.items[i].density().to_f64()).collect();
    let n = idx.len();
    let mut s = Search {
        delta,
        idx,
        sizes: g.sizes,
        weights,
        density,
        cap: g.cap,
        qf: g.q as f64,
        rho: delta.rho.to_f64(),
        prune: opts.prune,
        budget: opts.node_budget,
        nodes: 0,
        counts: vec![0; n],
        best: None,
        best_f: f64::NEG_INFINITY,
        exhausted: false,
    };
    s.dfs(0, g.limit, 0, delta.base_weight.to_f64());
    if s.exhausted {
        return Err(KnapsackError::BudgetExceeded(opts.node_budget));
    }
    let (max_weight, counts) = s.best.expect("the empty pattern is always a leaf");
    let mut pattern = Vec::new();
    let mut pattern_size = Rational::zero();
    for (item, &c) in delta.items.iter().zip(&counts) {
        if c > 0 {
            pattern_size += &item.size * &Rational::from(c);
            pattern.push((item.size.clone(), c));
        }
    }
    Ok(BnbResult { max_weight, worst_pattern: pattern, pattern_size, nodes_explored: s.nodes })
}

/// Branch and bound. Item types whose density does not exceed `rho` are
/// skipped: replacing such an item by tiny fill never lowers the value.
pub fn solve_bnb(delta: &DeltaSet) -> Result<BnbResult, KnapsackError> {
    solve_bnb_with(delta, SolveOptions::default())
}

pub fn solve_bnb_with(delta: &DeltaSet, opts: SolveOptions) -> Result<BnbResult, KnapsackError> {
    let idx = (0..delta.items.len())
        .filter(|&i| !opts.prune || delta.items[i].density() > delta.rho)
        .collect();
    run(delta, idx, opts)
}

/// Complete enumeration of every admissible multiset, exact throughout.
///
/// With `L` the common denominator of the weights and `rho`, and sizes on the
/// grid `1/q`, a pattern's value times `L q` is `R cap + sum c_i K_i` where
/// `K_i = q W_i - R g_i` (`W_i = L w_i`, `R = L rho`, `g_i = q s_i`), so leaves
/// compare as integers.
pub fn solve_exhaustive(delta: &DeltaSet, max_types: usize) -> Result<BnbResult, KnapsackError> {
    if delta.items.len() > max_types {
        return Err(KnapsackError::TooManyTypes { types: delta.items.len(), limit: max_types });
    }
    let g = grid(delta, &(0..delta.items.len()).collect::<Vec<_>>())?;
    let l = common_denominator(delta.items.iter().map(|i| &i.weight).chain([&delta.rho]));
    let scaled = |r: &Rational| r.numer() * (&l / r.denom());
    let big_r = scaled(&delta.rho);
    let q = BigInt::from(g.q);
    let k: Vec<BigInt> = delta
        .items
        .iter()
        .zip(&g.sizes)
        .map(|(item, &gi)| &q * scaled(&item.weight) - &big_r * BigInt::from(gi))
        .collect();

    struct Enum<'a> {
        g: &'a Grid,
        k: &'a [BigInt],
        counts: Vec<u64>,
        best: Option<(BigInt, Vec<u64>)>,
        nodes: u64,
    }
    impl Enum<'_> {
        fn rec(&mut self, i: usize, rem: u128, acc: &BigInt) {
            self.nodes += 1;
            if i == self.counts.len() {
                if self.best.as_ref().is_none_or(|(b, _)| acc > b) {
                    self.best = Some((acc.clone(), self.counts.clone()));
                }
                return;
            }
            let size = self.g.sizes[i];
            let mut acc = acc.clone();
            for c in 0..=rem / size {
                self.counts[i] = c as u64;
                self.rec(i + 1, rem - c * size, &acc);
                acc += &self.k[i];
            }
            self.counts[i] = 0;
        }
    }
    let mut e = Enum { g: &g, k: &k, counts: vec![0; delta.items.len()], best: None, nodes: 0 };
    e.rec(0, g.limit, &BigInt::from(0));
    let (_, counts) = e.best.expect("at least the empty pattern");
    let mut pattern = Vec::new();
    let mut pattern_size = Rational::zero();
    for (item, &c) in delta.items.iter().zip(&counts) {
        if c > 0 {
            pattern_size += &item.size * &Rational::from(c);
            pattern.push((item.size.clone(), c));
        }
    }
    Ok(BnbResult { max_weight: delta.value(&counts), worst_pattern: pattern, pattern_size, nodes_explored: e.nodes })
}

/// `scenario x_lo x_hi case max_weight pattern`.
pub fn export_result(x: &Rational, y: &Rational, case: Case, res: &BnbResult) -> String {
    let mut s = String::new();
    let _ = write!(s, "scenario {x} {y} {} {} {}", case.number(), res.max_weight, res.pattern_text());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::tests::r;

    fn delta(items: &[(&str, &str)], cap: &str, base: &str, rho: &str) -> DeltaSet {
        let items = items
            .iter()
            .map(|(s, w)| DeltaItem { size: r(s), weight: r(w) })
            .collect();
        DeltaSet::new(Case::NoHugeAtLeastA, items, r(cap), r(base), r(rho))
    }

    #[test]
    fn empty_alphabet_is_all_tiny() {
        let d = delta(&[], "1", "0", "3/2");
        let res = solve_bnb(&d).unwrap();
        assert_eq!(res.max_weight, r("3/2"));
        assert!(res.worst_pattern.is_empty());
        assert_eq!(solve_exhaustive(&d, 14).unwrap().max_weight, r("3/2"));
    }

    #[test]
    fn strict_capacity_excludes_exact_fill() {
        // two halves would fill the bin exactly; strictness allows only one
        let d = delta(&[("1/2", "9/10")], "1", "0", "1/2");
        let res = solve_bnb(&d).unwrap();
        assert_eq!(res.worst_pattern, vec![(r("1/2"), 1)]);
        assert_eq!(res.max_weight, r("9/10") + r("1/4"));
        assert_eq!(solve_exhaustive(&d, 14).unwrap().max_weight, res.max_weight);
    }

    #[test]
    fn low_density_items_are_ignored() {
        let d = delta(&[("1/3", "1/10"), ("1/4", "1/2")], "1", "0", "1");
        let res = solve_bnb(&d).unwrap();
        let ex = solve_exhaustive(&d, 14).unwrap();
        assert_eq!(res.max_weight, ex.max_weight);
        assert_eq!(res.max_weight, r("3/2") + r("1/4"));
    }

    #[test]
    fn matches_exhaustive_on_a_mixed_alphabet() {
        let d = delta(
            &[("1/2", "3/5"), ("1/3", "1/2"), ("1/4", "7/20"), ("1/5", "1/4"), ("1/7", "1/6")],
            "1",
            "0",
            "9/10",
        );
        let a = solve_bnb(&d).unwrap();
        let b = solve_exhaustive(&d, 14).unwrap();
        assert_eq!(a.max_weight, b.max_weight);
        let unpruned = solve_bnb_with(&d, SolveOptions { node_budget: u64::MAX, prune: false }).unwrap();
        assert_eq!(unpruned.max_weight, a.max_weight);
        assert!(unpruned.nodes_explored >= a.nodes_explored);
    }

    #[test]
    fn budget_is_reported() {
        let d = delta(&[("1/50", "1/40"), ("1/51", "1/41"), ("1/53", "1/42")], "1", "0", "1/2");
        let err = solve_bnb_with(&d, SolveOptions { node_budget: 10, prune: true }).unwrap_err();
        assert_eq!(err, KnapsackError::BudgetExceeded(10));
    }

    #[test]
    fn exhaustive_refuses_large_alphabets() {
        let items: Vec<(String, String)> = (2..20).map(|n| (format!("1/{n}"), format!("1/{}", n - 1))).collect();
        let refs: Vec<(&str, &str)> = items.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let d = delta(&refs, "1", "0", "1");
        assert!(matches!(solve_exhaustive(&d, 14), Err(KnapsackError::TooManyTypes { .. })));
    }

    #[test]
    fn export_format() {
        let d = delta(&[("1/2", "9/10")], "1", "0", "1/2");
        let res = solve_bnb(&d).unwrap();
        assert_eq!(export_result(&r("2/9"), &r("3/13"), Case::NoHugeAtLeastA, &res), "scenario 2/9 3/13 2 23/20 1/2x1");
    }
}
