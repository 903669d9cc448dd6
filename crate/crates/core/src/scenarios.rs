//! Value sets, scenario enumeration and the terminal quantity `a`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::numerics::Rational;
use crate::params::{ClassIndex, ClassKind, ClassTable};

/// A scenario interval `(x, y]` between consecutive elements of `V'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub x: Rational,
    pub y: Rational,
    /// Class with `(x, y]` inside `(t_k, t_{k-1}]`.
    pub k: ClassIndex,
    /// True when the threshold class is small or tiny.
    pub basic: bool,
}

impl Scenario {
    /// Builds the scenario `(x, y]` and derives its threshold class. Does not
    /// check that `x, y` are consecutive in `V'`.
    pub fn new(table: &ClassTable, x: Rational, y: Rational) -> Option<Scenario> {
        if x >= y || y > Rational::half() || x.is_negative() {
            return None;
        }
        let k = table.classify(&y).ok()?;
        if x < *table.boundary(k.j) {
            return None;
        }
        Some(Scenario { basic: k.kind.is_basic_candidate(), x, y, k })
    }

    pub fn contains(&self, value: &Rational) -> bool {
        self.x < *value && *value <= self.y
    }

    pub fn label(&self) -> String {
        format!("({},{}]", self.x, self.y)
    }
}

/// The terminal quantities of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioContext {
    pub a: Rational,
    pub a_prime: Rational,
    pub scenario: Scenario,
}

/// `V` (all values) and `V'` (values at most 1/2, ascending).
pub fn build_value_sets(table: &ClassTable) -> (BTreeSet<Rational>, Vec<Rational>) {
    let one = Rational::one();
    let mut v: BTreeSet<Rational> = table.boundaries()[1..].iter().cloned().collect();
    for j in 2..=table.m() {
        for (i, _) in table.support(j) {
            let a = table.a_value(j, *i);
            v.insert(&one - &a);
            v.insert(a);
        }
    }
    for tt in table.tiny_types() {
        v.insert(&one - &tt.threshold);
        v.insert(tt.threshold.clone());
    }
    let half = Rational::half();
    let vp: Vec<Rational> = v.iter().filter(|x| **x <= half).cloned().collect();
    (v, vp)
}

/// All scenarios in ascending order.
pub fn enumerate_scenarios(table: &ClassTable) -> Vec<Scenario> {
    let (_, vp) = build_value_sets(table);
    vp.windows(2)
        .map(|w| {
            Scenario::new(table, w[0].clone(), w[1].clone())
                .expect("consecutive values of V' never straddle a boundary")
        })
        .collect()
}

/// Scenario whose interval contains `value`.
pub fn locate<'a>(scenarios: &'a [Scenario], value: &Rational) -> Option<&'a Scenario> {
    let idx = scenarios.partition_point(|s| s.y < *value);
    scenarios.get(idx).filter(|s| s.contains(value))
}

/// `a' = 1 - s_min/2`, `a = min(a', smallest unmatched positive volume)`, and
/// the scenario containing `1 - a`. `None` for an empty input.
pub fn compute_a<'a>(
    scenarios: &[Scenario],
    s_min: Option<&Rational>,
    unmatched_positive: impl IntoIterator<Item = &'a Rational>,
) -> Option<ScenarioContext> {
    let s_min = s_min?;
    let a_prime = Rational::one() - s_min * &Rational::half();
    let a = unmatched_positive
        .into_iter()
        .min()
        .cloned()
        .map_or(a_prime.clone(), |m| m.min(a_prime.clone()));
    let target = Rational::one() - &a;
    let scenario = locate(scenarios, &target)?.clone();
    Some(ScenarioContext { a, a_prime, scenario })
}

/// `x_lo x_hi k basic|large` per line.
pub fn export_scenarios(scenarios: &[Scenario]) -> String {
    let mut s = String::new();
    for sc in scenarios {
        let kind = if sc.basic { "basic" } else { "large" };
        let _ = writeln!(s, "{} {} {} {kind}", sc.x, sc.y, sc.k.j);
    }
    s
}

/// Counts per kind of threshold class: (huge, large, small, tiny); huge is always 0.
pub fn kind_counts(scenarios: &[Scenario]) -> [usize; 4] {
    let mut c = [0; 4];
    for s in scenarios {
        let idx = match s.k.kind {
            ClassKind::Huge => 0,
            ClassKind::Large => 1,
            ClassKind::Small => 2,
            ClassKind::Tiny => 3,
        };
        c[idx] += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::tests::{r, toy_table};

    #[test]
    fn toy_value_sets() {
        let t = toy_table();
        let (v, vp) = build_value_sets(&t);
        assert!(v.contains(&r("1")));
        assert!(v.contains(&r("4/5")));
        assert_eq!(vp.first(), Some(&r("0")));
        assert_eq!(vp.last(), Some(&r("1/2")));
        assert!(vp.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn toy_scenarios_are_contiguous() {
        let t = toy_table();
        let sc = enumerate_scenarios(&t);
        assert_eq!(sc.first().unwrap().x, r("0"));
        assert_eq!(sc.last().unwrap().y, r("1/2"));
        for w in sc.windows(2) {
            assert_eq!(w[0].y, w[1].x);
        }
        let last = sc.last().unwrap();
        assert_eq!(last.k.j, 2);
        assert!(!last.basic);
    }

    #[test]
    fn compute_a_rules() {
        let t = toy_table();
        let sc = enumerate_scenarios(&t);
        let ctx = compute_a(&sc, Some(&r("1/2")), std::iter::empty()).unwrap();
        assert_eq!(ctx.a, r("3/4"));
        let vols = [r("7/10"), r("9/10")];
        let ctx = compute_a(&sc, Some(&r("1/50")), vols.iter()).unwrap();
        assert_eq!(ctx.a, r("7/10"));
        assert_eq!(ctx.a_prime, r("99/100"));
        assert!(ctx.scenario.contains(&r("3/10")));
        assert!(compute_a(&sc, None, vols.iter()).is_none());
    }

    #[test]
    fn locate_boundaries() {
        let t = toy_table();
        let sc = enumerate_scenarios(&t);
        let s = locate(&sc, &r("1/2")).unwrap();
        assert_eq!(s.y, r("1/2"));
        assert!(locate(&sc, &r("0")).is_none());
        assert!(locate(&sc, &r("3/5")).is_none());
    }
}
