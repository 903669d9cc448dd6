use std::fmt;

use super::UvwTable;
use crate::engine::PackingState;
use crate::numerics::Rational;
use crate::params::ClassTable;
use crate::scenarios::{compute_a, Scenario};
use crate::weights::{build_weight_function, min_uv_for_w, total_item_weight, Uvw};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Unverifiable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unverifiable => "unverifiable",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmpiricalOptions {
    pub psi: u64,
    /// Use a feasible but non-canonical `u, v, w` when no record covers the scenario.
    pub fallback: bool,
    /// `(OPT, r)`: additionally require `bins <= r * OPT + psi`.
    pub opt: Option<(u64, Rational)>,
}

#[derive(Debug, Clone)]
pub struct EmpiricalReport {
    pub verdict: Verdict,
    pub bins: u64,
    pub a: Option<Rational>,
    pub scenario: Option<Scenario>,
    pub uvw: Option<Uvw>,
    pub canonical: bool,
    /// Total item weight `W`.
    pub weight: Option<Rational>,
    /// Result of the `r * OPT + psi` comparison when requested.
    pub opt_ok: Option<bool>,
    pub detail: String,
}

impl EmpiricalReport {
    /// `bins - W`, the additive constant actually used.
    pub fn excess(&self) -> Option<Rational> {
        self.weight.as_ref().map(|w| Rational::from(self.bins) - w)
    }
}

impl fmt::Display for EmpiricalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verdict={} bins={}", self.verdict, self.bins)?;
        if let Some(a) = &self.a {
            write!(f, " a={a}")?;
        }
        if let Some(s) = &self.scenario {
            write!(f, " scenario={}", s.label())?;
        }
        if let Some(w) = &self.weight {
            write!(f, " weight~{} excess~{}", w.to_decimal(8), self.excess().unwrap().to_decimal(8))?;
        }
        if !self.canonical {
            write!(f, " noncanonical")?;
        }
        if let Some(ok) = self.opt_ok {
            write!(f, " opt-check={}", if ok { "pass" } else { "fail" })?;
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Some feasible choice of scenario variables: `w = 1` with the smallest
/// dyadic `u, v` for large threshold classes.
pub fn fallback_uvw(table: &ClassTable, s: &Scenario) -> Option<Uvw> {
    let one = Rational::one();
    if s.basic {
        return Some(Uvw::basic(one));
    }
    let k = s.k.j;
    let (u, v) = min_uv_for_w(&one, &table.alpha(k, 1), &table.alpha(k, 2), 24)?;
    Some(Uvw::large(u, v, one))
}

/// The scenario whose weight function is valid for `a`. When `1 - a` is the
/// right end `y` of its scenario, a positive container of volume exactly
/// `a = 1 - y` may be unmatched, but the rule "weight `w` up to volume
/// `1 - y`" would charge it `w`. The next scenario, starting at `x = 1 - a`,
/// charges it 1, and its other rules remain valid for this `a`.
pub fn weighting_scenario<'a>(scenarios: &'a [Scenario], a: &Rational, located: &'a Scenario) -> &'a Scenario {
    let t = Rational::one() - a;
    if located.y != t {
        return located;
    }
    scenarios.iter().find(|s| s.x == t).unwrap_or(located)
}

/// Compares a finished packing with the total weight of its items in the
/// scenario determined by the run: `bins <= W + psi`.
pub fn empirical_check(state: &PackingState, scenarios: &[Scenario], uvw: &UvwTable, opts: &EmpiricalOptions) -> EmpiricalReport {
    let table = state.table();
    let bins = state.bins_used() as u64;
    let mut rep = EmpiricalReport {
        verdict: Verdict::Pass,
        bins,
        a: None,
        scenario: None,
        uvw: None,
        canonical: true,
        weight: None,
        opt_ok: None,
        detail: String::new(),
    };
    let psi = Rational::from(opts.psi);
    if let Some((opt, r)) = &opts.opt {
        let ok = Rational::from(bins) <= r * &Rational::from(*opt) + &psi;
        rep.opt_ok = Some(ok);
        if !ok {
            rep.verdict = Verdict::Fail;
        }
    }
    if state.items().is_empty() {
        return rep;
    }
    let Some(ctx) = compute_a(scenarios, state.smallest_item(), state.unmatched_positive_volumes()) else {
        rep.verdict = Verdict::Unverifiable;
        rep.detail = "no scenario contains 1-a".into();
        return rep;
    };
    rep.a = Some(ctx.a.clone());
    let scenario = weighting_scenario(scenarios, &ctx.a, &ctx.scenario).clone();
    rep.scenario = Some(scenario.clone());
    let choice = match uvw.lookup(&scenario) {
        Some(rec) => Some(rec.uvw.clone()),
        None if opts.fallback => {
            rep.canonical = false;
            fallback_uvw(table, &scenario)
        }
        None => None,
    };
    let Some(choice) = choice else {
        rep.verdict = Verdict::Unverifiable;
        rep.detail = "no uvw data for the scenario".into();
        return rep;
    };
    rep.uvw = Some(choice.clone());
    let wf = match build_weight_function(table, &scenario, &choice) {
        Ok(wf) => wf,
        Err(e) => {
            rep.verdict = Verdict::Unverifiable;
            rep.detail = e.to_string();
            return rep;
        }
    };
    let weight = total_item_weight(state.items(), &wf, table, &ctx.a);
    if Rational::from(bins) > &weight + &psi {
        rep.verdict = Verdict::Fail;
    }
    rep.weight = Some(weight);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::params::tests::r;
    use crate::scenarios::enumerate_scenarios;

    fn run(items: &[Rational]) -> EmpiricalReport {
        let table = data::canonical_table();
        let scenarios = enumerate_scenarios(&table);
        let mut state = PackingState::new(table);
        state.pack_all(items, true).unwrap();
        let opts = EmpiricalOptions { psi: 0, fallback: true, opt: None };
        empirical_check(&state, &scenarios, &data::uvw_table(), &opts)
    }

    #[test]
    fn all_huge_stream_is_paid_exactly() {
        let rep = run(&vec![r("3/5"); 1000]);
        assert_eq!(rep.bins, 1000);
        assert_eq!(rep.a, Some(r("3/5")));
        assert_eq!(rep.weight, Some(r("1000")));
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn empty_input_passes() {
        assert_eq!(run(&[]).verdict, Verdict::Pass);
    }

    #[test]
    fn boundary_a_moves_to_the_next_scenario() {
        let table = data::canonical_table();
        let sc = enumerate_scenarios(&table);
        let located = sc.iter().find(|s| s.y == r("49/320")).unwrap();
        let s = weighting_scenario(&sc, &r("271/320"), located);
        assert_eq!((s.x.clone(), s.y.clone()), (r("49/320"), r("1/6")));
        let inner = sc.iter().find(|s| s.contains(&r("2/5"))).unwrap();
        assert_eq!(weighting_scenario(&sc, &r("3/5"), inner), inner);
    }
}
