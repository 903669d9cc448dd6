use super::{verify_scenario, ScenarioReport};
use crate::knapsack::SolveOptions;
use crate::numerics::Rational;
use crate::params::ClassTable;
use crate::scenarios::Scenario;
use crate::weights::{min_uv_for_w, Uvw};

fn candidate(table: &ClassTable, s: &Scenario, w: &Rational, bits: u32) -> Option<Uvw> {
    if s.basic {
        return Some(Uvw::basic(w.clone()));
    }
    let k = s.k.j;
    let (u, v) = min_uv_for_w(w, &table.alpha(k, 1), &table.alpha(k, 2), bits)?;
    Some(Uvw::large(u, v, w.clone()))
}

/// Grid refinement over `w` (with the smallest feasible `u, v` for each `w`),
/// minimising the certified bound. Steps shrink by 16 per round down to
/// `1/2^bits`. Returns the best certified report, if any.
pub fn search_uvw(table: &ClassTable, s: &Scenario, bits: u32, opts: SolveOptions) -> Option<ScenarioReport> {
    let bits = bits.clamp(4, 60);
    let mut best: Option<ScenarioReport> = None;
    let mut centre = Rational::half();
    let mut radius = Rational::half();
    let mut step_bits = 4;
    loop {
        let step = Rational::frac(1, 1i64 << step_bits);
        let mut w = (&centre - &radius).max(Rational::zero());
        let hi = (&centre + &radius).min(Rational::one());
        while w <= hi {
            if let Some(uvw) = candidate(table, s, &w, bits) {
                let rep = verify_scenario(table, s, &uvw, opts);
                if rep.certified() && best.as_ref().is_none_or(|b| rep.r() < b.r()) {
                    best = Some(rep);
                }
            }
            w = &w + &step;
        }
        let Some(b) = &best else { return None };
        if step_bits >= bits {
            return best;
        }
        centre = b.uvw.as_ref().expect("certified reports carry uvw").w.clone();
        radius = step;
        step_bits = (step_bits + 4).min(bits);
    }
}
