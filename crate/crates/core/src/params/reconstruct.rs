//! Recovers unpublished container proportions from complete weight tables.
//!
//! For a class `j` observed in a table, `omega_j * sum_i i a_i = sum_i a_i r(i,j)`
//! is linear in the unknown proportions. Candidate supports of size 1, 2, 3
//! are tried in that order; the smallest size with a unique positive solution
//! consistent with every table wins. Remaining ties are broken by a `[types]`
//! hint, then by requiring that the known scenario endpoints lie in `V`.
//!
//! The tiny class is handled for two container types with a known first
//! threshold: the second threshold is searched among the values of `V` (and 1).

use std::collections::BTreeSet;
use std::fmt;

use crate::numerics::Rational;
use crate::params::PartialTable;
use crate::weights::{required_weight_at, WeightTable};

/// How a class's proportions were obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassStatus {
    /// Values were present in the input.
    Given,
    /// Unique consistent solution.
    Determined,
    /// Several consistent supports; chosen by the `[types]` hint.
    ByHint,
    /// Several consistent supports; the only one explaining the known scenario endpoints.
    ByEndpoints,
    /// Not observed, rank deficient, or several candidates remain.
    Undetermined(String),
    /// Given or unique values contradict a table row.
    Conflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassOutcome {
    pub class: usize,
    pub status: ClassStatus,
    /// `(i, alpha_ij)` for determined classes.
    pub alphas: Vec<(u32, Rational)>,
    /// Every consistent support found (for reporting).
    pub candidates: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub table: PartialTable,
    pub classes: Vec<ClassOutcome>,
    pub tiny: ClassStatus,
    /// Every consistent `(A_2, alpha_1)` pair found for the tiny class.
    pub tiny_candidates: Vec<(Rational, Rational)>,
}

impl ReconstructionReport {
    pub fn undetermined(&self) -> Vec<usize> {
        self.classes
            .iter()
            .filter(|c| matches!(c.status, ClassStatus::Undetermined(_)))
            .map(|c| c.class)
            .collect()
    }

    pub fn conflicts(&self) -> Vec<&ClassOutcome> {
        self.classes
            .iter()
            .filter(|c| matches!(c.status, ClassStatus::Conflict(_)))
            .collect()
    }
}

impl fmt::Display for ClassStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassStatus::Given => write!(f, "given"),
            ClassStatus::Determined => write!(f, "determined"),
            ClassStatus::ByHint => write!(f, "determined (support hint)"),
            ClassStatus::ByEndpoints => write!(f, "determined (scenario endpoints)"),
            ClassStatus::Undetermined(why) => write!(f, "undetermined: {why}"),
            ClassStatus::Conflict(why) => write!(f, "conflict: {why}"),
        }
    }
}

impl fmt::Display for ReconstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            if c.status == ClassStatus::Given {
                continue;
            }
            let support: Vec<String> = c.alphas.iter().map(|(i, a)| format!("{i}:{a}")).collect();
            writeln!(f, "class {} {} [{}]", c.class, c.status, support.join(" "))?;
        }
        writeln!(f, "tiny {}", self.tiny)
    }
}

/// One table reduced to what reconstruction needs.
struct Observation<'a> {
    x: Rational,
    y: Rational,
    w: Rational,
    /// Threshold class of the scenario when it is large.
    large_threshold: Option<usize>,
    table: &'a WeightTable,
}

struct Geometry {
    /// `t_0 ..= t_{M+1}`.
    t: Vec<Rational>,
    b: usize,
}

impl Geometry {
    fn new(inner: &[Rational]) -> Self {
        let mut t = vec![Rational::one()];
        t.extend(inner.iter().cloned());
        t.push(Rational::zero());
        let third = Rational::frac(1, 3);
        let b = t.iter().position(|x| *x == third).unwrap_or(0);
        Geometry { t, b }
    }

    fn m(&self) -> usize {
        self.t.len() - 2
    }

    fn class_of(&self, size: &Rational) -> usize {
        self.t.partition_point(|x| x >= size)
    }

    fn large(&self, j: usize) -> bool {
        (2..=self.b).contains(&j)
    }

    fn gamma(&self, j: usize) -> u32 {
        self.t[j - 1].recip().expect("positive boundary").floor_i64() as u32
    }

    fn volume(&self, j: usize, i: u32) -> Rational {
        &self.t[j - 1] * i as i64
    }

    fn representative(&self, j: usize, i: u32) -> Rational {
        if self.large(j) && i == 1 {
            self.t[j - 1].clone()
        } else {
            self.volume(j, i)
        }
    }
}

enum Solution {
    Unique(Vec<Rational>),
    Underdetermined,
    Inconsistent,
}

/// Exact Gauss-Jordan elimination on an augmented matrix.
#[allow(clippy::needless_range_loop)]
fn solve(mut rows: Vec<Vec<Rational>>, n: usize) -> Solution {
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip().expect("nonzero pivot");
        for c in col..=n {
            rows[rank][c] = &rows[rank][c] * &inv;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..=n {
                    let delta = &f * &rows[rank][c];
                    rows[r][c] -= &delta;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| !r[n].is_zero()) {
        return Solution::Inconsistent;
    }
    if rank < n {
        return Solution::Underdetermined;
    }
    Solution::Unique((0..n).map(|i| rows[i][n].clone()).collect())
}

fn combinations(gamma: u32, size: usize) -> Vec<Vec<u32>> {
    fn rec(start: u32, gamma: u32, size: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..=gamma {
            cur.push(i);
            rec(i + 1, gamma, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, gamma, size, &mut Vec::new(), &mut out);
    out
}

/// Observed `(omega, r-vector over 1..=gamma)` pairs of class `j`.
fn class_rows(geo: &Geometry, obs: &[Observation], j: usize) -> Vec<(Rational, Vec<Option<Rational>>)> {
    let gamma = geo.gamma(j);
    obs.iter()
        .filter(|o| o.large_threshold != Some(j))
        .filter_map(|o| {
            let omega = o.table.weight_of_interval(&geo.t[j], &geo.t[j - 1])?;
            let r = (1..=gamma)
                .map(|i| required_weight_at(&geo.representative(j, i), &o.x, &o.y, &o.w))
                .collect();
            Some((omega, r))
        })
        .collect()
}

fn solve_support(rows: &[(Rational, Vec<Option<Rational>>)], support: &[u32]) -> Solution {
    let n = support.len();
    let mut m = Vec::new();
    for (omega, r) in rows {
        let mut row = Vec::with_capacity(n + 1);
        for &i in support {
            let Some(ri) = &r[i as usize - 1] else {
                return Solution::Inconsistent;
            };
            row.push(ri - &(omega * i as i64));
        }
        row.push(Rational::zero());
        m.push(row);
    }
    let mut sum = vec![Rational::one(); n];
    sum.push(Rational::one());
    m.push(sum);
    solve(m, n)
}

/// Checks the given proportions against every observed row.
fn consistent(rows: &[(Rational, Vec<Option<Rational>>)], alphas: &[(u32, Rational)]) -> Result<(), String> {
    for (omega, r) in rows {
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for (i, a) in alphas {
            let Some(ri) = &r[*i as usize - 1] else {
                return Err(format!("required weight of type {i} undefined"));
            };
            num += a * ri;
            den += a * *i as i64;
        }
        if num / den != *omega {
            return Err(format!("omega {omega} not reproduced"));
        }
    }
    Ok(())
}

struct Candidates {
    size: usize,
    found: Vec<(Vec<u32>, Vec<Rational>)>,
    rank_deficient: bool,
}

fn search(geo: &Geometry, rows: &[(Rational, Vec<Option<Rational>>)], j: usize) -> Candidates {
    let gamma = geo.gamma(j);
    for size in 1..=3usize {
        let mut found = Vec::new();
        let mut rank_deficient = false;
        for support in combinations(gamma, size) {
            if geo.large(j) && !support.contains(&2) {
                continue;
            }
            match solve_support(rows, &support) {
                Solution::Unique(vals) if vals.iter().all(|v| v.is_positive()) => found.push((support, vals)),
                Solution::Underdetermined => rank_deficient = true,
                _ => {}
            }
        }
        if !found.is_empty() || rank_deficient {
            return Candidates { size, found, rank_deficient };
        }
    }
    Candidates { size: 0, found: Vec::new(), rank_deficient: false }
}

fn value_set_of(geo: &Geometry, j: usize, support: &[u32]) -> Vec<Rational> {
    let one = Rational::one();
    support
        .iter()
        .flat_map(|&i| {
            let a = geo.volume(j, i);
            [&one - &a, a]
        })
        .collect()
}

/// Completes `partial` from `tables`. `endpoints` are scenario endpoints
/// known to belong to `V` (used only to break ties).
/// A support and its proportions.
type Candidate = (Vec<u32>, Vec<Rational>);

pub fn reconstruct_params(partial: &PartialTable, tables: &[WeightTable], endpoints: &[Rational]) -> ReconstructionReport {
    let geo = Geometry::new(&partial.boundaries);
    let obs: Vec<Observation> = tables
        .iter()
        .filter_map(|t| {
            let (x, y) = t.scenario.clone()?;
            let w = t.huge_below_a()?;
            let k = geo.class_of(&y);
            let large_threshold = geo.large(k).then_some(k);
            Some(Observation { x, y, w, large_threshold, table: t })
        })
        .collect();

    let mut out = partial.clone();
    let mut outcomes = Vec::new();
    let mut ambiguous: Vec<(usize, Vec<Candidate>)> = Vec::new();
    for j in 2..=geo.m() {
        let rows = class_rows(&geo, &obs, j);
        if let Some(given) = partial.known_alphas(j) {
            let status = match consistent(&rows, &given) {
                Ok(()) => ClassStatus::Given,
                Err(e) => ClassStatus::Conflict(e),
            };
            outcomes.push(ClassOutcome { class: j, status, alphas: given, candidates: Vec::new() });
            continue;
        }
        let mut outcome = ClassOutcome {
            class: j,
            status: ClassStatus::Undetermined("not observed in any table".into()),
            alphas: Vec::new(),
            candidates: Vec::new(),
        };
        if rows.is_empty() {
            outcomes.push(outcome);
            continue;
        }
        let cands = search(&geo, &rows, j);
        outcome.candidates = cands.found.iter().map(|(s, _)| s.clone()).collect();
        let hinted = partial.type_hints.get(&j);
        let pick = |found: &[(Vec<u32>, Vec<Rational>)], support: &[u32]| {
            found.iter().find(|(s, _)| s == support).cloned()
        };
        match (cands.found.len(), hinted) {
            (_, Some(h)) => {
                // the hint may name a larger support than the minimal size
                let from_hint = pick(&cands.found, h).or_else(|| match solve_support(&rows, h) {
                    Solution::Unique(v) if v.iter().all(|x| x.is_positive()) => Some((h.clone(), v)),
                    _ => None,
                });
                match from_hint {
                    Some((s, v)) => {
                        outcome.status = ClassStatus::ByHint;
                        outcome.alphas = s.into_iter().zip(v).collect();
                    }
                    None => outcome.status = ClassStatus::Conflict(format!("hinted support {h:?} is inconsistent")),
                }
            }
            (1, None) if !cands.rank_deficient => {
                let (s, v) = cands.found[0].clone();
                outcome.status = ClassStatus::Determined;
                outcome.alphas = s.into_iter().zip(v).collect();
            }
            (0, None) if cands.rank_deficient => {
                outcome.status = ClassStatus::Undetermined("rank deficient".into());
            }
            (0, None) => {
                outcome.status = ClassStatus::Undetermined("no consistent support of size <= 3".into());
            }
            (_, None) => {
                outcome.status = ClassStatus::Undetermined(format!("{} supports of size {}", cands.found.len(), cands.size));
                ambiguous.push((j, cands.found.clone()));
            }
        }
        outcomes.push(outcome);
    }

    // tie-break by endpoints: every endpoint must be in V
    let mut explained: BTreeSet<Rational> = geo.t[1..].iter().cloned().collect();
    for o in &outcomes {
        let support: Vec<u32> = o.alphas.iter().map(|(i, _)| *i).collect();
        explained.extend(value_set_of(&geo, o.class, &support));
    }
    for (a, _) in partial.tiny.iter().filter_map(|(_, a, al)| a.clone().map(|a| (a, al))) {
        explained.insert(&Rational::one() - &a);
        explained.insert(a);
    }
    let unexplained: Vec<&Rational> = endpoints.iter().filter(|e| !explained.contains(*e)).collect();
    for (j, found) in ambiguous {
        let good: Vec<_> = found
            .iter()
            .filter(|(s, _)| {
                let vs = value_set_of(&geo, j, s);
                unexplained.iter().all(|e| vs.contains(e))
            })
            .collect();
        if good.len() == 1 && !unexplained.is_empty() {
            let o = outcomes.iter_mut().find(|o| o.class == j).expect("class outcome");
            o.status = ClassStatus::ByEndpoints;
            o.alphas = good[0].0.iter().cloned().zip(good[0].1.iter().cloned()).collect();
            explained.extend(value_set_of(&geo, j, &good[0].0));
        }
    }

    for o in &outcomes {
        if matches!(o.status, ClassStatus::Determined | ClassStatus::ByHint | ClassStatus::ByEndpoints) {
            out.alphas.insert(o.class, o.alphas.iter().map(|(i, a)| (*i, Some(a.clone()))).collect());
        }
    }

    let (tiny, tiny_candidates) = reconstruct_tiny(&geo, &obs, &mut out, &explained);
    ReconstructionReport { table: out, classes: outcomes, tiny, tiny_candidates }
}

type TinyCandidates = Vec<(Rational, Rational)>;

fn reconstruct_tiny(
    geo: &Geometry,
    obs: &[Observation],
    out: &mut PartialTable,
    values: &BTreeSet<Rational>,
) -> (ClassStatus, TinyCandidates) {
    let (status, found) = tiny_search(geo, obs, out, values);
    if let (ClassStatus::Determined, [(a2, al)]) = (&status, found.as_slice()) {
        let a1 = out.tiny[0].1.clone();
        out.tiny = vec![(1, a1, Some(al.clone())), (2, Some(a2.clone()), Some(Rational::one() - al))];
    }
    (status, found)
}

fn tiny_search(
    geo: &Geometry,
    obs: &[Observation],
    out: &PartialTable,
    values: &BTreeSet<Rational>,
) -> (ClassStatus, TinyCandidates) {
    if !out.tiny.is_empty() && out.tiny.iter().all(|(_, a, al)| a.is_some() && al.is_some()) {
        return (ClassStatus::Given, Vec::new());
    }
    let a1 = match out.tiny.as_slice() {
        [(1, Some(a1), _), (2, None, _)] => a1.clone(),
        _ => {
            let why = "only two tiny types with a known first threshold are supported";
            return (ClassStatus::Undetermined(why.into()), Vec::new());
        }
    };
    let t_m = geo.t[geo.m()].clone();
    let rhos: Vec<(&Observation, Rational)> = obs.iter().filter_map(|o| o.table.rho().map(|r| (o, r))).collect();
    if rhos.len() < 2 {
        return (ClassStatus::Undetermined("fewer than two tables".into()), Vec::new());
    }
    let one = Rational::one();
    let c1 = &a1 - &t_m;
    let mut found = Vec::new();
    let mut cands: BTreeSet<&Rational> = values.iter().filter(|v| **v > a1 && **v <= one).collect();
    cands.insert(&one);
    for cand in cands {
        let c2 = cand - &t_m;
        // rho (c1 al + c2 (1-al)) = al r1 + (1-al) r2
        let mut alpha: Option<Rational> = None;
        let mut ok = true;
        for (o, rho) in &rhos {
            let (Some(r1), Some(r2)) = (
                required_weight_at(&a1, &o.x, &o.y, &o.w),
                required_weight_at(cand, &o.x, &o.y, &o.w),
            ) else {
                ok = false;
                break;
            };
            let coef = rho * &c1 - &(rho * &c2) - &r1 + &r2;
            let rhs = &r2 - &(rho * &c2);
            match &alpha {
                None if !coef.is_zero() => alpha = Some(rhs / coef),
                None => {
                    if !rhs.is_zero() {
                        ok = false;
                        break;
                    }
                }
                Some(al) => {
                    if &coef * al != rhs {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if let (true, Some(al)) = (ok, alpha) {
            if al.is_positive() && al < one {
                found.push((cand.clone(), al));
            }
        }
    }
    let status = match found.len() {
        1 => ClassStatus::Determined,
        0 => ClassStatus::Undetermined("no candidate second threshold fits".into()),
        n => ClassStatus::Undetermined(format!("{n} candidate second thresholds")),
    };
    (status, found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::tests::{r, toy_table};
    use crate::params::write_params;
    use crate::scenarios::enumerate_scenarios;
    use crate::weights::{build_weight_function, Uvw};

    fn toy_tables(ws: &[&str]) -> Vec<WeightTable> {
        let t = toy_table();
        let sc = enumerate_scenarios(&t);
        let basic: Vec<_> = sc.iter().filter(|s| s.basic).collect();
        ws.iter()
            .zip(basic.iter().cycle().skip(1))
            .map(|(w, s)| build_weight_function(&t, s, &Uvw::basic(r(w))).unwrap().to_table(&t))
            .collect()
    }

    fn strip(classes: &[usize]) -> PartialTable {
        let mut p = crate::params::parse_partial_params(&write_params(&toy_table())).unwrap();
        for j in classes {
            p.alphas.remove(j);
        }
        p
    }

    #[test]
    fn gauss_jordan_cases() {
        let one = || r("1");
        match solve(vec![vec![one(), one(), r("3")], vec![one(), r("-1"), one()]], 2) {
            Solution::Unique(v) => assert_eq!(v, vec![r("2"), r("1")]),
            _ => panic!(),
        }
        assert!(matches!(solve(vec![vec![one(), one(), one()]], 2), Solution::Underdetermined));
        assert!(matches!(
            solve(vec![vec![one(), one()], vec![one(), r("2")]], 1),
            Solution::Inconsistent
        ));
    }

    #[test]
    fn recovers_stripped_classes() {
        let tables = toy_tables(&["0", "1/3", "3/4"]);
        let partial = strip(&[2, 4]);
        let rep = reconstruct_params(&partial, &tables, &[]);
        assert!(rep.conflicts().is_empty(), "{rep}");
        for c in [2, 4] {
            let o = rep.classes.iter().find(|o| o.class == c).unwrap();
            assert!(matches!(o.status, ClassStatus::Determined | ClassStatus::ByHint), "{rep}");
        }
        assert_eq!(rep.table.into_table().unwrap(), toy_table());
    }

    #[test]
    fn single_table_is_rank_deficient_or_ambiguous() {
        let tables = toy_tables(&["1/3"]);
        let rep = reconstruct_params(&strip(&[4]), &tables, &[]);
        let o = rep.classes.iter().find(|o| o.class == 4).unwrap();
        assert!(!matches!(o.status, ClassStatus::Given | ClassStatus::Conflict(_)), "{rep}");
    }

    #[test]
    fn wrong_given_value_is_a_conflict() {
        let tables = toy_tables(&["0", "1/3"]);
        let mut partial = strip(&[]);
        partial.alphas.insert(4, vec![(1, Some(r("1/2"))), (3, Some(r("1/2")))]);
        let rep = reconstruct_params(&partial, &tables, &[]);
        assert_eq!(rep.conflicts().len(), 1);
        assert_eq!(rep.conflicts()[0].class, 4);
    }

    #[test]
    fn tiny_second_threshold() {
        let tables = toy_tables(&["0", "1/3", "3/4", "1/5", "2/3", "1/7"]);
        let mut partial = strip(&[]);
        partial.tiny = vec![(1, Some(r("1/2")), None), (2, None, None)];
        let rep = reconstruct_params(&partial, &tables, &[]);
        assert_eq!(rep.tiny_candidates, vec![(r("1"), r("1/2"))]);
        assert_eq!(rep.tiny, ClassStatus::Determined);
        assert_eq!(rep.table.tiny[1].1, Some(r("1")));
    }
}
