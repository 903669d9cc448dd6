//! Per-scenario weight functions: required container weights, item weights
//! `omega_j`, the tiny density `rho`, the threshold weights `u, v` and the
//! feasibility constraints on `(u, v, w)`.

mod table;

use thiserror::Error;

use crate::numerics::Rational;
use crate::params::{ClassKind, ClassTable};
use crate::scenarios::Scenario;

pub use table::{Bound, WeightRow, WeightTable, WeightTableError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("required weight undefined for volume {volume} in scenario {scenario}")]
    Undefined { volume: Rational, scenario: String },
    #[error("class {0} is the large threshold class; its items are weighted by u and v")]
    ThresholdClass(usize),
    #[error("rho = {0} exceeds 2")]
    RhoTooLarge(Rational),
    #[error("u/v must be given exactly when the threshold class is large (scenario {0})")]
    ShapeMismatch(String),
    #[error("infeasible u/v/w: {0}")]
    Infeasible(String),
    #[error("weight table does not cover class {0}")]
    Uncovered(usize),
}

/// Scenario variables. `u`, `v` exist iff the threshold class is large.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Uvw {
    pub u: Option<Rational>,
    pub v: Option<Rational>,
    pub w: Rational,
}

impl Uvw {
    pub fn basic(w: Rational) -> Self {
        Uvw { u: None, v: None, w }
    }

    pub fn large(u: Rational, v: Rational, w: Rational) -> Self {
        Uvw { u: Some(u), v: Some(v), w }
    }
}

/// Outcome of the constraint check; `violations` names every failed inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub violations: Vec<String>,
}

impl Feasibility {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn in_unit(name: &str, x: &Rational, out: &mut Vec<String>) {
    if x.is_negative() || *x > Rational::one() {
        out.push(format!("{name} = {x} outside [0,1]"));
    }
}

/// Exact check of the constraint system for a large threshold class with
/// proportions `alpha_1k`, `alpha_2k`. Without `u`, `v` only `0 <= w <= 1` is checked.
pub fn check_constraints(uvw: &Uvw, alpha_1k: &Rational, alpha_2k: &Rational) -> Feasibility {
    let mut v_out = Vec::new();
    in_unit("w", &uvw.w, &mut v_out);
    if let (Some(u), Some(v)) = (&uvw.u, &uvw.v) {
        let one = Rational::one();
        let w = &uvw.w;
        in_unit("u", u, &mut v_out);
        in_unit("v", v, &mut v_out);
        if u > v {
            v_out.push("u <= v".into());
        }
        if u * &(&one + alpha_2k) + w * alpha_1k < one {
            v_out.push("u(1+a2) + w*a1 >= 1".into());
        }
        if u * alpha_2k + v < one {
            v_out.push("u*a2 + v >= 1".into());
        }
        let lhs = v * alpha_1k + &(u * alpha_2k) * 2 + &(&one - w) * alpha_2k;
        if lhs < one {
            v_out.push("v*a1 + 2u*a2 + (1-w)*a2 >= 1".into());
        }
    }
    Feasibility { violations: v_out }
}

/// Lexicographically smallest `(u, v)` on the grid `1/2^bits` satisfying the
/// constraints for a given `w`, or `None` when none exists.
pub fn min_uv_for_w(w: &Rational, alpha_1k: &Rational, alpha_2k: &Rational, bits: u32) -> Option<(Rational, Rational)> {
    let one = Rational::one();
    let den = 1i64 << bits;
    let ceil_grid = |x: Rational| -> Rational {
        let scaled = &x * den;
        let f = scaled.floor();
        let c = if Rational::from(f.clone()) == scaled { f } else { f + 1 };
        Rational::from(c) / Rational::from(den)
    };
    let zero = Rational::zero();
    let mut u = ((&one - w * alpha_1k) / (&one + alpha_2k)).max(zero.clone());
    if alpha_1k.is_positive() {
        // keeps the last constraint satisfiable with v <= 1
        u = u.max((&one - alpha_1k - &(&one - w) * alpha_2k) / (alpha_2k * 2));
    }
    let u = ceil_grid(u);
    let mut v = u.clone().max(&one - &(&u * alpha_2k));
    if alpha_1k.is_positive() {
        let need = (&one - &(&u * alpha_2k) * 2 - &(&one - w) * alpha_2k) / alpha_1k.clone();
        v = v.max(need);
    }
    let v = ceil_grid(v.max(zero));
    let uvw = Uvw::large(u.clone(), v.clone(), w.clone());
    check_constraints(&uvw, alpha_1k, alpha_2k).feasible().then_some((u, v))
}

/// Required weight of a container of the given volume in scenario `(x, y]`;
/// `None` where the weight is left undefined.
pub fn required_weight_at(volume: &Rational, x: &Rational, y: &Rational, w: &Rational) -> Option<Rational> {
    let one = Rational::one();
    if *volume > Rational::half() {
        if *volume >= &one - x {
            Some(one)
        } else if *volume <= &one - y {
            Some(w.clone())
        } else {
            None
        }
    } else if volume <= x {
        Some(&one - w)
    } else if volume >= y {
        Some(one)
    } else {
        None
    }
}

/// Required weight of a container of the given volume. Huge items are not
/// handled here (their weight depends on `a` directly).
pub fn required_weight(volume: &Rational, scenario: &Scenario, w: &Rational) -> Result<Rational, WeightError> {
    required_weight_at(volume, &scenario.x, &scenario.y, w).ok_or_else(|| WeightError::Undefined {
        volume: volume.clone(),
        scenario: scenario.label(),
    })
}

/// Volume used for `r(i, j)`: single large items are represented by the
/// class's upper end (the whole class lies on one side of the scenario).
fn representative_volume(table: &ClassTable, j: usize, i: u32) -> Rational {
    if table.kind(j) == ClassKind::Large && i == 1 {
        table.boundary(j - 1).clone()
    } else {
        table.a_value(j, i)
    }
}

pub fn container_required_weight(
    table: &ClassTable,
    j: usize,
    i: u32,
    scenario: &Scenario,
    w: &Rational,
) -> Result<Rational, WeightError> {
    if !scenario.basic && scenario.k.j == j {
        return Err(WeightError::ThresholdClass(j));
    }
    required_weight(&representative_volume(table, j, i), scenario, w)
}

/// `omega_j = sum_i alpha_ij r(i,j) / sum_i i alpha_ij` for `2 <= j <= M`.
pub fn class_item_weight(table: &ClassTable, j: usize, scenario: &Scenario, w: &Rational) -> Result<Rational, WeightError> {
    let mut num = Rational::zero();
    let mut den = Rational::zero();
    for (i, a) in table.support(j) {
        num += a * &container_required_weight(table, j, *i, scenario, w)?;
        den += a * *i as i64;
    }
    Ok(num / den)
}

/// `rho = sum_i alpha_i r_i / sum_i (A_i - t_M) alpha_i`.
pub fn tiny_density(table: &ClassTable, scenario: &Scenario, w: &Rational) -> Result<Rational, WeightError> {
    let t_m = table.boundary(table.m());
    let mut num = Rational::zero();
    let mut den = Rational::zero();
    for tt in table.tiny_types() {
        num += &tt.alpha * &required_weight(&tt.threshold, scenario, w)?;
        den += &tt.alpha * &(&tt.threshold - t_m);
    }
    let rho = num / den;
    if rho > Rational::integer(2) {
        return Err(WeightError::RhoTooLarge(rho));
    }
    Ok(rho)
}

/// Weight assigned to the items of one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassWeight {
    /// Huge: 1 at or above `a`, `w` below.
    Huge { w: Rational },
    /// Large threshold class: `u` up to `1-a`, `v` above.
    Threshold { u: Rational, v: Rational },
    Uniform(Rational),
    /// Tiny: size times `rho`.
    Density(Rational),
}

/// The complete weight function of one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightFunction {
    pub scenario: Scenario,
    pub uvw: Uvw,
    pub rho: Rational,
    /// Indexed by class `1..=M+1`; index 0 unused.
    classes: Vec<ClassWeight>,
}

impl WeightFunction {
    pub fn class_weight(&self, j: usize) -> &ClassWeight {
        &self.classes[j]
    }

    pub fn class_count(&self) -> usize {
        self.classes.len() - 1
    }

    /// `omega_j`, or `None` for the huge, tiny and large threshold classes.
    pub fn omega(&self, j: usize) -> Option<&Rational> {
        match &self.classes[j] {
            ClassWeight::Uniform(x) => Some(x),
            _ => None,
        }
    }

    /// Weight of one item given the terminal value `a`.
    pub fn item_weight(&self, table: &ClassTable, size: &Rational, a: &Rational) -> Rational {
        let j = table.classify(size).expect("item size in (0,1]").j;
        match &self.classes[j] {
            ClassWeight::Huge { w } => {
                if size >= a {
                    Rational::one()
                } else {
                    w.clone()
                }
            }
            ClassWeight::Threshold { u, v } => {
                if *size <= Rational::one() - a {
                    u.clone()
                } else {
                    v.clone()
                }
            }
            ClassWeight::Uniform(x) => x.clone(),
            ClassWeight::Density(rho) => size * rho,
        }
    }

    /// Builds a weight function directly from an imported weight table,
    /// bypassing the parameter-based construction.
    pub fn from_table(table: &ClassTable, scenario: Scenario, wt: &WeightTable) -> Result<Self, WeightError> {
        let rho = wt.rho().ok_or(WeightError::Uncovered(table.tiny_class()))?;
        let w = wt.huge_below_a().ok_or(WeightError::Uncovered(1))?;
        let mut classes = vec![ClassWeight::Uniform(Rational::zero()); table.m() + 2];
        classes[1] = ClassWeight::Huge { w: w.clone() };
        classes[table.tiny_class()] = ClassWeight::Density(rho.clone());
        let mut uvw = Uvw::basic(w);
        for (j, slot) in classes.iter_mut().enumerate().take(table.m() + 1).skip(2) {
            if !scenario.basic && scenario.k.j == j {
                let (u, v) = wt
                    .threshold_uv()
                    .or_else(|| wt.weight_of_interval(table.boundary(j), table.boundary(j - 1)).map(|x| (x.clone(), x)))
                    .ok_or(WeightError::Uncovered(j))?;
                uvw.u = Some(u.clone());
                uvw.v = Some(v.clone());
                *slot = ClassWeight::Threshold { u, v };
            } else {
                let x = wt
                    .weight_of_interval(table.boundary(j), table.boundary(j - 1))
                    .ok_or(WeightError::Uncovered(j))?;
                *slot = ClassWeight::Uniform(x);
            }
        }
        Ok(WeightFunction { scenario, uvw, rho, classes })
    }

    /// Published layout: one row per maximal run of classes with equal weight;
/// the threshold class is one row when `u = v`, the huge class one row when `w = 1`.
    pub fn to_table(&self, table: &ClassTable) -> WeightTable {
        let mut rows: Vec<WeightRow> = Vec::new();
        rows.push(WeightRow {
            lo: Bound::Value(Rational::zero()),
            hi: Bound::Value(table.boundary(table.m()).clone()),
            weight: self.rho.clone(),
        });
        for j in (2..=table.m()).rev() {
            let lo = table.boundary(j).clone();
            let hi = table.boundary(j - 1).clone();
            match &self.classes[j] {
                ClassWeight::Threshold { u, v } if u == v => {
                    rows.push(WeightRow { lo: Bound::Value(lo), hi: Bound::Value(hi), weight: u.clone() });
                }
                ClassWeight::Threshold { u, v } => {
                    rows.push(WeightRow { lo: Bound::Value(lo), hi: Bound::OneMinusA, weight: u.clone() });
                    rows.push(WeightRow { lo: Bound::OneMinusA, hi: Bound::Value(hi), weight: v.clone() });
                }
                ClassWeight::Uniform(x) => {
                    let merge = rows.len() > 1
                        && rows.last().map(|r| r.weight == *x && r.hi == Bound::Value(lo.clone())) == Some(true);
                    if merge {
                        rows.last_mut().unwrap().hi = Bound::Value(hi);
                    } else {
                        rows.push(WeightRow { lo: Bound::Value(lo), hi: Bound::Value(hi), weight: x.clone() });
                    }
                }
                _ => unreachable!("classes 2..=M carry omega or u/v"),
            }
        }
        if self.uvw.w == Rational::one() {
            rows.push(WeightRow { lo: Bound::Value(Rational::half()), hi: Bound::Value(Rational::one()), weight: Rational::one() });
        } else {
            rows.push(WeightRow { lo: Bound::Value(Rational::half()), hi: Bound::A, weight: self.uvw.w.clone() });
            rows.push(WeightRow { lo: Bound::A, hi: Bound::Value(Rational::one()), weight: Rational::one() });
        }
        WeightTable {
            scenario: Some((self.scenario.x.clone(), self.scenario.y.clone())),
            rho: Some(self.rho.clone()),
            u: self.uvw.u.clone(),
            v: self.uvw.v.clone(),
            w: Some(self.uvw.w.clone()),
            rows,
        }
    }
}

/// Assembles and checks the weight function of a scenario.
pub fn build_weight_function(table: &ClassTable, scenario: &Scenario, uvw: &Uvw) -> Result<WeightFunction, WeightError> {
    let large = !scenario.basic;
    if large != (uvw.u.is_some() && uvw.v.is_some()) || uvw.u.is_some() != uvw.v.is_some() {
        return Err(WeightError::ShapeMismatch(scenario.label()));
    }
    let k = scenario.k.j;
    let verdict = if large {
        check_constraints(uvw, &table.alpha(k, 1), &table.alpha(k, 2))
    } else {
        check_constraints(uvw, &Rational::zero(), &Rational::one())
    };
    if !verdict.feasible() {
        return Err(WeightError::Infeasible(verdict.violations.join("; ")));
    }
    let mut classes = vec![ClassWeight::Uniform(Rational::zero()); table.m() + 2];
    classes[1] = ClassWeight::Huge { w: uvw.w.clone() };
    for (j, slot) in classes.iter_mut().enumerate().take(table.m() + 1).skip(2) {
        *slot = if large && j == k {
            ClassWeight::Threshold { u: uvw.u.clone().unwrap(), v: uvw.v.clone().unwrap() }
        } else {
            ClassWeight::Uniform(class_item_weight(table, j, scenario, &uvw.w)?)
        };
    }
    let rho = tiny_density(table, scenario, &uvw.w)?;
    classes[table.tiny_class()] = ClassWeight::Density(rho.clone());
    Ok(WeightFunction { scenario: scenario.clone(), uvw: uvw.clone(), rho, classes })
}

/// Sum of item weights for a terminated input with quantity `a`.
pub fn total_item_weight(items: &[Rational], wf: &WeightFunction, table: &ClassTable, a: &Rational) -> Rational {
    items.iter().map(|s| wf.item_weight(table, s, a)).sum()
}
