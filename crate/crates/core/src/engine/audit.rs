//! Structural invariants of a packing state.
//!
//! [`PackingState::audit_step`] re-checks only what the last placement can
//! have changed; [`PackingState::audit`] recomputes everything from the raw
//! containers and bins, including the incremental bookkeeping itself.

use std::fmt;

use super::{ClassCounters, ContainerKind, PackingState, Ratio};
use crate::numerics::Rational;
use crate::params::ClassKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, witnesses: Vec<String>) {
        self.checks.push(CheckResult { name, passed: witnesses.is_empty(), witnesses });
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{} {}", if c.passed { "ok  " } else { "FAIL" }, c.name)?;
            for w in c.witnesses.iter().take(5) {
                write!(f, "\n    {w}")?;
            }
            if c.witnesses.len() > 5 {
                write!(f, "\n    ... {} more", c.witnesses.len() - 5)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Counter inequalities for one large class, appended to the per-check witness lists.
fn large_class_checks(j: usize, c: &ClassCounters, a1: Ratio, a2: Ratio, out: &mut [Vec<String>; 6]) {
    let n = c.n[j] as u128;
    let n1 = c.n_type[j][1] as u128;
    let n2 = c.n_type[j][2] as u128;
    let items = c.items[j] as u128;
    let beta = c.declared[j] as u128;
    let (p2, q2) = (a2.num, a2.den);
    let (p1, q1) = (a1.num, a1.den);
    let ctx = || format!("class {j}: n={n} n1={n1} n2={n2} N={items} beta={beta}");
    // n2 <= floor(a2 n)
    if n2 > p2 * n / q2 {
        out[0].push(ctx());
    }
    // n1 <= floor(a1 n) + 2
    if n1 > p1 * n / q1 + 2 {
        out[1].push(ctx());
    }
    // n2 >= a2 n - 2 and n1 >= a1 n
    if q2 * (n2 + 2) < p2 * n {
        out[2].push(ctx());
    }
    if q1 * n1 < p1 * n {
        out[3].push(ctx());
    }
    // (N + beta)/(1 + a2) <= n <= N/(1 + a2) + 2
    if (items + beta) * q2 > n * (q2 + p2) || n * (q2 + p2) > items * q2 + 2 * (q2 + p2) {
        out[4].push(ctx());
    }
    if beta > 4 {
        out[5].push(ctx());
    }
}

const LARGE_CHECKS: [&str; 6] = [
    "type2-upper",
    "type1-upper",
    "type2-lower",
    "type1-lower",
    "containers-vs-items",
    "four-declared",
];

impl PackingState {
    fn large_checks(&self, classes: impl Iterator<Item = usize>, report: &mut AuditReport) {
        let mut out: [Vec<String>; 6] = Default::default();
        for j in classes {
            if self.table.kind(j) != ClassKind::Large {
                continue;
            }
            let a1 = Ratio::of(&self.table.alpha(j, 1));
            let a2 = self.alpha[j][2];
            large_class_checks(j, &self.counters, a1, a2, &mut out);
        }
        for (name, w) in LARGE_CHECKS.into_iter().zip(out) {
            report.push(name, w);
        }
    }

    /// Smallest container volumes over negative and over positive bins.
    pub fn thetas(&self) -> (Option<Rational>, Option<Rational>) {
        let neg = [self.idx.negative.first(), self.idx.temp_all.first()]
            .into_iter()
            .flatten()
            .map(|(v, _)| v.clone())
            .min();
        let pos = self.idx.positive.first().map(|(v, _)| v.clone());
        (neg, pos)
    }

    fn theta_check(&self, neg: Option<Rational>, pos: Option<Rational>, report: &mut AuditReport) {
        let mut w = Vec::new();
        if let (Some(n), Some(p)) = (neg, pos) {
            if &n + &p <= Rational::one() {
                w.push(format!("theta_neg={n} theta_pos={p}"));
            }
        }
        report.push("theta", w);
    }

    fn bin_checks(&self, bins: impl Iterator<Item = usize>, report: &mut AuditReport) {
        let one = Rational::one();
        let (mut cap, mut shape) = (Vec::new(), Vec::new());
        for b in bins {
            let bin = &self.bins[b];
            let mut total = Rational::zero();
            let mut volume = Rational::zero();
            for (c, want_pos) in [(bin.positive, true), (bin.negative, false)] {
                let Some(c) = c else { continue };
                let cont = &self.containers[c];
                total += &cont.total;
                volume += &cont.volume;
                if cont.is_positive() != want_pos || cont.bin != b {
                    shape.push(format!("bin {b}: container {c} in the wrong slot"));
                }
                if cont.kind == ContainerKind::Temporary1 && bin.positive.is_some() {
                    shape.push(format!("bin {b}: temporary container {c} shares its bin"));
                }
            }
            if bin.positive.is_none() && bin.negative.is_none() {
                shape.push(format!("bin {b}: empty"));
            }
            if total > one || volume > one {
                cap.push(format!("bin {b}: items {total}, volume {volume}"));
            }
        }
        report.push("bin-capacity", cap);
        report.push("bin-shape", shape);
    }

    /// With `newest_only`, only the last item of each container is classified;
    /// the per-step audit has already seen the others.
    fn container_checks(&self, ids: impl Iterator<Item = usize>, newest_only: bool, report: &mut AuditReport) {
        let m_bound = self.table.boundary(self.table.m());
        let mut w = Vec::new();
        for c in ids {
            let cont = &self.containers[c];
            let len = cont.items.len();
            if cont.total > cont.volume {
                w.push(format!("container {c}: total {} above volume {}", cont.total, cont.volume));
            }
            if !cont.kind.matches(self.table.kind(cont.class)) {
                w.push(format!("container {c}: kind {} in class {}", cont.kind, cont.class));
            }
            let skip = if newest_only { len.saturating_sub(1) } else { 0 };
            if cont.items[skip..].iter().any(|s| self.table.classify(s).map(|k| k.j).ok() != Some(cont.class)) {
                w.push(format!("container {c}: item of another class"));
            }
            let ok = match cont.kind {
                ContainerKind::Huge | ContainerKind::Regular1 | ContainerKind::Temporary1 | ContainerKind::Declared2 => {
                    len == 1
                }
                ContainerKind::Regular2 => len == 2,
                ContainerKind::Small(i) => {
                    let i = i as usize;
                    if cont.open { len < i } else { len == i }
                }
                ContainerKind::Tiny(i) => {
                    let limit = &self.table.tiny_types()[i as usize - 1].threshold - m_bound;
                    let before_last = &cont.total - cont.items.last().expect("nonempty");
                    before_last <= limit && (cont.open == (cont.total <= limit))
                }
            };
            if !ok {
                w.push(format!("container {c}: {} with {len} items, open={}", cont.kind, cont.open));
            }
        }
        report.push("container-contents", w);
    }

    /// Checks what the most recent placement can have affected.
    pub fn audit_step(&self) -> AuditReport {
        let mut report = AuditReport::default();
        self.large_checks(self.touched.iter().copied(), &mut report);
        let (neg, pos) = self.thetas();
        self.theta_check(neg, pos, &mut report);
        if let Some(ev) = self.trace.last() {
            self.bin_checks(std::iter::once(ev.bin), &mut report);
            let mut ids = vec![ev.container];
            if let Some(t) = &ev.transition {
                ids.push(t.container);
            }
            self.container_checks(ids.into_iter(), true, &mut report);
            let j = ev.class;
            let mut open = Vec::new();
            if let Some(c) = self.open[j] {
                if !self.containers[c].open || self.containers[c].class != j {
                    open.push(format!("class {j}: open pointer to {c} is stale"));
                }
            }
            if self.open[j] != Some(ev.container) && self.containers[ev.container].open {
                open.push(format!("class {j}: container {} open but not registered", ev.container));
            }
            report.push("one-open-container", open);
        }
        report
    }

    /// Recomputes every invariant from scratch.
    pub fn audit(&self) -> AuditReport {
        let mut report = AuditReport::default();
        let classes = self.table.m() + 2;

        // bookkeeping
        let mut recount = ClassCounters::new(&self.table);
        let mut open_per_class = vec![Vec::new(); classes];
        for c in &self.containers {
            recount.n[c.class] += 1;
            recount.n_type[c.class][c.kind.type_index() as usize] += 1;
            recount.items[c.class] += c.items.len() as u64;
            if c.kind == ContainerKind::Declared2 {
                recount.declared[c.class] += 1;
            }
            if c.open {
                open_per_class[c.class].push(c.id);
            }
        }
        let mut w = Vec::new();
        if recount != self.counters {
            for j in 1..classes {
                if recount.n[j] != self.counters.n[j]
                    || recount.n_type[j] != self.counters.n_type[j]
                    || recount.items[j] != self.counters.items[j]
                    || recount.declared[j] != self.counters.declared[j]
                {
                    w.push(format!("class {j}: stored counters differ from recount"));
                }
            }
        }
        let placed: usize = self.containers.iter().map(|c| c.items.len()).sum();
        if placed != self.items.len() {
            w.push(format!("{placed} items in containers, {} packed", self.items.len()));
        }
        let mut fresh = self.clone();
        fresh.idx.positive.clear();
        fresh.idx.negative.clear();
        fresh.idx.temp_all.clear();
        fresh.idx.temp_by_class.iter_mut().for_each(|s| s.clear());
        for b in 0..fresh.bins.len() {
            fresh.index(b);
        }
        if fresh.idx.positive != self.idx.positive
            || fresh.idx.negative != self.idx.negative
            || fresh.idx.temp_all != self.idx.temp_all
            || fresh.idx.temp_by_class != self.idx.temp_by_class
        {
            w.push("bin indexes out of date".into());
        }
        for j in 1..classes {
            let declared: Vec<usize> = self
                .containers
                .iter()
                .filter(|c| c.class == j && c.kind == ContainerKind::Declared2)
                .map(|c| c.id)
                .collect();
            if !declared.iter().copied().eq(self.idx.declared[j].iter().copied()) {
                w.push(format!("class {j}: declared index out of date"));
            }
        }
        report.push("bookkeeping", w);

        self.large_checks(1..classes, &mut report);

        let mut open = Vec::new();
        for (j, ids) in open_per_class.iter().enumerate() {
            if ids.len() > 1 {
                open.push(format!("class {j}: open containers {ids:?}"));
            }
            if ids.first().copied() != self.open[j] {
                open.push(format!("class {j}: open pointer {:?}, actual {ids:?}", self.open[j]));
            }
        }
        report.push("one-open-container", open);

        let mut neg: Option<Rational> = None;
        let mut pos: Option<Rational> = None;
        for bin in &self.bins {
            match (bin.positive, bin.negative) {
                (Some(p), None) => {
                    let v = &self.containers[p].volume;
                    if pos.as_ref().is_none_or(|x| v < x) {
                        pos = Some(v.clone());
                    }
                }
                (None, Some(n)) => {
                    let v = &self.containers[n].volume;
                    if neg.as_ref().is_none_or(|x| v < x) {
                        neg = Some(v.clone());
                    }
                }
                _ => {}
            }
        }
        self.theta_check(neg, pos, &mut report);
        self.bin_checks(0..self.bins.len(), &mut report);
        self.container_checks(0..self.containers.len(), false, &mut report);
        report
    }

    /// The analysis threshold `a`: `1 - s_min/2`, lowered to the smallest
    /// unmatched positive volume.
    pub fn threshold_a(&self) -> Option<Rational> {
        let s = self.s_min.as_ref()?;
        let a_prime = Rational::one() - s * &Rational::half();
        Some(match self.unmatched_positive_volumes().next() {
            Some(v) if v < &a_prime => v.clone(),
            _ => a_prime,
        })
    }

    /// Terminal matching property: negative containers of volume at most
    /// `1 - a` and positive containers below `a` all share a bin.
    pub fn matching_check(&self, a: &Rational) -> CheckResult {
        let limit = Rational::one() - a;
        let mut w = Vec::new();
        for bin in &self.bins {
            match (bin.positive, bin.negative) {
                (None, Some(n)) if self.containers[n].volume <= limit => {
                    w.push(format!("bin {}: unmatched negative container {n}", bin.id))
                }
                (Some(p), None) if &self.containers[p].volume < a => {
                    w.push(format!("bin {}: unmatched positive container {p}", bin.id))
                }
                _ => {}
            }
        }
        CheckResult { name: "terminal-matching", passed: w.is_empty(), witnesses: w }
    }
}
