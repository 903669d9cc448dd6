//! The Advanced Harmonic online packing state machine.
//!
//! Items arrive one at a time and are packed into containers, which are
//! packed into bins holding at most one positive (volume above 1/2) and one
//! negative container. Every placement is recorded as a [`PlacementEvent`].
//!
//! Where the rules leave a choice open, the engine is deterministic: Best Fit
//! on volumes with ties to the lowest bin id; a class whose single large
//! container is redeclared is the one holding the largest such container
//! (ties to the lowest class).

mod audit;

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::numerics::Rational;
use crate::params::{ClassKind, ClassTable, ContainerKind, ParamError};

pub use audit::{AuditReport, CheckResult};

pub type BinId = usize;
pub type ContainerId = usize;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Domain(#[from] ParamError),
    #[error("audit failed after item {item}:\n{report}")]
    Audit { item: usize, report: AuditReport },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub id: ContainerId,
    pub class: usize,
    pub kind: ContainerKind,
    pub items: Vec<Rational>,
    pub total: Rational,
    pub volume: Rational,
    pub bin: BinId,
    /// Small/tiny containers only: can still receive items.
    pub open: bool,
}

impl Container {
    pub fn is_positive(&self) -> bool {
        self.volume > Rational::half()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bin {
    pub id: BinId,
    pub positive: Option<ContainerId>,
    pub negative: Option<ContainerId>,
}

/// Per-class counts: containers `n_j`, containers per type `n_ij`, items
/// `N_j` and current declared type-2 containers `beta_j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassCounters {
    pub n: Vec<u64>,
    /// `n_type[j][i]`, index 0 unused.
    pub n_type: Vec<Vec<u64>>,
    pub items: Vec<u64>,
    pub declared: Vec<u64>,
}

impl ClassCounters {
    fn new(table: &ClassTable) -> Self {
        let classes = table.m() + 2;
        let n_type = (0..classes)
            .map(|j| {
                let types = match j {
                    0 => 0,
                    1 => 1,
                    _ if j == table.tiny_class() => table.tiny_types().len(),
                    _ if table.kind(j) == ClassKind::Large => 2,
                    _ => table.gamma(j) as usize,
                };
                vec![0; types + 1]
            })
            .collect();
        ClassCounters {
            n: vec![0; classes],
            n_type,
            items: vec![0; classes],
            declared: vec![0; classes],
        }
    }

    pub fn n_ij(&self, j: usize, i: u32) -> u64 {
        self.n_type[j].get(i as usize).copied().unwrap_or(0)
    }
}

/// A type change of an existing container caused by the current placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub container: ContainerId,
    pub from: ContainerKind,
    pub to: ContainerKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementEvent {
    pub item: usize,
    pub size: Rational,
    pub class: usize,
    pub container: ContainerId,
    /// Kind of `container` after the placement.
    pub kind: ContainerKind,
    pub bin: BinId,
    pub new_container: bool,
    pub new_bin: bool,
    pub transition: Option<Transition>,
}

impl fmt::Display for PlacementEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.item, self.class, self.container, self.kind, self.bin)?;
        if let Some(t) = &self.transition {
            write!(f, " {}:{}->{}", t.container, t.from, t.to)?;
        }
        Ok(())
    }
}

/// Proportion `num/den` for exact floor computations on counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Ratio {
    num: u128,
    den: u128,
}

impl Ratio {
    fn of(r: &Rational) -> Self {
        let conv = |x: &num_bigint::BigInt| {
            u128::try_from(x).expect("proportions have denominators below 2^128")
        };
        Ratio { num: conv(r.numer()), den: conv(r.denom()) }
    }

    fn floor_times(self, n: u64) -> u64 {
        (self.num * n as u128 / self.den) as u64
    }
}

type Key = (Rational, Reverse<BinId>);

/// Best Fit on an index: largest volume at most `limit`, ties to the lowest id.
fn best_in(set: &BTreeSet<Key>, limit: &Rational) -> Option<(Rational, BinId)> {
    if limit.is_negative() {
        return None;
    }
    set.range(..=(limit.clone(), Reverse(0)))
        .next_back()
        .map(|(v, Reverse(id))| (v.clone(), *id))
}

fn better(a: Option<(Rational, BinId)>, b: Option<(Rational, BinId)>) -> Option<(Rational, BinId)> {
    match (a, b) {
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
        (x, None) => x,
        (None, y) => y,
    }
}

/// Reference Best Fit over explicit candidates `(bin, resident volume)`.
pub fn best_fit_select(candidates: &[(BinId, Rational)], new_volume: &Rational) -> Option<BinId> {
    let one = Rational::one();
    candidates
        .iter()
        .filter(|(_, v)| v + new_volume <= one)
        .max_by(|(ia, va), (ib, vb)| va.cmp(vb).then(ib.cmp(ia)))
        .map(|(id, _)| *id)
}

/// Bins holding a single container, by category.
#[derive(Debug, Clone, Default)]
struct Indexes {
    positive: BTreeSet<Key>,
    negative: BTreeSet<Key>,
    temp_all: BTreeSet<Key>,
    temp_by_class: Vec<BTreeSet<Key>>,
    declared: Vec<BTreeSet<ContainerId>>,
}

#[derive(Debug, Clone)]
pub struct PackingState {
    table: ClassTable,
    bins: Vec<Bin>,
    containers: Vec<Container>,
    counters: ClassCounters,
    open: Vec<Option<ContainerId>>,
    trace: Vec<PlacementEvent>,
    items: Vec<Rational>,
    s_min: Option<Rational>,
    idx: Indexes,
    alpha: Vec<Vec<Ratio>>,
    /// Classes touched by the most recent placement.
    touched: Vec<usize>,
}

impl PackingState {
    pub fn new(table: ClassTable) -> Self {
        let classes = table.m() + 2;
        let counters = ClassCounters::new(&table);
        let alpha = (0..classes)
            .map(|j| {
                let len = counters.n_type[j].len();
                (0..len)
                    .map(|i| {
                        if j < 2 || i == 0 {
                            Ratio::default()
                        } else if j == table.tiny_class() {
                            Ratio::of(&table.tiny_types()[i - 1].alpha)
                        } else {
                            Ratio::of(&table.alpha(j, i as u32))
                        }
                    })
                    .collect()
            })
            .collect();
        PackingState {
            idx: Indexes {
                temp_by_class: vec![BTreeSet::new(); classes],
                declared: vec![BTreeSet::new(); classes],
                ..Indexes::default()
            },
            open: vec![None; classes],
            counters,
            alpha,
            table,
            bins: Vec::new(),
            containers: Vec::new(),
            trace: Vec::new(),
            items: Vec::new(),
            s_min: None,
            touched: Vec::new(),
        }
    }

    pub fn table(&self) -> &ClassTable {
        &self.table
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn containers(&self) -> &[Container] {
        &self.containers
    }

    pub fn counters(&self) -> &ClassCounters {
        &self.counters
    }

    pub fn trace(&self) -> &[PlacementEvent] {
        &self.trace
    }

    pub fn items(&self) -> &[Rational] {
        &self.items
    }

    pub fn bins_used(&self) -> usize {
        self.bins.len()
    }

    pub fn open_container(&self, j: usize) -> Option<ContainerId> {
        self.open[j]
    }

    pub fn smallest_item(&self) -> Option<&Rational> {
        self.s_min.as_ref()
    }

    /// Volumes of positive containers that do not share a bin with a negative one.
    pub fn unmatched_positive_volumes(&self) -> impl Iterator<Item = &Rational> {
        self.idx.positive.iter().map(|(v, _)| v)
    }

    // ----- index maintenance -----

    fn bin_key(&self, b: BinId) -> Option<(u8, usize, Key)> {
        let bin = &self.bins[b];
        match (bin.positive, bin.negative) {
            (Some(p), None) => Some((0, 0, (self.containers[p].volume.clone(), Reverse(b)))),
            (None, Some(n)) => {
                let c = &self.containers[n];
                let cat = if c.kind == ContainerKind::Temporary1 { 2 } else { 1 };
                Some((cat, c.class, (c.volume.clone(), Reverse(b))))
            }
            _ => None,
        }
    }

    fn unindex(&mut self, b: BinId) {
        if let Some((cat, class, key)) = self.bin_key(b) {
            match cat {
                0 => self.idx.positive.remove(&key),
                1 => self.idx.negative.remove(&key),
                _ => {
                    self.idx.temp_by_class[class].remove(&key);
                    self.idx.temp_all.remove(&key)
                }
            };
        }
    }

    fn index(&mut self, b: BinId) {
        if let Some((cat, class, key)) = self.bin_key(b) {
            match cat {
                0 => self.idx.positive.insert(key),
                1 => self.idx.negative.insert(key),
                _ => {
                    self.idx.temp_by_class[class].insert(key.clone());
                    self.idx.temp_all.insert(key)
                }
            };
        }
    }

    // ----- primitive mutations -----

    fn new_bin(&mut self) -> BinId {
        let id = self.bins.len();
        self.bins.push(Bin { id, positive: None, negative: None });
        id
    }

    /// Creates a container holding one item and places it in `bin`
    /// (a fresh bin when `None`). Counters `n_j`, `n_ij` are updated.
    fn create_container(&mut self, class: usize, kind: ContainerKind, size: &Rational, volume: Rational, bin: Option<BinId>) -> (ContainerId, BinId, bool) {
        let (bin, new_bin) = match bin {
            Some(b) => (b, false),
            None => (self.new_bin(), true),
        };
        self.unindex(bin);
        let id = self.containers.len();
        let positive = volume > Rational::half();
        self.containers.push(Container {
            id,
            class,
            kind,
            items: vec![size.clone()],
            total: size.clone(),
            volume,
            bin,
            open: false,
        });
        {
            let slot = if positive { &mut self.bins[bin].positive } else { &mut self.bins[bin].negative };
            debug_assert!(slot.is_none(), "bin {bin} already holds a container of that sign");
            *slot = Some(id);
        }
        self.index(bin);
        self.counters.n[class] += 1;
        self.counters.n_type[class][kind.type_index() as usize] += 1;
        if kind == ContainerKind::Declared2 {
            self.counters.declared[class] += 1;
            self.idx.declared[class].insert(id);
        }
        (id, bin, new_bin)
    }

    /// Changes the kind of a large container, moving it between type counts
    /// and bin slots as its volume changes.
    fn retype(&mut self, c: ContainerId, to: ContainerKind) -> Transition {
        let from = self.containers[c].kind;
        let class = self.containers[c].class;
        let bin = self.containers[c].bin;
        self.unindex(bin);
        let was_positive = self.containers[c].is_positive();
        if from == ContainerKind::Declared2 {
            self.counters.declared[class] -= 1;
            self.idx.declared[class].remove(&c);
        }
        if to == ContainerKind::Declared2 {
            self.counters.declared[class] += 1;
            self.idx.declared[class].insert(c);
        }
        self.counters.n_type[class][from.type_index() as usize] -= 1;
        self.counters.n_type[class][to.type_index() as usize] += 1;
        let volume = match to {
            ContainerKind::Declared2 | ContainerKind::Regular2 => self.table.boundary(class - 1) * 2,
            _ => self.containers[c].volume.clone(),
        };
        self.containers[c].kind = to;
        self.containers[c].volume = volume;
        let now_positive = self.containers[c].is_positive();
        if was_positive != now_positive {
            let b = &mut self.bins[bin];
            if now_positive {
                debug_assert!(b.positive.is_none());
                b.negative = None;
                b.positive = Some(c);
            } else {
                b.positive = None;
                b.negative = Some(c);
            }
        }
        self.index(bin);
        Transition { container: c, from, to }
    }

    fn add_item(&mut self, c: ContainerId, size: &Rational) {
        let bin = self.containers[c].bin;
        self.unindex(bin);
        let cont = &mut self.containers[c];
        cont.items.push(size.clone());
        cont.total += size;
        self.index(bin);
    }

    // ----- packing rules -----

    /// Packs one item; the event is appended to the trace and returned.
    pub fn pack_item(&mut self, size: &Rational) -> Result<&PlacementEvent, EngineError> {
        let class = self.table.classify(size)?;
        let item = self.items.len();
        self.items.push(size.clone());
        if self.s_min.as_ref().is_none_or(|m| size < m) {
            self.s_min = Some(size.clone());
        }
        self.counters.items[class.j] += 1;
        self.touched.clear();
        self.touched.push(class.j);
        let ev = match class.kind {
            ClassKind::Huge => self.pack_huge(item, size),
            ClassKind::Large => self.pack_large(item, size, class.j),
            ClassKind::Small | ClassKind::Tiny => self.pack_small_tiny(item, size, class.j),
        };
        if let Some(t) = &ev.transition {
            let c = self.containers[t.container].class;
            if !self.touched.contains(&c) {
                self.touched.push(c);
            }
        }
        self.trace.push(ev);
        Ok(self.trace.last().expect("just pushed"))
    }

    /// Packs a whole stream, optionally auditing after every item (and fully at the end).
    pub fn pack_all<'a>(&mut self, sizes: impl IntoIterator<Item = &'a Rational>, audit: bool) -> Result<(), EngineError> {
        for s in sizes {
            self.pack_item(s)?;
            if audit {
                let rep = self.audit_step();
                if !rep.passed() {
                    return Err(EngineError::Audit { item: self.items.len() - 1, report: rep });
                }
            }
        }
        if audit {
            let rep = self.audit();
            if !rep.passed() {
                return Err(EngineError::Audit { item: self.items.len().saturating_sub(1), report: rep });
            }
        }
        Ok(())
    }

    fn event(&self, item: usize, size: &Rational, c: ContainerId, new_container: bool, new_bin: bool, transition: Option<Transition>) -> PlacementEvent {
        let cont = &self.containers[c];
        PlacementEvent {
            item,
            size: size.clone(),
            class: cont.class,
            container: c,
            kind: cont.kind,
            bin: cont.bin,
            new_container,
            new_bin,
            transition,
        }
    }

    fn pack_huge(&mut self, item: usize, size: &Rational) -> PlacementEvent {
        let limit = Rational::one() - size;
        let target = better(best_in(&self.idx.negative, &limit), best_in(&self.idx.temp_all, &limit));
        let mut transition = None;
        if let Some((_, b)) = &target {
            let resident = self.bins[*b].negative.expect("negative bin");
            if self.containers[resident].kind == ContainerKind::Temporary1 {
                transition = Some(self.retype(resident, ContainerKind::Regular1));
            }
        }
        let (c, _, new_bin) = self.create_container(1, ContainerKind::Huge, size, size.clone(), target.map(|t| t.1));
        self.event(item, size, c, true, new_bin, transition)
    }

    fn pack_large(&mut self, item: usize, size: &Rational, j: usize) -> PlacementEvent {
        // (1) a declared type-2 container of this class
        if let Some(&c) = self.idx.declared[j].iter().next() {
            let t = self.retype(c, ContainerKind::Regular2);
            self.add_item(c, size);
            return self.event(item, size, c, false, false, Some(t));
        }
        let n_j = self.counters.n[j];
        let n_2j = self.counters.n_ij(j, 2);
        let quota = self.alpha[j][2].floor_times(n_j);
        if n_2j >= quota {
            // (2) a single-item container
            let limit = Rational::one() - size;
            if let Some((_, b)) = best_in(&self.idx.positive, &limit) {
                let (c, _, _) = self.create_container(j, ContainerKind::Regular1, size, size.clone(), Some(b));
                return self.event(item, size, c, true, false, None);
            }
            let (c, _, nb) = self.create_container(j, ContainerKind::Temporary1, size, size.clone(), None);
            return self.event(item, size, c, true, nb, None);
        }
        // (3) increase the number of type-2 containers
        let vol2 = self.table.boundary(j - 1) * 2;
        let limit = Rational::one() - &vol2;
        if let Some((_, b)) = best_in(&self.idx.negative, &limit) {
            let (c, _, _) = self.create_container(j, ContainerKind::Declared2, size, vol2, Some(b));
            return self.event(item, size, c, true, false, None);
        }
        if let Some((_, b)) = best_in(&self.idx.temp_all, &limit) {
            let resident = self.bins[b].negative.expect("temporary container");
            let t = self.retype(resident, ContainerKind::Regular1);
            let (c, _, _) = self.create_container(j, ContainerKind::Declared2, size, vol2, Some(b));
            return self.event(item, size, c, true, false, Some(t));
        }
        if let Some((_, b)) = self.idx.temp_by_class[j].iter().next_back().map(|(v, Reverse(b))| (v.clone(), *b)) {
            let c = self.bins[b].negative.expect("temporary container");
            let t = self.retype(c, ContainerKind::Regular2);
            self.add_item(c, size);
            return self.event(item, size, c, false, false, Some(t));
        }
        let (c, _, nb) = self.create_container(j, ContainerKind::Declared2, size, vol2, None);
        self.event(item, size, c, true, nb, None)
    }

    fn pack_small_tiny(&mut self, item: usize, size: &Rational, j: usize) -> PlacementEvent {
        let tiny = j == self.table.tiny_class();
        if let Some(c) = self.open[j] {
            self.add_item(c, size);
            self.update_open(c);
            return self.event(item, size, c, false, false, None);
        }
        let n_j = self.counters.n[j];
        let types = self.counters.n_type[j].len() - 1;
        let i = (1..=types)
            .find(|&i| {
                let a = self.alpha[j][i];
                a.num > 0 && self.counters.n_type[j][i] <= a.floor_times(n_j)
            })
            .expect("some type is always below its quota") as u32;
        let (kind, volume) = if tiny {
            (ContainerKind::Tiny(i), self.table.tiny_types()[i as usize - 1].threshold.clone())
        } else {
            (ContainerKind::Small(i), self.table.boundary(j - 1) * i as i64)
        };
        let limit = Rational::one() - &volume;
        let (bin, transition) = if volume > Rational::half() {
            if let Some((_, b)) = best_in(&self.idx.negative, &limit) {
                (Some(b), None)
            } else if let Some((_, b)) = best_in(&self.idx.temp_all, &limit) {
                let resident = self.bins[b].negative.expect("temporary container");
                (Some(b), Some(self.retype(resident, ContainerKind::Regular1)))
            } else {
                (None, None)
            }
        } else if let Some((_, b)) = best_in(&self.idx.positive, &limit) {
            (Some(b), None)
        } else if let Some(b) = self.redeclare_candidate(&volume) {
            let resident = self.bins[b].negative.expect("temporary container");
            (Some(b), Some(self.retype(resident, ContainerKind::Declared2)))
        } else {
            (None, None)
        };
        let (c, _, nb) = self.create_container(j, kind, size, volume, bin);
        self.containers[c].open = true;
        self.update_open(c);
        self.event(item, size, c, true, nb, transition)
    }

    /// Bin whose temporary single large container may be redeclared as type 2
    /// to make room for a new negative container of the given volume.
    fn redeclare_candidate(&self, volume: &Rational) -> Option<BinId> {
        let one = Rational::one();
        let mut best: Option<(Rational, usize, BinId)> = None;
        for jp in 2..=self.table.b() {
            let Some((v, Reverse(b))) = self.idx.temp_by_class[jp].iter().next_back() else {
                continue;
            };
            if &(self.table.boundary(jp - 1) * 2) + volume > one {
                continue;
            }
            let quota = self.alpha[jp][2].floor_times(self.counters.n[jp]);
            if self.counters.n_ij(jp, 2) + 1 > quota {
                continue;
            }
            if best.as_ref().is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v.clone(), jp, *b));
            }
        }
        best.map(|(_, _, b)| b)
    }

    fn update_open(&mut self, c: ContainerId) {
        let cont = &self.containers[c];
        let still_open = match cont.kind {
            ContainerKind::Small(i) => (cont.items.len() as u32) < i,
            ContainerKind::Tiny(i) => {
                let a = &self.table.tiny_types()[i as usize - 1].threshold;
                cont.total <= a - self.table.boundary(self.table.m())
            }
            _ => false,
        };
        let j = cont.class;
        self.containers[c].open = still_open;
        self.open[j] = if still_open { Some(c) } else { None };
    }

    /// Inserts a container in a fresh bin without applying any packing rule.
    /// Meant for constructing hypothetical states, e.g. to exercise the audit.
    pub fn force_container(&mut self, class: usize, kind: ContainerKind, sizes: &[Rational]) -> ContainerId {
        let volume = match kind {
            ContainerKind::Huge | ContainerKind::Regular1 | ContainerKind::Temporary1 => sizes[0].clone(),
            ContainerKind::Declared2 | ContainerKind::Regular2 => self.table.boundary(class - 1) * 2,
            ContainerKind::Small(i) => self.table.boundary(class - 1) * i as i64,
            ContainerKind::Tiny(i) => self.table.tiny_types()[i as usize - 1].threshold.clone(),
        };
        let (c, _, _) = self.create_container(class, kind, &sizes[0], volume, None);
        for s in &sizes[1..] {
            self.add_item(c, s);
        }
        for s in sizes {
            self.items.push(s.clone());
            self.counters.items[class] += 1;
        }
        self.touched = vec![class];
        c
    }
}
