//! Classic online algorithms, exact optimum for small instances, and
//! reproducible instance generators.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numerics::{parse_rational, Rational};
use crate::params::{ClassKind, ClassTable};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("unknown algorithm {0:?} (expected nf, ff, bf or harmonic(k))")]
    UnknownAlgorithm(String),
    #[error("bad generator {0:?}")]
    BadGenerator(String),
    #[error("line {line}: {msg}")]
    BadInstance { line: usize, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("grid-adversarial generation needs a class table")]
    NeedsTable,
}

/// Parses one rational per line; blank lines and `#` comments are skipped.
/// Every size must lie in `(0, 1]`.
pub fn parse_instance(text: &str) -> Result<Vec<Rational>, BaselineError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| BaselineError::BadInstance { line: n + 1, msg };
        let s = parse_rational(line).map_err(|e| bad(e.to_string()))?;
        if !s.is_positive() || s > Rational::one() {
            return Err(bad(format!("size {s} outside (0,1]")));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn instance_text(sizes: &[Rational]) -> String {
    sizes.iter().map(|s| format!("{s}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    NextFit,
    FirstFit,
    BestFit,
    /// Harmonic with `k` classes; the last class is packed by Next Fit.
    Harmonic(u32),
}

impl FromStr for Algorithm {
    type Err = BaselineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let unknown = || BaselineError::UnknownAlgorithm(s.to_string());
        Ok(match t.as_str() {
            "nf" | "next-fit" => Algorithm::NextFit,
            "ff" | "first-fit" => Algorithm::FirstFit,
            "bf" | "best-fit" => Algorithm::BestFit,
            _ => {
                let k = t
                    .strip_prefix("harmonic(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| t.strip_prefix("harmonic:"))
                    .or_else(|| t.strip_prefix('h'))
                    .ok_or_else(unknown)?;
                let k: u32 = k.parse().map_err(|_| unknown())?;
                if k == 0 {
                    return Err(unknown());
                }
                Algorithm::Harmonic(k)
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::NextFit => f.write_str("nf"),
            Algorithm::FirstFit => f.write_str("ff"),
            Algorithm::BestFit => f.write_str("bf"),
            Algorithm::Harmonic(k) => write!(f, "harmonic({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    pub bins: usize,
    /// Bin of each item, in input order.
    pub assignment: Vec<usize>,
}

impl Packing {
    pub fn loads(&self, sizes: &[Rational]) -> Vec<Rational> {
        let mut loads = vec![Rational::zero(); self.bins];
        for (s, &b) in sizes.iter().zip(&self.assignment) {
            loads[b] += s;
        }
        loads
    }

    /// Every bin non-empty and within capacity.
    pub fn is_valid(&self, sizes: &[Rational]) -> bool {
        self.assignment.len() == sizes.len()
            && self.assignment.iter().all(|&b| b < self.bins)
            && self.loads(sizes).iter().all(|l| l.is_positive() && *l <= Rational::one())
    }
}

/// Max segment tree over remaining capacities, for First Fit.
struct Leftmost {
    size: usize,
    tree: Vec<Rational>,
}

impl Leftmost {
    fn new() -> Self {
        Leftmost { size: 1, tree: vec![Rational::zero(); 2] }
    }

    fn grow(&mut self) {
        let old = std::mem::replace(&mut self.tree, vec![Rational::zero(); 4 * self.size]);
        let old_size = self.size;
        self.size *= 2;
        for i in 0..old_size {
            self.tree[self.size + i] = old[old_size + i].clone();
        }
        for i in (1..self.size).rev() {
            self.tree[i] = self.tree[2 * i].clone().max(self.tree[2 * i + 1].clone());
        }
    }

    fn set(&mut self, pos: usize, v: Rational) {
        while pos >= self.size {
            self.grow();
        }
        let mut i = self.size + pos;
        self.tree[i] = v;
        while i > 1 {
            i /= 2;
            self.tree[i] = self.tree[2 * i].clone().max(self.tree[2 * i + 1].clone());
        }
    }

    /// Lowest position with remaining capacity at least `need`.
    fn first_at_least(&self, need: &Rational) -> Option<usize> {
        if self.tree[1] < *need {
            return None;
        }
        let mut i = 1;
        while i < self.size {
            i = if self.tree[2 * i] >= *need { 2 * i } else { 2 * i + 1 };
        }
        Some(i - self.size)
    }
}

fn next_fit(sizes: &[Rational]) -> Packing {
    let mut assignment = Vec::with_capacity(sizes.len());
    let mut load = Rational::zero();
    let mut bins = 0;
    for s in sizes {
        if bins == 0 || &load + s > Rational::one() {
            bins += 1;
            load = Rational::zero();
        }
        load += s;
        assignment.push(bins - 1);
    }
    Packing { bins, assignment }
}

fn first_fit(sizes: &[Rational]) -> Packing {
    let mut tree = Leftmost::new();
    let mut rem: Vec<Rational> = Vec::new();
    let mut assignment = Vec::with_capacity(sizes.len());
    for s in sizes {
        let b = match tree.first_at_least(s) {
            Some(b) if b < rem.len() => b,
            _ => {
                rem.push(Rational::one());
                rem.len() - 1
            }
        };
        rem[b] = &rem[b] - s;
        tree.set(b, rem[b].clone());
        assignment.push(b);
    }
    Packing { bins: rem.len(), assignment }
}

fn best_fit(sizes: &[Rational]) -> Packing {
    use std::collections::BTreeSet;
    // (remaining, bin): the smallest remaining capacity that fits, ties to the lowest bin
    let mut open: BTreeSet<(Rational, usize)> = BTreeSet::new();
    let mut bins = 0;
    let mut assignment = Vec::with_capacity(sizes.len());
    for s in sizes {
        let hit = open.range((s.clone(), 0)..).next().cloned();
        let (rem, b) = match hit {
            Some(key) => {
                open.remove(&key);
                key
            }
            None => {
                bins += 1;
                (Rational::one(), bins - 1)
            }
        };
        let left = &rem - s;
        if left.is_positive() {
            open.insert((left, b));
        }
        assignment.push(b);
    }
    Packing { bins, assignment }
}

fn harmonic(sizes: &[Rational], k: u32) -> Packing {
    // class j < k holds items in (1/(j+1), 1/j], j per bin; class k is Next Fit
    let mut current: Vec<Option<(usize, u32, Rational)>> = vec![None; k as usize + 1];
    let mut bins = 0;
    let mut assignment = Vec::with_capacity(sizes.len());
    let one = Rational::one();
    for s in sizes {
        let inv = s.recip().expect("positive size").floor();
        let j = if inv >= num_bigint::BigInt::from(k) { k as usize } else { inv.to_usize().expect("below k") };
        let slot = &mut current[j];
        let fits = match slot {
            Some((_, count, load)) if j < k as usize => (*count as usize) < j && &*load + s <= one,
            Some((_, _, load)) => &*load + s <= one,
            None => false,
        };
        if !fits {
            *slot = Some((bins, 0, Rational::zero()));
            bins += 1;
        }
        let (b, count, load) = slot.as_mut().expect("set above");
        *count += 1;
        *load += s;
        assignment.push(*b);
    }
    Packing { bins, assignment }
}

pub fn run_baseline(alg: Algorithm, sizes: &[Rational]) -> Packing {
    match alg {
        Algorithm::NextFit => next_fit(sizes),
        Algorithm::FirstFit => first_fit(sizes),
        Algorithm::BestFit => best_fit(sizes),
        Algorithm::Harmonic(k) => harmonic(sizes, k),
    }
}

pub fn volume_lower_bound(sizes: &[Rational]) -> usize {
    let total: Rational = sizes.iter().sum();
    let f = total.floor_i64() as usize;
    if Rational::from(f) == total {
        f
    } else {
        f + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMethod {
    Exact,
    LowerBound,
}

impl fmt::Display for OptMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptMethod::Exact => "exact",
            OptMethod::LowerBound => "lower_bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub bin_count: usize,
    /// Empty for lower bounds.
    pub assignment: Vec<usize>,
    pub method: OptMethod,
}

pub const DEFAULT_OPT_LIMIT: usize = 18;

/// Minimum number of bins. Up to `limit` items the search is exact: a DP over
/// item subsets keeping the lexicographically smallest (bins, load of the
/// last bin). Larger instances get the volume bound, labelled as such.
pub fn opt_exact(sizes: &[Rational], limit: usize) -> OptResult {
    let n = sizes.len();
    if n == 0 {
        return OptResult { bin_count: 0, assignment: Vec::new(), method: OptMethod::Exact };
    }
    if n > limit.min(24) {
        return OptResult { bin_count: volume_lower_bound(sizes), assignment: Vec::new(), method: OptMethod::LowerBound };
    }
    // integer sizes on a common grid keep the 2^n states cheap
    let q = crate::numerics::common_denominator(sizes.iter());
    let conv = |r: &Rational| -> u128 {
        let scaled = r.numer() * &(&q / r.denom());
        u128::try_from(&scaled).expect("grid fits u128")
    };
    let cap = u128::try_from(&q).expect("grid fits u128");
    let w: Vec<u128> = sizes.iter().map(conv).collect();
    let full = (1usize << n) - 1;
    let mut best: Vec<(u32, u128)> = vec![(u32::MAX, 0); full + 1];
    let mut parent: Vec<u8> = vec![u8::MAX; full + 1];
    best[0] = (0, cap); // "last bin full": the first item opens a bin
    for mask in 0..full {
        let (bins, load) = best[mask];
        if bins == u32::MAX {
            continue;
        }
        for (i, &wi) in w.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let next = if load + wi <= cap { (bins, load + wi) } else { (bins + 1, wi) };
            let m2 = mask | (1 << i);
            if next < best[m2] {
                best[m2] = next;
                parent[m2] = i as u8;
            }
        }
    }
    // replay the chosen order to recover bins
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    while mask != 0 {
        let i = parent[mask] as usize;
        order.push(i);
        mask &= !(1 << i);
    }
    order.reverse();
    let mut assignment = vec![0; n];
    let (mut bin, mut load) = (0usize, cap);
    for (step, &i) in order.iter().enumerate() {
        if load + w[i] > cap || step == 0 {
            if step > 0 {
                bin += 1;
            }
            load = 0;
        }
        load += w[i];
        assignment[i] = bin;
    }
    OptResult { bin_count: best[full].0 as usize, assignment, method: OptMethod::Exact }
}

/// Independent oracle: tries every assignment of items to bins (set
/// partitions), keeping the best. Only for very small instances.
pub fn opt_brute_force(sizes: &[Rational]) -> usize {
    fn go(i: usize, sizes: &[Rational], loads: &mut Vec<Rational>, best: &mut usize) {
        if loads.len() >= *best {
            return;
        }
        if i == sizes.len() {
            *best = loads.len();
            return;
        }
        for b in 0..loads.len() {
            if &loads[b] + &sizes[i] <= Rational::one() {
                loads[b] += &sizes[i];
                go(i + 1, sizes, loads, best);
                loads[b] = &loads[b] - &sizes[i];
            }
        }
        loads.push(sizes[i].clone());
        go(i + 1, sizes, loads, best);
        loads.pop();
    }
    let mut best = sizes.len() + 1;
    if sizes.is_empty() {
        return 0;
    }
    go(0, sizes, &mut Vec::new(), &mut best);
    best
}

/// Which classes a grid-adversarial stream draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassMix {
    All,
    Huge,
    Large,
    Small,
    Tiny,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    Uniform { lo: Rational, hi: Rational },
    GridAdversarial(ClassMix),
    Replay(PathBuf),
}

/// Denominator of generated sizes.
pub const GRID: i64 = 1_000_000;

impl FromStr for Generator {
    type Err = BaselineError;

    /// `uniform`, `uniform(lo,hi)`, `grid`, `grid-adversarial(large)`, `replay(path)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BaselineError::BadGenerator(s.to_string());
        let t = s.trim();
        let (name, arg) = match t.find('(') {
            Some(p) if t.ends_with(')') => (&t[..p], Some(&t[p + 1..t.len() - 1])),
            Some(_) => return Err(bad()),
            None => match t.split_once(':') {
                Some((n, a)) => (n, Some(a)),
                None => (t, None),
            },
        };
        match name {
            "uniform" => {
                let (lo, hi) = match arg {
                    None => (Rational::frac(1, GRID), Rational::one()),
                    Some(a) => {
                        let (l, h) = a.split_once(',').ok_or_else(bad)?;
                        (parse_rational(l.trim()).map_err(|_| bad())?, parse_rational(h.trim()).map_err(|_| bad())?)
                    }
                };
                if !lo.is_positive() || lo > hi || hi > Rational::one() {
                    return Err(bad());
                }
                Ok(Generator::Uniform { lo, hi })
            }
            "grid" | "grid-adversarial" => {
                let mix = match arg.map(str::trim) {
                    None | Some("all") => ClassMix::All,
                    Some("huge") => ClassMix::Huge,
                    Some("large") => ClassMix::Large,
                    Some("small") => ClassMix::Small,
                    Some("tiny") => ClassMix::Tiny,
                    Some(_) => return Err(bad()),
                };
                Ok(Generator::GridAdversarial(mix))
            }
            "replay" => Ok(Generator::Replay(PathBuf::from(arg.ok_or_else(bad)?))),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub sizes: Vec<Rational>,
    /// Generator and seed, enough to regenerate the instance.
    pub descriptor: String,
}

/// Reproducible instance: identical for identical `(generator, n, seed)`.
/// Replays ignore `n` and `seed`.
pub fn generate_instance(gen: &Generator, n: usize, seed: u64, table: Option<&ClassTable>) -> Result<Instance, BaselineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = match gen {
        Generator::Uniform { lo, hi } => {
            let g = Rational::from(GRID);
            let lo_i = (lo * &g).floor_i64();
            let lo_i = if Rational::from(lo_i) == lo * &g { lo_i } else { lo_i + 1 };
            let hi_i = (hi * &g).floor_i64();
            if lo_i > hi_i {
                return Err(BaselineError::BadGenerator(format!("no grid point in [{lo},{hi}]")));
            }
            (0..n).map(|_| Rational::frac(rng.gen_range(lo_i..=hi_i), GRID)).collect()
        }
        Generator::GridAdversarial(mix) => {
            let table = table.ok_or(BaselineError::NeedsTable)?;
            let classes: Vec<usize> = (1..=table.tiny_class())
                .filter(|&j| match mix {
                    ClassMix::All => true,
                    ClassMix::Huge => table.kind(j) == ClassKind::Huge,
                    ClassMix::Large => table.kind(j) == ClassKind::Large,
                    ClassMix::Small => table.kind(j) == ClassKind::Small,
                    ClassMix::Tiny => table.kind(j) == ClassKind::Tiny,
                })
                .collect();
            let eps = Rational::frac(1, GRID);
            (0..n)
                .map(|_| {
                    let j = classes[rng.gen_range(0..classes.len())];
                    table.boundary(j) + &eps
                })
                .collect()
        }
        Generator::Replay(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| BaselineError::Io { path: path.display().to_string(), source })?;
            parse_instance(&text)?
        }
    };
    let descriptor = match gen {
        Generator::Uniform { lo, hi } => format!("uniform({lo},{hi}) n={n} seed={seed}"),
        Generator::GridAdversarial(m) => format!("grid-adversarial({m:?}) n={n} seed={seed}").to_lowercase(),
        Generator::Replay(p) => format!("replay({})", p.display()),
    };
    Ok(Instance { sizes, descriptor })
}
