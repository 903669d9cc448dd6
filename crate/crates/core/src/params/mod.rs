//! Algorithm parameterization: boundary points, container proportions and the
//! tiny-class thresholds, plus item classification and container volumes.
//!
//! Classes are numbered the usual way: class `j` holds sizes in
//! `(t_j, t_{j-1}]`, with `t_0 = 1`, `t_1 = 1/2`, `t_b = 1/3`, the last
//! boundary `t_M` and `t_{M+1} = 0`. Class 1 is huge, `2..=b` large,
//! `b+1..=M` small and `M+1` tiny.

mod file;
pub mod reconstruct;

use std::fmt;

use thiserror::Error;

use crate::numerics::{NumericError, Rational};

pub use file::{
    load_params, load_partial_params, parse_params, parse_partial_params, write_params, write_partial_params, PartialTable,
};

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameters:\n{}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),
    #[error("size {0} is outside (0,1]")]
    Domain(Rational),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// One failed rule of the table validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Class the rule refers to, if any.
    pub class: Option<usize>,
    pub rule: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            Some(j) => write!(f, "class {j}: {}", self.rule),
            None => write!(f, "{}", self.rule),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Huge,
    Large,
    Small,
    Tiny,
}

impl ClassKind {
    pub fn is_basic_candidate(self) -> bool {
        matches!(self, ClassKind::Small | ClassKind::Tiny)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassIndex {
    pub j: usize,
    pub kind: ClassKind,
}

/// One tiny container type: total size planned in `(threshold - t_M, threshold]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TinyType {
    pub threshold: Rational,
    pub alpha: Rational,
}

/// The full, validated parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    /// `t_0 ..= t_{M+1}`.
    boundaries: Vec<Rational>,
    b: usize,
    /// Indexed by class; entries `(i, alpha_ij)` with `alpha_ij > 0`, sorted by `i`.
    alphas: Vec<Vec<(u32, Rational)>>,
    tiny: Vec<TinyType>,
}

impl ClassTable {
    /// Builds and validates a table. `boundaries` are `t_1..=t_M` (the
    /// implicit `1` and `0` are added here), `alphas[j]` lists the nonzero
    /// `(i, alpha_ij)` of class `j` for `2 <= j <= M` (other indices ignored).
    pub fn new(
        boundaries: Vec<Rational>,
        alphas: Vec<Vec<(u32, Rational)>>,
        tiny: Vec<TinyType>,
    ) -> Result<Self, ParamError> {
        let mut issues = Vec::new();
        let full = check_boundaries(&boundaries, &mut issues);
        let m = boundaries.len();
        let b = boundaries
            .iter()
            .position(|t| *t == Rational::frac(1, 3))
            .map(|p| p + 1)
            .unwrap_or(0);

        let mut norm: Vec<Vec<(u32, Rational)>> = vec![Vec::new(); m + 2];
        for (j, entries) in alphas.into_iter().enumerate() {
            if j < 2 || j > m {
                continue;
            }
            let mut entries: Vec<(u32, Rational)> =
                entries.into_iter().filter(|(_, a)| !a.is_zero()).collect();
            entries.sort_by_key(|(i, _)| *i);
            norm[j] = entries;
        }

        let table = ClassTable {
            boundaries: full,
            b,
            alphas: norm,
            tiny,
        };
        if issues.is_empty() {
            table.check_alphas(&mut issues);
        }
        if issues.is_empty() {
            Ok(table)
        } else {
            Err(ParamError::Validation(issues))
        }
    }

    fn check_alphas(&self, issues: &mut Vec<ValidationIssue>) {
        let one = Rational::one();
        for j in 2..=self.m() {
            let gamma = self.gamma(j);
            let entries = &self.alphas[j];
            let mut sum = Rational::zero();
            for (i, a) in entries {
                if *i < 1 || *i as u64 > gamma {
                    issues.push(issue(j, format!("type {i} outside 1..={gamma}")));
                }
                if a.is_negative() || *a > one {
                    issues.push(issue(j, format!("alpha_{i} = {a} outside [0,1]")));
                }
                if self.kind(j) == ClassKind::Large && *i > 2 {
                    issues.push(issue(j, format!("large class has type {i}")));
                }
                sum += a;
            }
            if sum != one {
                issues.push(issue(j, format!("alphas sum to {sum}, not 1")));
            }
            if self.kind(j) == ClassKind::Large && self.alpha(j, 2).is_zero() {
                issues.push(issue(j, "large class needs alpha_2 > 0".into()));
            }
        }
        let tj = self.tiny_class();
        if self.tiny.is_empty() {
            issues.push(issue(tj, "no tiny container types".into()));
        }
        let t_m = self.boundary(self.m());
        let mut sum = Rational::zero();
        for (idx, tt) in self.tiny.iter().enumerate() {
            if !tt.alpha.is_positive() || tt.alpha > one {
                issues.push(issue(tj, format!("tiny alpha_{} = {} outside (0,1]", idx + 1, tt.alpha)));
            }
            if idx == 0 && tt.threshold < *t_m {
                issues.push(issue(tj, format!("A_1 = {} below t_M = {}", tt.threshold, t_m)));
            }
            if idx > 0 && tt.threshold <= self.tiny[idx - 1].threshold {
                issues.push(issue(tj, "tiny thresholds not strictly increasing".into()));
            }
            if tt.threshold > one {
                issues.push(issue(tj, format!("A_{} = {} above 1", idx + 1, tt.threshold)));
            }
            sum += &tt.alpha;
        }
        if !self.tiny.is_empty() && sum != one {
            issues.push(issue(tj, format!("tiny alphas sum to {sum}, not 1")));
        }
    }

    /// Index of the last boundary before the tiny class.
    pub fn m(&self) -> usize {
        self.boundaries.len() - 2
    }

    /// Index with `t_b = 1/3`.
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn tiny_class(&self) -> usize {
        self.m() + 1
    }

    pub fn class_count(&self) -> usize {
        self.m() + 1
    }

    /// `t_j` for `0 <= j <= M+1`.
    pub fn boundary(&self, j: usize) -> &Rational {
        &self.boundaries[j]
    }

    pub fn boundaries(&self) -> &[Rational] {
        &self.boundaries
    }

    /// `t_1..=t_M` as stored in a parameter file.
    pub fn inner_boundaries(&self) -> &[Rational] {
        &self.boundaries[1..=self.m()]
    }

    pub fn kind(&self, j: usize) -> ClassKind {
        if j == 1 {
            ClassKind::Huge
        } else if j <= self.b {
            ClassKind::Large
        } else if j <= self.m() {
            ClassKind::Small
        } else {
            ClassKind::Tiny
        }
    }

    pub fn class_index(&self, j: usize) -> ClassIndex {
        ClassIndex { j, kind: self.kind(j) }
    }

    /// `floor(1 / t_{j-1})`.
    pub fn gamma(&self, j: usize) -> u64 {
        let upper = &self.boundaries[j - 1];
        upper
            .recip()
            .expect("boundary is positive")
            .floor_i64() as u64
    }

    /// `alpha_ij`, zero when absent.
    pub fn alpha(&self, j: usize, i: u32) -> Rational {
        self.alphas
            .get(j)
            .and_then(|e| e.iter().find(|(t, _)| *t == i))
            .map(|(_, a)| a.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero `(i, alpha_ij)` of a large or small class, sorted by `i`.
    pub fn support(&self, j: usize) -> &[(u32, Rational)] {
        &self.alphas[j]
    }

    pub fn tiny_types(&self) -> &[TinyType] {
        &self.tiny
    }

    /// `A_{i,j}` for a small or large class, `A_{i,M+1}` for the tiny class.
    pub fn a_value(&self, j: usize, i: u32) -> Rational {
        if j == self.tiny_class() {
            self.tiny[i as usize - 1].threshold.clone()
        } else {
            &self.boundaries[j - 1] * i as i64
        }
    }

    /// Maps a size in `(0,1]` to its class.
    pub fn classify(&self, size: &Rational) -> Result<ClassIndex, ParamError> {
        if !size.is_positive() || *size > Rational::one() {
            return Err(ParamError::Domain(size.clone()));
        }
        // boundaries are descending; count those >= size
        let j = self.boundaries.partition_point(|t| t >= size);
        Ok(self.class_index(j))
    }

    pub fn container_volume(&self, desc: &ContainerDescriptor) -> Rational {
        let j = desc.class.j;
        match desc.kind {
            ContainerKind::Huge | ContainerKind::Regular1 | ContainerKind::Temporary1 => desc
                .first_item_size
                .clone()
                .expect("single-item container needs its item size"),
            ContainerKind::Declared2 | ContainerKind::Regular2 => &self.boundaries[j - 1] * 2,
            ContainerKind::Small(i) => &self.boundaries[j - 1] * i as i64,
            ContainerKind::Tiny(i) => self.tiny[i as usize - 1].threshold.clone(),
        }
    }

    pub fn is_positive(&self, desc: &ContainerDescriptor) -> bool {
        self.container_volume(desc) > Rational::half()
    }
}

fn issue(j: usize, rule: String) -> ValidationIssue {
    ValidationIssue { class: Some(j), rule }
}

fn check_boundaries(inner: &[Rational], issues: &mut Vec<ValidationIssue>) -> Vec<Rational> {
    let half = Rational::half();
    let third = Rational::frac(1, 3);
    let global = |rule: &str| ValidationIssue { class: None, rule: rule.to_string() };
    if inner.first() != Some(&half) {
        issues.push(global("first boundary must be t_1 = 1/2"));
    }
    if !inner.contains(&third) {
        issues.push(global("boundary 1/3 missing"));
    }
    if inner.iter().any(|t| !t.is_positive() || *t > half) {
        issues.push(global("boundaries must lie in (0,1/2]"));
    }
    if inner.windows(2).any(|w| w[0] <= w[1]) {
        issues.push(global("boundaries must be strictly decreasing"));
    }
    let mut full = Vec::with_capacity(inner.len() + 2);
    full.push(Rational::one());
    full.extend(inner.iter().cloned());
    full.push(Rational::zero());
    full
}

/// Kind of a container. Large classes use the four single/pair kinds, small
/// and tiny classes a numbered type, huge items always `Huge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContainerKind {
    Huge,
    Regular1,
    Temporary1,
    Declared2,
    Regular2,
    Small(u32),
    Tiny(u32),
}

impl ContainerKind {
    /// Planned cardinality type: 1 or 2 for large kinds, `i` for small/tiny.
    pub fn type_index(self) -> u32 {
        match self {
            ContainerKind::Huge | ContainerKind::Regular1 | ContainerKind::Temporary1 => 1,
            ContainerKind::Declared2 | ContainerKind::Regular2 => 2,
            ContainerKind::Small(i) | ContainerKind::Tiny(i) => i,
        }
    }

    pub fn matches(self, kind: ClassKind) -> bool {
        matches!(
            (self, kind),
            (ContainerKind::Huge, ClassKind::Huge)
                | (
                    ContainerKind::Regular1
                        | ContainerKind::Temporary1
                        | ContainerKind::Declared2
                        | ContainerKind::Regular2,
                    ClassKind::Large
                )
                | (ContainerKind::Small(_), ClassKind::Small)
                | (ContainerKind::Tiny(_), ClassKind::Tiny)
        )
    }
}

impl fmt::Display for ContainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContainerKind::Huge => write!(f, "huge"),
            ContainerKind::Regular1 => write!(f, "regular1"),
            ContainerKind::Temporary1 => write!(f, "temporary1"),
            ContainerKind::Declared2 => write!(f, "declared2"),
            ContainerKind::Regular2 => write!(f, "regular2"),
            ContainerKind::Small(i) => write!(f, "type{i}"),
            ContainerKind::Tiny(i) => write!(f, "tiny{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerDescriptor {
    pub class: ClassIndex,
    pub kind: ContainerKind,
    /// Size of the first item; required for single-item large/huge kinds.
    pub first_item_size: Option<Rational>,
}

impl ContainerDescriptor {
    pub fn new(class: ClassIndex, kind: ContainerKind, first_item_size: Option<Rational>) -> Self {
        debug_assert!(kind.matches(class.kind), "{kind} in {:?} class", class.kind);
        ContainerDescriptor { class, kind, first_item_size }
    }
}
