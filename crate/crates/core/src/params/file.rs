//! Line-oriented parameter file.
//!
//! ```text
//! [boundaries]      # t_1 .. t_M, descending, one per line
//! 1/2
//! ...
//! [alpha]           # j i alpha_ij
//! 6 1 22145926/78181827
//! [tiny]            # i A_i alpha_i
//! 1 17/60 ?
//! [types]           # optional: j i1 i2 ... (support hint for reconstruction)
//! 183 1 3 14
//! ```
//!
//! `?` marks a value that is not known. A file containing `?` (or classes
//! with no alpha lines) loads only as a [`PartialTable`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ClassTable, ParamError, TinyType};
use crate::numerics::{parse_rational, Rational};

/// Possibly incomplete parameter data as read from a file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialTable {
    /// `t_1..=t_M`.
    pub boundaries: Vec<Rational>,
    /// Class -> list of `(i, alpha)`; `None` marks an unknown value.
    pub alphas: BTreeMap<usize, Vec<(u32, Option<Rational>)>>,
    /// `(i, A_i, alpha_i)` of the tiny class.
    pub tiny: Vec<(u32, Option<Rational>, Option<Rational>)>,
    /// Known supports `{i : alpha_ij > 0}` used to pick among ambiguous reconstructions.
    pub type_hints: BTreeMap<usize, Vec<u32>>,
}

impl PartialTable {
    pub fn m(&self) -> usize {
        self.boundaries.len()
    }

    /// True when every class `2..=M` has fully known alphas and the tiny data is known.
    pub fn is_complete(&self) -> bool {
        (2..=self.m()).all(|j| self.known_alphas(j).is_some())
            && !self.tiny.is_empty()
            && self.tiny.iter().all(|(_, a, al)| a.is_some() && al.is_some())
    }

    /// Alphas of class `j` if all listed values are known (and at least one is listed).
    pub fn known_alphas(&self, j: usize) -> Option<Vec<(u32, Rational)>> {
        let entries = self.alphas.get(&j)?;
        if entries.is_empty() {
            return None;
        }
        entries
            .iter()
            .map(|(i, a)| a.clone().map(|a| (*i, a)))
            .collect()
    }

    pub fn into_table(self) -> Result<ClassTable, ParamError> {
        let m = self.m();
        let mut missing = Vec::new();
        let mut alphas = vec![Vec::new(); m + 2];
        for (j, slot) in alphas.iter_mut().enumerate().take(m + 1).skip(2) {
            match self.known_alphas(j) {
                Some(a) => *slot = a,
                None => missing.push(super::ValidationIssue {
                    class: Some(j),
                    rule: "alpha values unknown".into(),
                }),
            }
        }
        let mut tiny = Vec::new();
        for (i, a, al) in &self.tiny {
            match (a, al) {
                (Some(a), Some(al)) => tiny.push(TinyType { threshold: a.clone(), alpha: al.clone() }),
                _ => missing.push(super::ValidationIssue {
                    class: Some(m + 1),
                    rule: format!("tiny type {i} unknown"),
                }),
            }
        }
        if !missing.is_empty() {
            return Err(ParamError::Validation(missing));
        }
        ClassTable::new(self.boundaries, alphas, tiny)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Boundaries,
    Alpha,
    Tiny,
    Types,
}

fn parse_err(line: usize, msg: impl Into<String>) -> ParamError {
    ParamError::Parse { line, msg: msg.into() }
}

fn opt_rational(tok: &str, line: usize) -> Result<Option<Rational>, ParamError> {
    if tok == "?" {
        return Ok(None);
    }
    parse_rational(tok)
        .map(Some)
        .map_err(|e| parse_err(line, e.to_string()))
}

fn index(tok: &str, line: usize) -> Result<u64, ParamError> {
    tok.parse::<u64>()
        .map_err(|_| parse_err(line, format!("expected an index, found `{tok}`")))
}

pub fn parse_partial_params(text: &str) -> Result<PartialTable, ParamError> {
    let mut out = PartialTable::default();
    let mut section = Section::None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[boundaries]" => Section::Boundaries,
                "[alpha]" => Section::Alpha,
                "[tiny]" => Section::Tiny,
                "[types]" => Section::Types,
                other => return Err(parse_err(line, format!("unknown section {other}"))),
            };
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(parse_err(line, "data before any section")),
            Section::Boundaries => {
                if toks.len() != 1 {
                    return Err(parse_err(line, "expected one rational"));
                }
                let t = parse_rational(toks[0]).map_err(|e| parse_err(line, e.to_string()))?;
                out.boundaries.push(t);
            }
            Section::Alpha => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `j i alpha`"));
                }
                let j = index(toks[0], line)? as usize;
                let i = index(toks[1], line)? as u32;
                let a = opt_rational(toks[2], line)?;
                let entry = out.alphas.entry(j).or_default();
                if entry.iter().any(|(k, _)| *k == i) {
                    return Err(parse_err(line, format!("duplicate alpha for class {j} type {i}")));
                }
                entry.push((i, a));
            }
            Section::Tiny => {
                if toks.len() != 3 {
                    return Err(parse_err(line, "expected `i A_i alpha`"));
                }
                let i = index(toks[0], line)? as u32;
                if i as usize != out.tiny.len() + 1 {
                    return Err(parse_err(line, "tiny types must be listed as 1, 2, ..."));
                }
                out.tiny.push((i, opt_rational(toks[1], line)?, opt_rational(toks[2], line)?));
            }
            Section::Types => {
                if toks.len() < 2 {
                    return Err(parse_err(line, "expected `j i1 [i2 ...]`"));
                }
                let j = index(toks[0], line)? as usize;
                let mut types = toks[1..]
                    .iter()
                    .map(|t| index(t, line).map(|v| v as u32))
                    .collect::<Result<Vec<_>, _>>()?;
                types.sort_unstable();
                types.dedup();
                out.type_hints.insert(j, types);
            }
        }
    }
    Ok(out)
}

/// Parses a complete parameter file into a validated table.
pub fn parse_params(text: &str) -> Result<ClassTable, ParamError> {
    parse_partial_params(text)?.into_table()
}

fn read(path: &Path) -> Result<String, ParamError> {
    std::fs::read_to_string(path).map_err(|source| ParamError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ClassTable, ParamError> {
    parse_params(&read(path.as_ref())?)
}

pub fn load_partial_params(path: impl AsRef<Path>) -> Result<PartialTable, ParamError> {
    parse_partial_params(&read(path.as_ref())?)
}

/// Serializes a table; `parse_params(write_params(t)) == t`.
pub fn write_params(table: &ClassTable) -> String {
    let mut s = String::from("[boundaries]\n");
    for t in table.inner_boundaries() {
        let _ = writeln!(s, "{t}");
    }
    s.push_str("\n[alpha]\n");
    for j in 2..=table.m() {
        for (i, a) in table.support(j) {
            let _ = writeln!(s, "{j} {i} {a}");
        }
    }
    s.push_str("\n[tiny]\n");
    for (idx, tt) in table.tiny_types().iter().enumerate() {
        let _ = writeln!(s, "{} {} {}", idx + 1, tt.threshold, tt.alpha);
    }
    s
}

/// Serializes partial data with `?` for unknown values.
pub fn write_partial_params(p: &PartialTable) -> String {
    let opt = |x: &Option<Rational>| x.as_ref().map_or("?".to_string(), |v| v.to_string());
    let mut s = String::from("[boundaries]\n");
    for t in &p.boundaries {
        let _ = writeln!(s, "{t}");
    }
    s.push_str("\n[alpha]\n");
    for (j, entries) in &p.alphas {
        for (i, a) in entries {
            let _ = writeln!(s, "{j} {i} {}", opt(a));
        }
    }
    s.push_str("\n[tiny]\n");
    for (i, a, al) in &p.tiny {
        let _ = writeln!(s, "{i} {} {}", opt(a), opt(al));
    }
    if !p.type_hints.is_empty() {
        s.push_str("\n[types]\n");
        for (j, types) in &p.type_hints {
            let list: Vec<String> = types.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{j} {}", list.join(" "));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::tests::toy_table;

    #[test]
    fn partial_round_trip() {
        let text = "[boundaries]\n1/2\n1/3\n\n[alpha]\n2 1 ?\n2 2 1/2\n\n[tiny]\n1 1/2 ?\n2 ? ?\n\n[types]\n2 1 2\n";
        let p = parse_partial_params(text).unwrap();
        assert_eq!(write_partial_params(&p), text);
    }

    #[test]
    fn round_trip() {
        let t = toy_table();
        let text = write_params(&t);
        assert_eq!(parse_params(&text).unwrap(), t);
    }

    #[test]
    fn comments_and_unknowns() {
        let text = "# header\n[boundaries]\n1/2 # t1\n1/3\n1/4\n[alpha]\n2 2 1\n3 1 ?\n3 2 ?\n[tiny]\n1 17/60 ?\n[types]\n3 2 1\n";
        let p = parse_partial_params(text).unwrap();
        assert_eq!(p.m(), 3);
        assert!(!p.is_complete());
        assert_eq!(p.known_alphas(2).unwrap().len(), 1);
        assert!(p.known_alphas(3).is_none());
        assert_eq!(p.type_hints[&3], vec![1, 2]);
        let err = p.into_table().unwrap_err().to_string();
        assert!(err.contains("class 3"), "{err}");
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let err = parse_partial_params("[boundaries]\n1/2\nabc\n").unwrap_err();
        assert!(matches!(err, ParamError::Parse { line: 3, .. }), "{err}");
        let err = parse_partial_params("[alpha]\n2 2\n").unwrap_err();
        assert!(matches!(err, ParamError::Parse { line: 2, .. }));
        let err = parse_partial_params("[bogus]\n").unwrap_err();
        assert!(matches!(err, ParamError::Parse { line: 1, .. }));
    }
}
