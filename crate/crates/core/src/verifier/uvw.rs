use std::path::Path;

use crate::numerics::{parse_rational, Rational};
use crate::params::ParamError;
use crate::scenarios::Scenario;
use crate::weights::Uvw;

/// One `x_lo x_hi [u v] w` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UvwRecord {
    pub x_lo: Rational,
    pub x_hi: Rational,
    pub uvw: Uvw,
}

impl UvwRecord {
    pub fn covers(&self, s: &Scenario) -> bool {
        self.x_lo <= s.x && s.y <= self.x_hi
    }
}

/// Scenario variables keyed by ranges of scenarios. Lookups use the narrowest
/// record covering the scenario whose shape (with or without `u, v`) fits it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UvwTable {
    pub records: Vec<UvwRecord>,
}

impl UvwTable {
    pub fn parse(text: &str) -> Result<Self, ParamError> {
        let mut records = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ParamError::Parse { line: n + 1, msg };
            let vals = line
                .split_whitespace()
                .map(|t| parse_rational(t).map_err(|e| err(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let uvw = match vals.len() {
                3 => Uvw::basic(vals[2].clone()),
                5 => Uvw::large(vals[2].clone(), vals[3].clone(), vals[4].clone()),
                k => return Err(err(format!("expected 3 or 5 fields, found {k}"))),
            };
            if vals[0] >= vals[1] {
                return Err(err("empty range".into()));
            }
            records.push(UvwRecord { x_lo: vals[0].clone(), x_hi: vals[1].clone(), uvw });
        }
        Ok(UvwTable { records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParamError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ParamError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn lookup(&self, s: &Scenario) -> Option<&UvwRecord> {
        self.records
            .iter()
            .filter(|r| r.covers(s) && r.uvw.u.is_some() == !s.basic)
            .min_by(|a, b| (&a.x_hi - &a.x_lo).cmp(&(&b.x_hi - &b.x_lo)))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            match (&r.uvw.u, &r.uvw.v) {
                (Some(u), Some(v)) => out += &format!("{} {} {u} {v} {}\n", r.x_lo, r.x_hi, r.uvw.w),
                _ => out += &format!("{} {} {}\n", r.x_lo, r.x_hi, r.uvw.w),
            }
        }
        out
    }
}
