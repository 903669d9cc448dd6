//! Text form of a weight function: header lines `key=value` and rows
//! `lo hi weight`, where `lo`/`hi` are rationals or the symbols `a`, `1-a`.
//! The row starting at 0 holds the tiny density.

use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::numerics::{parse_rational, Rational};

#[derive(Debug, Error)]
pub enum WeightTableError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Value(Rational),
    /// The terminal quantity `a`.
    A,
    /// `1 - a`.
    OneMinusA,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(r) => write!(f, "{r}"),
            Bound::A => write!(f, "a"),
            Bound::OneMinusA => write!(f, "1-a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightRow {
    pub lo: Bound,
    pub hi: Bound,
    pub weight: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightTable {
    pub scenario: Option<(Rational, Rational)>,
    pub rho: Option<Rational>,
    pub u: Option<Rational>,
    pub v: Option<Rational>,
    pub w: Option<Rational>,
    pub rows: Vec<WeightRow>,
}

impl WeightTable {
    pub fn parse(text: &str) -> Result<Self, WeightTableError> {
        let mut t = WeightTable::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |msg: String| WeightTableError::Parse { line, msg };
            let rat = |s: &str| parse_rational(s).map_err(|e| err(e.to_string()));
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some((key, value)) = content.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "scenario" => {
                        let parts: Vec<&str> = value.split_whitespace().collect();
                        if parts.len() != 2 {
                            return Err(err("scenario= needs `x y`".into()));
                        }
                        t.scenario = Some((rat(parts[0])?, rat(parts[1])?));
                    }
                    "rho" => t.rho = Some(rat(value)?),
                    "u" => t.u = Some(rat(value)?),
                    "v" => t.v = Some(rat(value)?),
                    "w" => t.w = Some(rat(value)?),
                    other => return Err(err(format!("unknown header `{other}`"))),
                }
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(err("expected `lo hi weight`".into()));
            }
            let bound = |s: &str| -> Result<Bound, WeightTableError> {
                match s {
                    "a" => Ok(Bound::A),
                    "1-a" => Ok(Bound::OneMinusA),
                    _ => rat(s).map(Bound::Value),
                }
            };
            t.rows.push(WeightRow { lo: bound(toks[0])?, hi: bound(toks[1])?, weight: rat(toks[2])? });
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WeightTableError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WeightTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some((x, y)) = &self.scenario {
            let _ = writeln!(s, "scenario={x} {y}");
        }
        for (key, val) in [("rho", &self.rho), ("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            if let Some(val) = val {
                let _ = writeln!(s, "{key}={val}");
            }
        }
        for r in &self.rows {
            let _ = writeln!(s, "{} {} {}", r.lo, r.hi, r.weight);
        }
        s
    }

    /// Tiny density: header, else the row starting at 0.
    pub fn rho(&self) -> Option<Rational> {
        self.rho.clone().or_else(|| {
            self.rows
                .iter()
                .find(|r| r.lo == Bound::Value(Rational::zero()))
                .map(|r| r.weight.clone())
        })
    }

    /// Weight of huge items below `a`.
    pub fn huge_below_a(&self) -> Option<Rational> {
        self.rows
            .iter()
            .find(|r| r.hi == Bound::A)
            .map(|r| r.weight.clone())
            .or_else(|| self.w.clone())
            .or_else(|| self.weight_of_interval(&Rational::half(), &Rational::one()))
    }

    /// `(u, v)` from the rows split at `1-a`, else from the headers.
    pub fn threshold_uv(&self) -> Option<(Rational, Rational)> {
        let u = self.rows.iter().find(|r| r.hi == Bound::OneMinusA).map(|r| r.weight.clone());
        let v = self.rows.iter().find(|r| r.lo == Bound::OneMinusA).map(|r| r.weight.clone());
        u.zip(v).or_else(|| self.u.clone().zip(self.v.clone()))
    }

    /// Weight of the row whose numeric interval contains `(lo, hi]`.
    pub fn weight_of_interval(&self, lo: &Rational, hi: &Rational) -> Option<Rational> {
        self.rows.iter().find_map(|r| match (&r.lo, &r.hi) {
            (Bound::Value(a), Bound::Value(b)) if a <= lo && hi <= b => Some(r.weight.clone()),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "scenario=17/50 653/1920\nw=13587699/16777216\n0 1/43 7/5\n1/3 17/50 1/2\n17/50 1-a 3/5\n1-a 653/1920 4/5\n1/2 a 13587699/16777216\na 1 1\n";

    #[test]
    fn parse_and_query() {
        let t = WeightTable::parse(SAMPLE).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert_eq!(t.rho().unwrap(), parse_rational("7/5").unwrap());
        let (u, v) = t.threshold_uv().unwrap();
        assert_eq!((u.to_string(), v.to_string()), ("3/5".into(), "4/5".into()));
        assert_eq!(t.huge_below_a().unwrap().to_string(), "13587699/16777216");
        let w = t
            .weight_of_interval(&parse_rational("1/3").unwrap(), &parse_rational("3/8").unwrap());
        assert!(w.is_none());
        let w = t
            .weight_of_interval(&parse_rational("101/300").unwrap(), &parse_rational("17/50").unwrap())
            .unwrap();
        assert_eq!(w.to_string(), "1/2");
    }

    #[test]
    fn text_round_trip() {
        let t = WeightTable::parse(SAMPLE).unwrap();
        assert_eq!(WeightTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn bad_lines() {
        assert!(matches!(WeightTable::parse("x=1\n"), Err(WeightTableError::Parse { line: 1, .. })));
        assert!(matches!(WeightTable::parse("\n0 1\n"), Err(WeightTableError::Parse { line: 2, .. })));
        assert!(matches!(WeightTable::parse("0 b 1\n"), Err(WeightTableError::Parse { .. })));
    }
}
