//! Certification: per-scenario feasibility and bin-weight bounds, the global
//! ratio over all scenarios, resumable line-oriented reports, and the
//! empirical check of a finished packing against its weights.

mod empirical;
mod search;
mod uvw;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::knapsack::{build_delta_case1, build_delta_case2, solve_bnb_with, BnbResult, KnapsackError, SolveOptions};
use crate::numerics::{parse_rational, Rational};
use crate::params::ClassTable;
use crate::scenarios::{enumerate_scenarios, Scenario};
use crate::weights::{build_weight_function, Uvw, WeightFunction};

pub use empirical::{empirical_check, fallback_uvw, EmpiricalOptions, EmpiricalReport, Verdict};
pub use search::search_uvw;
pub use uvw::{UvwRecord, UvwTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Certified,
    Infeasible,
    MissingUvw,
    BudgetExceeded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Certified => "certified",
            Status::Infeasible => "infeasible",
            Status::MissingUvw => "missing-uvw",
            Status::BudgetExceeded => "budget-exceeded",
        })
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "certified" => Status::Certified,
            "infeasible" => Status::Infeasible,
            "missing-uvw" => Status::MissingUvw,
            "budget-exceeded" => Status::BudgetExceeded,
            _ => return Err(format!("unknown status {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub x: Rational,
    pub y: Rational,
    pub status: Status,
    pub uvw: Option<Uvw>,
    /// False when `uvw` came from the opt-in search rather than shipped data.
    pub canonical: bool,
    pub r_case1: Option<Rational>,
    pub r_case2: Option<Rational>,
    pub worst_pattern: String,
    /// Diagnostics for non-certified outcomes; not part of the report line.
    pub detail: String,
}

impl ScenarioReport {
    fn bare(s: &Scenario, status: Status, uvw: Option<Uvw>, detail: String) -> Self {
        ScenarioReport {
            x: s.x.clone(),
            y: s.y.clone(),
            status,
            uvw,
            canonical: true,
            r_case1: None,
            r_case2: None,
            worst_pattern: "-".into(),
            detail,
        }
    }

    pub fn r(&self) -> Option<Rational> {
        match (&self.r_case1, &self.r_case2) {
            (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
            _ => None,
        }
    }

    pub fn certified(&self) -> bool {
        self.status == Status::Certified
    }

    /// `x_lo x_hi status u v w r_case1 r_case2 r worst_pattern [noncanonical]`.
    pub fn line(&self) -> String {
        let opt = |x: Option<&Rational>| x.map_or("-".to_string(), |v| v.to_string());
        let (u, v, w) = match &self.uvw {
            Some(t) => (opt(t.u.as_ref()), opt(t.v.as_ref()), t.w.to_string()),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let mut s = format!(
            "{} {} {} {u} {v} {w} {} {} {} {}",
            self.x,
            self.y,
            self.status,
            opt(self.r_case1.as_ref()),
            opt(self.r_case2.as_ref()),
            opt(self.r().as_ref()),
            self.worst_pattern
        );
        if !self.canonical {
            s += " noncanonical";
        }
        s
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 10 {
            return Err(format!("short report line: {line:?}"));
        }
        let rat = |t: &str| parse_rational(t).map_err(|e| e.to_string());
        let opt = |t: &str| if t == "-" { Ok(None) } else { rat(t).map(Some) };
        let (u, v, w) = (opt(f[3])?, opt(f[4])?, opt(f[5])?);
        let uvw = w.map(|w| Uvw { u, v, w });
        Ok(ScenarioReport {
            x: rat(f[0])?,
            y: rat(f[1])?,
            status: f[2].parse()?,
            uvw,
            canonical: f.get(10) != Some(&"noncanonical"),
            r_case1: opt(f[6])?,
            r_case2: opt(f[7])?,
            worst_pattern: f[9].to_string(),
            detail: String::new(),
        })
    }
}

/// Solves both bin-weight problems of a weight function.
pub fn solve_cases(table: &ClassTable, wf: &WeightFunction, opts: SolveOptions) -> Result<(BnbResult, BnbResult), KnapsackError> {
    let c1 = solve_bnb_with(&build_delta_case1(wf, table), opts)?;
    let c2 = solve_bnb_with(&build_delta_case2(wf, table), opts)?;
    Ok((c1, c2))
}

/// Certifies a scenario under a given weight function (built or imported).
pub fn verify_weights(table: &ClassTable, wf: &WeightFunction, opts: SolveOptions) -> ScenarioReport {
    let s = &wf.scenario;
    match solve_cases(table, wf, opts) {
        Ok((c1, c2)) => {
            let worst = if c1.max_weight >= c2.max_weight { &c1 } else { &c2 };
            ScenarioReport {
                worst_pattern: worst.pattern_text(),
                r_case1: Some(c1.max_weight),
                r_case2: Some(c2.max_weight),
                ..ScenarioReport::bare(s, Status::Certified, Some(wf.uvw.clone()), String::new())
            }
        }
        Err(e) => ScenarioReport::bare(s, Status::BudgetExceeded, Some(wf.uvw.clone()), e.to_string()),
    }
}

pub fn verify_scenario(table: &ClassTable, scenario: &Scenario, uvw: &Uvw, opts: SolveOptions) -> ScenarioReport {
    match build_weight_function(table, scenario, uvw) {
        Ok(wf) => verify_weights(table, &wf, opts),
        // an undefined weight or rho > 2 also means no valid weighting exists
        Err(e) => ScenarioReport::bare(scenario, Status::Infeasible, Some(uvw.clone()), e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
    pub solve: SolveOptions,
    /// Search for non-canonical `u, v, w` on a dyadic grid of this many bits
    /// when a scenario has no shipped data.
    pub search_bits: Option<u32>,
}

fn verify_one(table: &ClassTable, uvw: &UvwTable, s: &Scenario, opts: &VerifyOptions) -> ScenarioReport {
    match uvw.lookup(s) {
        Some(rec) => verify_scenario(table, s, &rec.uvw, opts.solve),
        None => match opts.search_bits.and_then(|bits| search_uvw(table, s, bits, opts.solve)) {
            Some(mut rep) => {
                rep.canonical = false;
                rep
            }
            None => ScenarioReport::bare(s, Status::MissingUvw, None, "no uvw record covers this scenario".into()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalReport {
    /// Sorted by scenario.
    pub reports: Vec<ScenarioReport>,
    /// Maximum over scenarios certified with shipped data.
    pub global_r: Option<Rational>,
    /// Scenarios without shipped `u, v, w`.
    pub uncovered: Vec<(Rational, Rational)>,
}

impl GlobalReport {
    pub fn from_reports(mut reports: Vec<ScenarioReport>) -> Self {
        reports.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
        let global_r = reports
            .iter()
            .filter(|r| r.certified() && r.canonical)
            .filter_map(|r| r.r())
            .max();
        let uncovered = reports
            .iter()
            .filter(|r| r.status == Status::MissingUvw || !r.canonical)
            .map(|r| (r.x.clone(), r.y.clone()))
            .collect();
        GlobalReport { reports, global_r, uncovered }
    }

    pub fn count(&self, status: Status) -> usize {
        self.reports.iter().filter(|r| r.status == status).count()
    }

    /// Certified scenarios whose bound exceeds `target`.
    pub fn exceeding<'a>(&'a self, target: &'a Rational) -> impl Iterator<Item = &'a ScenarioReport> + 'a {
        self.reports.iter().filter(move |r| r.certified() && r.r().is_some_and(|v| &v > target))
    }

    /// Footer lines: `GLOBAL r=p/q` and one `UNCOVERED x y` per uncovered scenario.
    pub fn footer(&self) -> String {
        let mut s = format!("GLOBAL r={}\n", self.global_r.as_ref().map_or("-".into(), |r| r.to_string()));
        for (x, y) in &self.uncovered {
            s += &format!("UNCOVERED {x} {y}\n");
        }
        s
    }
}

fn run_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Verifies the given scenarios in parallel.
pub fn verify_scenarios(table: &ClassTable, uvw: &UvwTable, scenarios: &[Scenario], opts: VerifyOptions) -> GlobalReport {
    let reports = run_pool(opts.jobs, || {
        scenarios.par_iter().map(|s| verify_one(table, uvw, s, &opts)).collect::<Vec<_>>()
    });
    GlobalReport::from_reports(reports)
}

pub fn verify_all(table: &ClassTable, uvw: &UvwTable, opts: VerifyOptions) -> GlobalReport {
    verify_scenarios(table, uvw, &enumerate_scenarios(table), opts)
}

/// Reads the scenario lines of an existing report, ignoring footers and
/// keeping the last line per scenario.
pub fn read_report(path: &Path) -> io::Result<Vec<ScenarioReport>> {
    let mut seen = BTreeMap::new();
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("GLOBAL") || t.starts_with("UNCOVERED") {
            continue;
        }
        let rep = ScenarioReport::parse_line(t).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        seen.insert((rep.x.clone(), rep.y.clone()), rep);
    }
    Ok(seen.into_values().collect())
}

/// Like [`verify_all`], appending one line per scenario to `path` as soon as
/// it is done. Scenarios already present in the file are not recomputed.
pub fn verify_all_resumable(table: &ClassTable, uvw: &UvwTable, opts: VerifyOptions, path: &Path) -> io::Result<GlobalReport> {
    let done = read_report(path)?;
    let keys: std::collections::BTreeSet<_> = done.iter().map(|r| (r.x.clone(), r.y.clone())).collect();
    let todo: Vec<Scenario> = enumerate_scenarios(table)
        .into_iter()
        .filter(|s| !keys.contains(&(s.x.clone(), s.y.clone())))
        .collect();
    let sink = Mutex::new(OpenOptions::new().create(true).append(true).open(path)?);
    let fresh = run_pool(opts.jobs, || {
        todo.par_iter()
            .map(|s| {
                let rep = verify_one(table, uvw, s, &opts);
                let mut f = sink.lock().expect("report sink");
                writeln!(f, "{}", rep.line())?;
                f.flush()?;
                Ok(rep)
            })
            .collect::<io::Result<Vec<_>>>()
    })?;
    let report = GlobalReport::from_reports(done.into_iter().chain(fresh).collect());
    let mut f = sink.into_inner().expect("report sink");
    f.write_all(report.footer().as_bytes())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::tests::r;

    #[test]
    fn report_line_round_trip() {
        let rep = ScenarioReport {
            x: r("1/6"),
            y: r("15/88"),
            status: Status::Certified,
            uvw: Some(Uvw::basic(r("40165/4194304"))),
            canonical: true,
            r_case1: Some(r("3/2")),
            r_case2: Some(r("8/5")),
            worst_pattern: "1/2x1,1/7x2".into(),
            detail: String::new(),
        };
        assert_eq!(rep.line(), "1/6 15/88 certified - - 40165/4194304 3/2 8/5 8/5 1/2x1,1/7x2");
        assert_eq!(ScenarioReport::parse_line(&rep.line()).unwrap(), rep);
        let mut other = rep.clone();
        other.status = Status::MissingUvw;
        other.uvw = None;
        other.canonical = false;
        other.r_case1 = None;
        assert!(other.r().is_none());
        assert_eq!(ScenarioReport::parse_line(&other.line()).unwrap(), other);
    }

    #[test]
    fn global_ignores_uncertified() {
        let mk = |x: &str, st: Status, r1: &str| ScenarioReport {
            x: r(x),
            y: r("1/2"),
            status: st,
            uvw: None,
            canonical: true,
            r_case1: Some(r(r1)),
            r_case2: Some(r("1")),
            worst_pattern: "-".into(),
            detail: String::new(),
        };
        let g = GlobalReport::from_reports(vec![
            mk("1/3", Status::Certified, "3/2"),
            mk("1/4", Status::BudgetExceeded, "2"),
            mk("1/5", Status::MissingUvw, "2"),
        ]);
        assert_eq!(g.global_r, Some(r("3/2")));
        assert_eq!(g.uncovered, vec![(r("1/5"), r("1/2"))]);
        assert_eq!(g.reports[0].x, r("1/5"));
        assert_eq!(g.exceeding(&r("1")).count(), 1);
        assert!(g.footer().starts_with("GLOBAL r=3/2\nUNCOVERED 1/5 1/2\n"));
    }
}
