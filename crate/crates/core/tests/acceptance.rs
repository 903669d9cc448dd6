//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per criterion
//! and exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use advanced_harmonic::baselines::{generate_instance, opt_brute_force, opt_exact, Generator, OptMethod, DEFAULT_OPT_LIMIT};
use advanced_harmonic::data::{self, PublishedBound};
use advanced_harmonic::engine::PackingState;
use advanced_harmonic::knapsack::{build_delta_case1, build_delta_case2, solve_bnb, solve_exhaustive, DeltaSet};
use advanced_harmonic::params::ClassTable;
use advanced_harmonic::scenarios::{enumerate_scenarios, Scenario};
use advanced_harmonic::verifier::{empirical_check, verify_all, verify_scenario, EmpiricalOptions, Status, Verdict, VerifyOptions};
use advanced_harmonic::weights::{build_weight_function, Uvw, WeightFunction};
use advanced_harmonic::Rational;

const GLOBAL_BOUND: &str = "10060574276093395247/6374352691333693440";

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

struct Outcome {
    pass: bool,
    summary: String,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome { pass, summary: summary.into() }
    }
}

struct Ctx {
    table: ClassTable,
    scenarios: Vec<Scenario>,
}

impl Ctx {
    fn scenario(&self, x: &str, y: &str) -> &Scenario {
        let (x, y) = (q(x), q(y));
        self.scenarios.iter().find(|s| s.x == x && s.y == y).expect("scenario exists")
    }

    fn shipped_wf(&self, s: &Scenario) -> WeightFunction {
        let rec = data::uvw_table().lookup(s).expect("uvw record").clone();
        build_weight_function(&self.table, s, &rec.uvw).unwrap()
    }
}

/// Counts aligned with `delta.items` for a multiset of sizes; `None` when a
/// size is not in the alphabet.
fn counts_of(delta: &DeltaSet, sizes: &[&str]) -> Option<Vec<u64>> {
    let mut c = vec![0u64; delta.items.len()];
    for s in sizes {
        let s = q(s);
        let i = delta.items.iter().position(|it| it.size == s)?;
        c[i] += 1;
    }
    Some(c)
}

/// True when `value` is within one unit of the last quoted decimal place.
/// Quoted decimals are rounded loosely: the exact sums behind "1.578279665"
/// and "1.576955" are 1.5782796641... and 1.5769542750...
fn matches_decimal(value: &Rational, quoted: &str) -> bool {
    let digits = quoted.split('.').nth(1).map_or(0, str::len);
    let err = (value - &q(&format!("{}/1{}", quoted.replace('.', ""), "0".repeat(digits)))).abs();
    err * Rational::from(10u64.pow(digits as u32)) <= Rational::one()
}

fn sum(terms: &[&str]) -> Rational {
    terms.iter().map(|t| q(t)).sum()
}

fn published_rows(ctx: &Ctx) -> Outcome {
    let uvw = data::uvw_table();
    let rows: Vec<_> = data::published_bounds()
        .into_iter()
        .filter_map(|b| match b {
            PublishedBound::Scenario { x, y, r } => Some((x, y, r)),
            _ => None,
        })
        .collect();
    let bad: Vec<String> = rows
        .par_iter()
        .filter_map(|(x, y, r)| {
            let s = Scenario::new(&ctx.table, x.clone(), y.clone())?;
            let rep = verify_scenario(&ctx.table, &s, &uvw.lookup(&s)?.uvw, Default::default());
            (rep.r().as_ref() != Some(r)).then(|| format!("{} got {:?}", s.label(), rep.r().map(|v| v.to_string())))
        })
        .collect();
    let n = rows.len();
    Outcome::new(bad.is_empty() && n == 34, format!("{}/{n} per-scenario bounds reproduced exactly {bad:?}", n - bad.len()))
}

fn worked_examples(ctx: &Ctx) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut check = |ok: bool, note: String| {
        pass &= ok;
        notes.push(format!("{}{note}", if ok { "" } else { "!" }));
    };

    let t = &ctx.table;
    let s = ctx.scenario("17/50", "653/1920");
    let wf = ctx.shipped_wf(s);
    let (c1, c2) = (build_delta_case1(&wf, t), build_delta_case2(&wf, t));
    let rho = q("1936246260875168533/1983131948414926848");
    // (knapsack, items, item weights as written out by hand, tiny fill, quoted value)
    let examples = [
        (&c2, &["17/50", "17/50", "1/4", "1/15"][..], &["4945169/4194304", "1080920410736029/3377699720527872", "569257302249594179/8070450532247928832"][..], "1/300", "1.572827420097824"),
        (&c1, &["17/50"][..], &["1", "4804339/8388608"][..], "1/9600", "1.572823543"),
        (&c2, &["1/2", "17/50", "3/20"][..], &["13587699/16777216", "4945169/8388608", "2211215673518099/13510798882111488"][..], "1/100", "1.57282647"),
    ];
    let mut first = None;
    for (d, items, weights, tiny, quoted) in examples {
        let v = counts_of(d, items).map(|c| d.value(&c));
        let hand = sum(weights) + &rho * &q(tiny);
        check(v.as_ref() == Some(&hand) && matches_decimal(&hand, quoted), format!("~{quoted}"));
        first = first.or(v);
    }
    let max2 = solve_bnb(&c2).unwrap().max_weight;
    check(Some(&max2) == first.as_ref(), format!("case-2 max = first pattern ({max2})"));

    let s = ctx.scenario("3/7", "1/2");
    let wf = ctx.shipped_wf(s);
    let d = build_delta_case2(&wf, t);
    let rho = q("1209038869/1409286144");
    let best = solve_bnb(&d).unwrap().max_weight;
    let examples = [
        (
            &["1/2", "1/3", "1/11", "1/37", "1/40", "1/43"][..],
            &["1", "56035901/134217728", "15032567/167772160", "61605937/2415919104", "20486803/872415232", "30706159/1409286144"][..],
            "997/2100120",
            "1.578279665",
        ),
        (&["1/2", "3/7", "1/15"][..], &["1", "8388625/16777216", "60903479239/962072674304"][..], "1/210", "1.567391"),
        (&["1/2", "1/3", "12/83"][..], &["1", "56035901/134217728", "301731089/2147483648"][..], "11/498", "1.576955"),
    ];
    for (i, (items, weights, tiny, quoted)) in examples.into_iter().enumerate() {
        let v = counts_of(&d, items).map(|c| d.value(&c));
        let hand = sum(weights) + &rho * &q(tiny);
        let ok = v.as_ref() == Some(&hand) && matches_decimal(&hand, quoted);
        if i == 0 {
            check(ok && hand == best, format!("(3/7,1/2] max ~{} = pattern ~{quoted}", best.to_decimal(10)));
        } else {
            check(ok && hand < best, format!("alt ~{quoted} below max"));
        }
    }
    Outcome::new(pass, notes.join(", "))
}

fn group_bounds(ctx: &Ctx) -> Outcome {
    let t = &ctx.table;
    let sixth = q("1/6");
    let low: Vec<_> = ctx.scenarios.iter().filter(|s| s.y <= sixth).collect();
    let below = q("82081796062891/52009705144320");
    let low_r: Vec<(String, Rational)> = low
        .par_iter()
        .map(|s| (s.label(), verify_scenario(t, s, &Uvw::basic(Rational::zero()), Default::default()).r().unwrap()))
        .collect();
    let above: Vec<_> = low_r.iter().filter(|(_, r)| *r > below).collect();
    let equal = low_r.iter().filter(|(_, r)| *r == below).count();
    let low_ok = above.is_empty() && equal == 0 && low.len() == 44;

    let (lo, hi) = (q("3/10"), q("1/3"));
    let mid: Vec<_> = ctx.scenarios.iter().filter(|s| s.x >= lo && s.y <= hi).collect();
    let w = Uvw::basic(q("413913/524288"));
    let mid_r: Vec<Option<Rational>> = mid.par_iter().map(|s| verify_scenario(t, s, &w, Default::default()).r()).collect();
    let max = mid_r.iter().flatten().max().cloned();
    let mid_ok = mid.len() == 160 && mid_r.iter().all(Option::is_some) && max == Some(q(GLOBAL_BOUND));

    let above_txt: Vec<String> = above.iter().map(|(l, r)| format!("{l} r={r}")).collect();
    Outcome::new(
        low_ok && mid_ok,
        format!(
            "(0,1/6] w=0: {}/{} strictly below, {equal} equal, above: [{}]; (3/10,1/3] w=413913/524288: {} scenarios, max {} [{}]",
            low.len() - above.len() - equal,
            low.len(),
            above_txt.join(", "),
            mid.len(),
            max.map_or("-".into(), |m| m.to_string()),
            if mid_ok { "ok" } else { "mismatch" }
        ),
    )
}

fn global_bound(ctx: &Ctx) -> Outcome {
    let rep = verify_all(&ctx.table, &data::uvw_table(), VerifyOptions::default());
    let g = rep.global_r.clone();
    let bound = q(GLOBAL_BOUND);
    let certified = rep.count(Status::Certified);
    let missing = rep.count(Status::MissingUvw);
    let listed = rep.uncovered.len() == missing && rep.footer().matches("UNCOVERED").count() == missing;
    let ok = g.as_ref().is_some_and(|g| *g <= bound)
        && rep.count(Status::Infeasible) == 0
        && certified + missing == ctx.scenarios.len()
        && listed;
    Outcome::new(
        ok,
        format!(
            "global r={} ({certified} certified, {missing} uncovered and listed, {} infeasible)",
            g.map_or("-".into(), |g| g.to_string()),
            rep.count(Status::Infeasible)
        ),
    )
}

fn weight_tables(ctx: &Ctx) -> Outcome {
    let t = &ctx.table;
    let mut notes = Vec::new();
    let mut pass = true;
    for ((name, _), wt) in data::WEIGHT_TABLES.iter().zip(data::weight_tables()) {
        let (x, y) = wt.scenario.clone().unwrap();
        let s = Scenario::new(t, x, y).unwrap();
        let uvw = Uvw { u: wt.u.clone(), v: wt.v.clone(), w: wt.w.clone().unwrap() };
        let built = build_weight_function(t, &s, &uvw).unwrap().to_table(t);
        let same = built.rows == wt.rows && built.rho() == wt.rho();
        pass &= same;
        notes.push(format!("{name} {} rows {}", wt.rows.len(), if same { "equal" } else { "DIFFER" }));
    }
    let s = ctx.scenario("3/7", "1/2");
    let wf = ctx.shipped_wf(s);
    let omega = q("56035901/134217728");
    let alpha = q("56035901/78181827");
    let omega_ok = (6..=165).all(|j| wf.omega(j) == Some(&omega) && t.alpha(j, 2) == alpha);
    pass &= omega_ok;
    notes.push(format!("omega classes 6..165 {}", if omega_ok { "equal" } else { "DIFFER" }));
    Outcome::new(pass, notes.join(", "))
}

struct Stream {
    gen: &'static str,
    n: usize,
    seed: u64,
}

/// 10 generators x 10 seeds: per generator one stream of 1e5, four of 1e4 and
/// five of 2000 items.
fn streams() -> Vec<Stream> {
    let gens = [
        "uniform",
        "uniform(1/100,1/3)",
        "uniform(1/3,1/2)",
        "uniform(1/1000,1/43)",
        "uniform(1/7,3/5)",
        "grid",
        "grid(large)",
        "grid(small)",
        "grid(huge)",
        "grid(tiny)",
    ];
    let mut out = Vec::new();
    for (g, gen) in gens.into_iter().enumerate() {
        for seed in 0..10u64 {
            let n = match seed {
                0 => 100_000,
                1..=4 => 10_000,
                _ => 2_000,
            };
            out.push(Stream { gen, n, seed: 1000 * g as u64 + seed });
        }
    }
    out
}

struct StreamResult {
    label: String,
    n: usize,
    audit: Result<(), String>,
    verdict: Verdict,
    excess: Option<Rational>,
}

fn run_streams(ctx: &Ctx) -> Vec<StreamResult> {
    let uvw = data::uvw_table();
    let opts = EmpiricalOptions { psi: 200, fallback: true, opt: None };
    let mut list = streams();
    list.sort_by_key(|s| std::cmp::Reverse(s.n));
    list.par_iter()
        .map(|st| {
            let g: Generator = st.gen.parse().unwrap();
            let inst = generate_instance(&g, st.n, st.seed, Some(&ctx.table)).unwrap();
            let mut state = PackingState::new(ctx.table.clone());
            let audit = state.pack_all(&inst.sizes, true).map_err(|e| e.to_string());
            let rep = empirical_check(&state, &ctx.scenarios, &uvw, &opts);
            StreamResult { label: inst.descriptor, n: st.n, audit, verdict: rep.verdict, excess: rep.excess() }
        })
        .collect()
}

fn engine_audit(results: &[StreamResult]) -> Outcome {
    let failed: Vec<String> = results
        .iter()
        .filter_map(|r| r.audit.as_ref().err().map(|e| format!("{}: {}", r.label, e.lines().next().unwrap_or(""))))
        .collect();
    let big = results.iter().filter(|r| r.n >= 100_000).count();
    Outcome::new(
        failed.is_empty() && results.len() == 100,
        format!("{}/{} streams audited after every item ({big} of 1e5 items) {failed:?}", results.len() - failed.len(), results.len()),
    )
}

fn weight_validity(results: &[StreamResult]) -> Outcome {
    let psi = Rational::from(200u64);
    let worst = |n: usize| {
        results
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.excess.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    };
    let bad: Vec<String> = results
        .iter()
        .filter(|r| r.n >= 10_000)
        .filter(|r| r.verdict != Verdict::Pass || r.excess.as_ref().is_none_or(|e| *e > psi))
        .map(|r| format!("{} {}", r.label, r.verdict))
        .collect();
    let (e4, e5) = (worst(10_000), worst(100_000));
    Outcome::new(
        bad.is_empty() && e4 <= psi && e5 <= psi,
        format!("max bins - W: {} at n=1e4, {} at n=1e5 {bad:?}", e4.to_decimal(2), e5.to_decimal(2)),
    )
}

fn oracles(ctx: &Ctx) -> Outcome {
    let t = &ctx.table;
    let picks = [
        ("3/7", "1/2"),
        ("17/50", "653/1920"),
        ("533/1600", "1/3"),
        ("3/10", "1441/4800"),
        ("2/7", "24/83"),
        ("271/960", "17/60"),
        ("2/9", "3/13"),
        ("1/5", "97/480"),
        ("1/6", "15/88"),
        ("1/10", "1/9"),
    ];
    let uvw = data::uvw_table();
    let mismatches: Vec<String> = picks
        .par_iter()
        .flat_map_iter(|(x, y)| {
            let s = ctx.scenarios.iter().find(|s| s.x == q(x) && s.y == q(y));
            let wf = s.and_then(|s| uvw.lookup(s).map(|r| build_weight_function(t, s, &r.uvw).unwrap()));
            let label = format!("({x},{y}]");
            let Some(wf) = wf else { return vec![format!("{label} unavailable")] };
            [build_delta_case1(&wf, t), build_delta_case2(&wf, t)]
                .into_iter()
                .filter_map(|d| {
                    let d = d.densest(14);
                    let (a, b) = (solve_bnb(&d).unwrap(), solve_exhaustive(&d, 14).unwrap());
                    (a.max_weight != b.max_weight).then(|| format!("{label} case {}", d.case.number()))
                })
                .collect()
        })
        .collect();

    let table = t.clone();
    let r = q(GLOBAL_BOUND);
    let slack = Rational::from(60u64);
    let gens = ["uniform", "uniform(1/10,1/2)", "uniform(1/4,3/4)", "grid", "uniform(1/3,1/2)"];
    let opt_bad: Vec<String> = (0..50u64)
        .into_par_iter()
        .filter_map(|i| {
            let g: Generator = gens[i as usize % gens.len()].parse().unwrap();
            let n = 3 + (i as usize % 8);
            let inst = generate_instance(&g, n, 7000 + i, Some(&table)).unwrap();
            let opt = opt_exact(&inst.sizes, DEFAULT_OPT_LIMIT);
            let brute = opt_brute_force(&inst.sizes);
            let mut ah = PackingState::new(table.clone());
            ah.pack_all(&inst.sizes, false).unwrap();
            let exact = opt.method == OptMethod::Exact && opt.bin_count == brute;
            let ratio_ok = Rational::from(ah.bins_used() as u64) <= &r * &Rational::from(opt.bin_count as u64) + &slack;
            (!exact || !ratio_ok).then(|| format!("{} opt {} brute {brute} ah {}", inst.descriptor, opt.bin_count, ah.bins_used()))
        })
        .collect();
    Outcome::new(
        mismatches.is_empty() && opt_bad.is_empty(),
        format!(
            "bnb = exhaustive on 14 densest types for {} scenarios x 2 cases {mismatches:?}; opt_exact = brute force and AH <= r*opt+60 on {}/50 instances {opt_bad:?}",
            picks.len(),
            50 - opt_bad.len()
        ),
    )
}

fn main() -> ExitCode {
    let table = data::canonical_table();
    let scenarios = enumerate_scenarios(&table);
    let ctx = Ctx { table, scenarios };

    let mut results: Vec<(u8, &str, Outcome, f64)> = Vec::new();
    let mut run = |n: u8, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        results.push((n, name, o, start.elapsed().as_secs_f64()));
        let (n, name, o, secs) = results.last().unwrap();
        println!("{} criterion {n} {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.summary);
    };
    run(1, "per-scenario bounds", &|| published_rows(&ctx));
    run(2, "worked examples", &|| worked_examples(&ctx));
    run(3, "group bounds", &|| group_bounds(&ctx));
    run(4, "global bound", &|| global_bound(&ctx));
    run(5, "weight tables", &|| weight_tables(&ctx));
    let start = Instant::now();
    let streams = run_streams(&ctx);
    println!("     ran {} streams in {:.1}s", streams.len(), start.elapsed().as_secs_f64());
    run(6, "engine invariants", &|| engine_audit(&streams));
    run(7, "weight validity", &|| weight_validity(&streams));
    run(8, "oracles", &|| oracles(&ctx));

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
