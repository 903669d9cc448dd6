use advanced_harmonic::data;
use advanced_harmonic::engine::PackingState;
use advanced_harmonic::knapsack::{build_delta_case1, build_delta_case2, solve_bnb};
use advanced_harmonic::scenarios::{enumerate_scenarios, kind_counts, locate, Scenario};
use advanced_harmonic::verifier::{empirical_check, verify_scenario, EmpiricalOptions, ScenarioReport, Status, Verdict};
use advanced_harmonic::weights::{build_weight_function, Uvw, WeightFunction, WeightTable};
use advanced_harmonic::Rational;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

#[test]
fn scenario_partition() {
    let t = data::canonical_table();
    let s = enumerate_scenarios(&t);
    assert_eq!(s.len(), 402);
    assert_eq!(kind_counts(&s), [0, 164, 237, 1]);
    // consecutive, covering (0, 1/2]
    assert_eq!(s[0].x, Rational::zero());
    assert_eq!(s.last().unwrap().y, Rational::half());
    assert!(s.windows(2).all(|w| w[0].y == w[1].x));
    let in_range = |lo: &str, hi: &str| s.iter().filter(|sc| sc.x >= q(lo) && sc.y <= q(hi)).count();
    assert_eq!(in_range("0", "1/6"), 44);
    assert_eq!(in_range("1/6", "3/10"), 34);
    assert_eq!(in_range("3/10", "1/3"), 160);
    assert_eq!(in_range("1/3", "1/2"), 164);
    // every (3/10,1/3] scenario has width 1/4800
    assert!(s.iter().filter(|sc| sc.x >= q("3/10") && sc.y <= q("1/3")).all(|sc| &sc.y - &sc.x == q("1/4800")));
    assert_eq!(locate(&s, &q("1/2")).unwrap().label(), "(3/7,1/2]");
    assert_eq!(locate(&s, &q("653/1920")).unwrap().label(), "(17/50,653/1920]");
}

#[test]
fn weight_tables_round_trip_through_text() {
    let t = data::canonical_table();
    for wt in data::weight_tables() {
        let (x, y) = wt.scenario.clone().unwrap();
        let s = Scenario::new(&t, x, y).unwrap();
        let imported = WeightFunction::from_table(&t, s.clone(), &wt).unwrap();
        let uvw = Uvw { u: wt.u.clone(), v: wt.v.clone(), w: wt.w.clone().unwrap() };
        let built = build_weight_function(&t, &s, &uvw).unwrap();
        assert_eq!(imported.to_table(&t), built.to_table(&t), "{}", s.label());
        let text = built.to_table(&t).to_text();
        assert_eq!(WeightTable::parse(&text).unwrap(), built.to_table(&t));
        // certification from the imported table equals the one from u, v, w
        let a = solve_bnb(&build_delta_case2(&imported, &t)).unwrap();
        let b = solve_bnb(&build_delta_case2(&built, &t)).unwrap();
        assert_eq!(a.max_weight, b.max_weight);
    }
}

#[test]
fn report_lines_round_trip() {
    let t = data::canonical_table();
    let uvw = data::uvw_table();
    for (x, y) in [("3/7", "1/2"), ("2/9", "3/13"), ("0", "1/43")] {
        let s = Scenario::new(&t, q(x), q(y)).unwrap();
        let rep = verify_scenario(&t, &s, &uvw.lookup(&s).unwrap().uvw, Default::default());
        assert_eq!(rep.status, Status::Certified);
        let back = ScenarioReport::parse_line(&rep.line()).unwrap();
        assert_eq!(back.line(), rep.line());
        assert_eq!(back.r(), rep.r());
    }
}

#[test]
fn case_one_bound_has_the_huge_item_alone_plus_tiny_fill() {
    let t = data::canonical_table();
    let s = Scenario::new(&t, q("17/50"), q("653/1920")).unwrap();
    let wf = build_weight_function(&t, &s, &data::uvw_table().lookup(&s).unwrap().uvw).unwrap();
    let c1 = solve_bnb(&build_delta_case1(&wf, &t)).unwrap();
    let expected = q("1") + q("4804339/8388608") + q("1936246260875168533/1983131948414926848") * q("1/9600");
    assert_eq!(c1.max_weight, expected);
    assert_eq!(c1.pattern_text(), "17/50x1");
}

#[test]
fn empirical_check_on_fixed_streams() {
    let t = data::canonical_table();
    let s = enumerate_scenarios(&t);
    let uvw = data::uvw_table();
    let opts = EmpiricalOptions { psi: 200, fallback: true, opt: None };
    // 1/2 + eps items are huge and pair with nothing: one bin each, weight 1 each
    let items = vec![q("500001/1000000"); 300];
    let mut st = PackingState::new(t.clone());
    st.pack_all(&items, true).unwrap();
    let rep = empirical_check(&st, &s, &uvw, &opts);
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.bins, 300);
    assert!(rep.excess().unwrap() <= Rational::zero());
    // with psi = 0 the verdict is the sign of bins - W
    let mixed: Vec<Rational> = (0..2000).map(|i| Rational::frac(1 + (i * 7919) % 997, 3000)).collect();
    let mut st = PackingState::new(t);
    st.pack_all(&mixed, true).unwrap();
    let rep = empirical_check(&st, &s, &uvw, &opts);
    assert_eq!(rep.verdict, Verdict::Pass);
    let tight = empirical_check(&st, &s, &uvw, &EmpiricalOptions { psi: 0, ..opts });
    assert_eq!(rep.excess(), tight.excess());
    assert_eq!(tight.verdict == Verdict::Pass, rep.excess().unwrap() <= Rational::zero());
}
