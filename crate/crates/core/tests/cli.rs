use std::io::Write;
use std::process::{Command, Output, Stdio};

use advanced_harmonic::data;
use advanced_harmonic::params::parse_params;
use advanced_harmonic::verifier::read_report;
use advanced_harmonic::weights::WeightTable;

const BOUND: &str = "10060574276093395247/6374352691333693440";

fn ah(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ah"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&ah(&[], "")), 2);
    assert_eq!(code(&ah(&["frobnicate"], "")), 2);
    assert_eq!(code(&ah(&["verify-scenario", "--x", "1/7", "--y", "1/5"], "")), 2, "not a scenario");
    assert_eq!(code(&ah(&["simulate", "--gen", "bogus"], "")), 2);
    assert_eq!(code(&ah(&["--help"], "")), 0);
}

#[test]
fn pack_traces_and_flags_bad_input() {
    let ok = ah(&["pack", "--audit"], "1/2\n1/3\n1/4\n3/5\n");
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout(&ok).lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert_eq!(code(&ah(&["pack"], "1/2\n0.25\n")), 3);
    assert_eq!(code(&ah(&["pack"], "3/2\n")), 3);
    assert_eq!(code(&ah(&["pack", "--params", "/nonexistent/params"], "1/2\n")), 3);
}

#[test]
fn verify_scenario_against_target() {
    let args = ["verify-scenario", "--x", "2/9", "--y", "3/13"];
    let o = ah(&args, "");
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("176162272658562716766643/111689991334728680079360"));
    let tight = [&args[..], &["--target", "3/2"]].concat();
    assert_eq!(code(&ah(&tight, "")), 1);
    // a negative w violates the constraints
    let bad = [&args[..], &["--w", "-1"]].concat();
    assert_eq!(code(&ah(&bad, "")), 1);
}

#[test]
fn verify_scenario_with_imported_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.wt");
    std::fs::write(&path, data::WEIGHT_TABLES[1].1).unwrap();
    let o = ah(&["verify-scenario", "--weights", path.to_str().unwrap()], "");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("# r~1.5782796"));
}

#[test]
fn verify_all_is_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let out_s = out.to_str().unwrap();
    let first = ah(&["verify-all", "--jobs", "2", "--target", BOUND, "--out", out_s], "");
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains(&format!("GLOBAL r={BOUND}")));
    assert_eq!(text.lines().filter(|l| l.starts_with("UNCOVERED")).count(), 162);
    assert_eq!(read_report(&out).unwrap().len(), 402);

    // a lower target is breached by certified scenarios
    let lower = ah(&["verify-all", "--target", "3/2", "--out", out_s], "");
    assert_eq!(code(&lower), 1);
    assert_eq!(read_report(&out).unwrap().len(), 402);
}

#[test]
fn export_weights_matches_shipped_table() {
    let o = ah(&["export-weights", "--x", "17/50", "--y", "653/1920"], "");
    assert_eq!(code(&o), 0);
    let exported = WeightTable::parse(&stdout(&o)).unwrap();
    let shipped = WeightTable::parse(data::WEIGHT_TABLES[0].1).unwrap();
    assert_eq!(exported.rows, shipped.rows);
    assert_eq!(exported.rho(), shipped.rho());
}

#[test]
fn reconstruct_completes_the_published_parameters() {
    let o = ah(&["reconstruct"], "");
    assert_eq!(code(&o), 0);
    assert_eq!(parse_params(&stdout(&o)).unwrap(), data::canonical_table());

    let dir = tempfile::tempdir().unwrap();
    let partial = dir.path().join("p.params");
    std::fs::write(&partial, data::CANONICAL_PARAMS).unwrap();
    let o = ah(&["verify-scenario", "--params", partial.to_str().unwrap(), "--x", "2/9", "--y", "3/13"], "");
    assert_eq!(code(&o), 0);
    // without weight tables nothing can be completed
    let o = ah(&["reconstruct", "--params", partial.to_str().unwrap(), "--weights", "/nonexistent.wt"], "");
    assert_eq!(code(&o), 3);
}

#[test]
fn opt_and_simulate() {
    let o = ah(&["opt"], "1/2\n1/2\n1/3\n2/3\n");
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("opt=2 method=exact"));
    let o = ah(&["simulate", "--gen", "uniform(1/100,1/3)", "--n", "3000", "--seed", "5", "--audit"], "");
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict=pass"));
    let o = ah(&["simulate", "--gen", "uniform", "--n", "12", "--seed", "1", "--target", BOUND], "");
    assert_eq!(code(&o), 0);
}
