use advanced_harmonic::params::reconstruct::{reconstruct_params, ClassStatus};
use advanced_harmonic::params::{load_params, load_partial_params};
use advanced_harmonic::verifier::UvwTable;
use advanced_harmonic::weights::WeightTable;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn tables() -> Vec<WeightTable> {
    ["scenario_17_50__653_1920.wt", "scenario_3_7__1_2.wt", "scenario_2_9__3_13.wt"]
        .iter()
        .map(|f| WeightTable::load(format!("{DATA}/weights/{f}")).unwrap())
        .collect()
}

fn endpoints() -> Vec<advanced_harmonic::Rational> {
    let uvw = UvwTable::load(format!("{DATA}/uvw.table")).unwrap();
    let mut e: Vec<_> = uvw.records.iter().flat_map(|r| [r.x_lo.clone(), r.x_hi.clone()]).collect();
    e.sort();
    e.dedup();
    e
}

#[test]
fn reconstruction_reproduces_completed_parameters() {
    let partial = load_partial_params(format!("{DATA}/canonical.params")).unwrap();
    let report = reconstruct_params(&partial, &tables(), &endpoints());
    assert!(report.conflicts().is_empty());
    assert!(report.undetermined().is_empty(), "undetermined: {:?}", report.undetermined());
    let completed = load_params(format!("{DATA}/canonical_completed.params")).unwrap();
    for j in 2..=completed.m() {
        assert_eq!(report.table.known_alphas(j).unwrap(), completed.support(j).to_vec(), "class {j}");
    }
    assert_eq!(report.tiny, ClassStatus::Determined);
    assert_eq!(report.table.into_table().unwrap(), completed);
}

#[test]
fn published_classes_are_confirmed_by_the_tables() {
    let partial = load_partial_params(format!("{DATA}/canonical.params")).unwrap();
    let report = reconstruct_params(&partial, &tables(), &endpoints());
    for c in &report.classes {
        if (6..=165).contains(&c.class) {
            assert_eq!(c.status, ClassStatus::Given, "class {}", c.class);
        }
    }
}
