//! Acceptance gate: one test per shipping criterion, at full scale. Each
//! test prints a single summary line; the harness result line per criterion
//! is the pass/fail record.

mod common;

use std::time::Duration;

use kbl::checker::CheckConfig;

#[test]
fn criterion_1_worked_examples() {
    let cfg = CheckConfig::default();
    let elapsed = common::run_examples(&cfg);
    assert!(
        elapsed < Duration::from_secs(1),
        "example checks took {elapsed:?}, budget is 1s"
    );
    println!("criterion 1 (worked examples, < 1s): PASS ({elapsed:?})");
}

#[test]
fn criterion_2_worked_cost_numbers() {
    let cfg = CheckConfig::default();
    let report = common::run_worked_numbers(&cfg);
    println!(
        "criterion 2 (cost bounds {} and {}): PASS",
        report.snm_bound, report.kripke_bound
    );
}

#[test]
fn criterion_3_axiom_soundness() {
    let cfg = CheckConfig::default();
    let pool = common::shared_pool(&cfg.prover);
    let n = 500;
    let suites: [(&str, common::SuiteStats); 9] = [
        ("A2", common::run_a2(pool, 11, n, &cfg)),
        ("D", common::run_d(pool, 12, n, &cfg)),
        ("A4", common::run_a4(pool, 13, n, &cfg)),
        ("C1", common::run_c1(pool, 14, n, &cfg)),
        ("C2", common::run_c2(pool, 15, n, &cfg)),
        ("D1", common::run_d1(pool, 16, n, &cfg)),
        ("D2", common::run_d2(pool, 17, n, &cfg)),
        ("DA2", common::run_da2(pool, 18, n, &cfg)),
        ("DA4", common::run_da4(pool, 19, n, &cfg)),
    ];
    for (name, stats) in &suites {
        assert_eq!(stats.instances, n, "{name} ran short");
    }
    let witness = common::a5_witness(&cfg.prover);
    assert!(!witness.is_empty());
    println!(
        "criterion 3 (axiom soundness, {n} instances x {} suites + negative-introspection \
         countermodel): PASS",
        suites.len()
    );
}

#[test]
fn criterion_4_satisfaction_preservation() {
    let cfg = CheckConfig::default();
    let pool = common::shared_pool(&cfg.prover);
    let outcome = common::run_preservation(pool, 7100, 5, &cfg);
    assert_eq!(outcome.models, common::CORPUS_SIZE);
    assert_eq!(outcome.formulas, common::CORPUS_SIZE * 5);
    println!(
        "criterion 4 (preservation, {} models x 5 queries, {} at the distinguished state): PASS",
        outcome.models, outcome.mirrored
    );
}

#[test]
fn criterion_5_round_trip() {
    let cfg = CheckConfig::default();
    let pool = common::shared_pool(&cfg.prover);
    let models = common::run_round_trip(pool, &cfg.prover);
    assert_eq!(models, common::CORPUS_SIZE);
    println!("criterion 5 (marked round trip, {models} models): PASS");
}

#[test]
fn criterion_6_characteristic_consistency() {
    let cfg = CheckConfig::default();
    let pool = common::shared_pool(&cfg.prover);
    let models = common::run_consistency(pool, &cfg.prover);
    assert_eq!(models, common::CORPUS_SIZE + 1);
    println!("criterion 6 (characteristic consistency, {models} models): PASS");
}

#[test]
fn criterion_7_bound_inequality() {
    let cfg = CheckConfig::default();
    let rows = common::bound_rows(42, 20, &cfg);
    let (total, with_outer) = common::assert_bounds(&rows);
    assert!(with_outer > 0, "no row exercised the inequality");
    println!(
        "criterion 7 (strict bound inequality, {with_outer} of {total} rows with outer \
         members): PASS"
    );
}

#[test]
fn criterion_8_oracle_equivalence() {
    let cfg = kbl::deduction::ProverConfig::default();
    let (total, derivable) = common::run_oracle_suite(103, 700, 300, &cfg);
    assert_eq!(total, 1000);
    assert!(derivable > 0 && derivable < total, "one-sided instance mix");
    println!(
        "criterion 8 (oracle equivalence, {total} instances, {derivable} derivable): PASS"
    );
}
