//! Acceptance suite: one test per headline criterion, each printing its
//! pass/fail line (visible with `--nocapture`).

use polyharm::selftest::run_criterion;

fn run(index: usize) {
    let result = run_criterion(index).unwrap_or_else(|e| panic!("criterion {index} errored: {e}"));
    println!("{}", result.summary_line());
    for line in &result.details {
        println!("    {line}");
    }
    assert!(result.passed, "criterion {index} failed:\n{}", result.details.join("\n"));
}

#[test]
fn criterion_01_sol3_isoparametric_identities() {
    run(1);
}

#[test]
fn criterion_02_sol3_arsinh_ladder() {
    run(2);
}

#[test]
fn criterion_03_g41_polynomials_and_products() {
    run(3);
}

#[test]
fn criterion_04_g44_corrected_family_and_printed_failure() {
    run(4);
}

#[test]
fn criterion_05_g48_parameter_range() {
    run(5);
}

#[test]
fn criterion_06_g49_families_and_oracle_drift() {
    run(6);
}

#[test]
fn criterion_07_g410_eigenfunctions_and_ladder() {
    run(7);
}

#[test]
fn criterion_08_operator_identity_suite() {
    run(8);
}

#[test]
fn criterion_09_separation_identity() {
    run(9);
}

#[test]
fn criterion_10_randomized_eigenvector_families() {
    run(10);
}
