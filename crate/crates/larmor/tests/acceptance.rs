//! Acceptance battery. Each criterion runs at its stated tolerance and
//! prints one pass/fail line (run with `--nocapture` to see them all).
//!
//! Criterion 4's O(h) drift-ratio window and criterion 5's velocity-error
//! growth bound for M2 are known to fail: the symmetric methods conserve
//! energy to O(h²) (ratio ≈ 4 when h halves, better than the O(h) claim the
//! window encodes), and M2's velocity error is uniformly second order with
//! no 1/ε growth. Both measurements are stable and reproducible; the checks
//! are kept as stated rather than loosened to make them pass.

use std::time::Instant;

use larmor::verify::certify::{
    certify_convergence, certify_drift_scaling, certify_em1_energy, certify_eq17,
    certify_linear_oracle, certify_phi_suite, certify_resonance, certify_symplecticity, CheckRow,
};

const SEED: u64 = 42;

fn report(number: u32, name: &str, rows: &[CheckRow], started: Instant) {
    let pass = rows.iter().all(|r| r.pass);
    println!(
        "criterion {number} ({name}): {} [{} checks, {:.1?}]",
        if pass { "PASS" } else { "FAIL" },
        rows.len(),
        started.elapsed()
    );
    for r in rows.iter().filter(|r| !r.pass) {
        println!(
            "  failed: {} {} value={:.5e} threshold={:.3e}",
            r.check, r.method, r.value, r.threshold
        );
    }
    assert!(
        pass,
        "criterion {number} ({name}) failed: {:?}",
        rows.iter()
            .filter(|r| !r.pass)
            .map(|r| format!(
                "{} {} value={:.5e} vs {:.3e}",
                r.check, r.method, r.value, r.threshold
            ))
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_1_coefficient_conditions() {
    let t = Instant::now();
    let rows = certify_eq17().expect("eq17 battery");
    report(1, "coefficient symplecticity conditions", &rows, t);
}

#[test]
fn criterion_2_numerical_symplecticity() {
    let t = Instant::now();
    let rows = certify_symplecticity(SEED).expect("symplecticity battery");
    report(2, "finite-difference symplecticity", &rows, t);
}

#[test]
fn criterion_3_exact_energy_conservation() {
    let t = Instant::now();
    let rows = certify_em1_energy().expect("EM1 energy battery");
    report(3, "EM1 exact energy conservation", &rows, t);
}

#[test]
fn criterion_4_long_time_near_conservation() {
    let t = Instant::now();
    let rows = certify_drift_scaling().expect("drift battery");
    report(4, "long-time drift scaling", &rows, t);
}

#[test]
fn criterion_5_convergence_orders() {
    let t = Instant::now();
    let rows = certify_convergence().expect("convergence battery");
    report(5, "uniform convergence orders", &rows, t);
}

#[test]
fn criterion_6_linear_oracle_equivalence() {
    let t = Instant::now();
    let rows = certify_linear_oracle().expect("linear-oracle battery");
    report(6, "linear oracle one-step equivalence", &rows, t);
}

#[test]
fn criterion_7_resonance_behavior() {
    let t = Instant::now();
    let rows = certify_resonance().expect("resonance battery");
    report(7, "stepsize resonance behavior", &rows, t);
}

#[test]
fn criterion_8_phi_function_suite() {
    let t = Instant::now();
    let rows = certify_phi_suite().expect("phi suite");
    report(8, "phi-function suite", &rows, t);
}
