//! Cross-module oracle tests: every expected value here is produced by an
//! independent route (Taylor sums, the matrix-exponential flow, the adaptive
//! reference solver, or brute-force quadrature), never by the code path
//! under test.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use larmor::integrators::{
    aei_step, em1_step_with, integrate, make_method, reference_final, step, MethodId,
};
use larmor::model::{builtin_problem, LinearProblem, Problem};
use larmor::spectral::{max_abs, skew_spectral, PhiTable, SkewMatrix};
use larmor::verify::fit_slope;

/// φ₁(hΩ) against a degree-30 Taylor sum Σ (hΩ)^j/(j+1)!; the benchmark
/// field has ‖hΩ‖ ≈ 1.04 at h = ε, so 30 terms converge far past 1e-10.
#[test]
fn phi_matrix_matches_taylor_sum() {
    let prob = builtin_problem(0.05).unwrap();
    let h = 0.05;
    let table = PhiTable::new(prob.spectrum(), h / prob.epsilon());
    let phi1 = table.phi_matrix(1, 1.0).unwrap();
    let m = prob.b().entries() * (h / prob.epsilon());
    let mut taylor = DMatrix::zeros(3, 3);
    let mut power = DMatrix::identity(3, 3);
    let mut factorial = 1.0_f64; // (j+1)!
    for j in 0..=30usize {
        if j > 0 {
            power = &power * &m;
        }
        factorial *= (j + 1) as f64;
        taylor += &power / factorial;
    }
    assert!(
        max_abs(&(&phi1 - &taylor)) <= 1e-10,
        "taylor mismatch {:.3e}",
        max_abs(&(&phi1 - &taylor))
    );
}

/// One M2 step on the d = 2 linear problem lands within 10·h³ of the
/// matrix-exponential flow.
#[test]
fn m2_one_step_matches_exact_linear_flow() {
    let lp = LinearProblem::rotation_2d(0.1).unwrap();
    let prob = lp.problem();
    let h = 0.1 / 4.0;
    let m = make_method(MethodId::M2, prob, h).unwrap();
    let got = aei_step(&m, prob, &prob.initial_state()).unwrap().next;
    let exact = lp.exact_solution(h);
    let err = (&got.x - &exact.x).norm() + (&got.v - &exact.v).norm();
    assert!(err <= 10.0 * h * h * h, "one-step error {err:.3e}");
}

/// M2 over [0, 1] at h = ε = 0.05 stays within 2e-3 of the reference.
#[test]
fn m2_trajectory_close_to_reference() {
    let prob = builtin_problem(0.05).unwrap();
    let m = make_method(MethodId::M2, &prob, 0.05).unwrap();
    let traj = integrate(&m, &prob, 1.0, usize::MAX).unwrap();
    let reference = reference_final(&prob, 1.0, 1e-12).unwrap();
    let err = (&traj.final_state().x - &reference.x).norm();
    assert!(err <= 2e-3, "final x error {err:.3e}");
}

/// With the magnetic field removed every method degenerates to a classical
/// scheme on x'' = F(x); single-step errors must show order 2 (M1) or
/// order 3 (the rest), slopes within ±0.25.
#[test]
fn single_step_orders_without_field() {
    let prob = field_free_benchmark();
    let hs = [0.02, 0.01, 0.005, 0.0025];
    for id in MethodId::aei_methods() {
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let m = make_method(id, &prob, h).unwrap();
                let got = step(&m, &prob, &prob.initial_state()).unwrap().next;
                let reference = reference_final(&prob, h, 1e-12).unwrap();
                (&got.x - &reference.x).norm() + (&got.v - &reference.v).norm()
            })
            .collect();
        let slope = fit_slope(&hs, &errs);
        let expected = if id.order() == 1 { 2.0 } else { 3.0 };
        assert!(
            (slope - expected).abs() <= 0.25,
            "{id}: single-step slope {slope:.3} (want {expected})"
        );
    }
}

fn field_free_benchmark() -> Problem {
    let bench = builtin_problem(1.0).unwrap();
    Problem::new(
        1.0,
        SkewMatrix::zero(3).unwrap(),
        Box::new({
            let b = builtin_problem(1.0).unwrap();
            move |x: &DVector<f64>| b.potential(x)
        }),
        Box::new({
            let b = builtin_problem(1.0).unwrap();
            move |x: &DVector<f64>| b.force(x)
        }),
        None,
        bench.x0().clone(),
        bench.v0().clone(),
        "benchmark without field",
    )
    .unwrap()
}

/// The quadrature is exact for the quartic benchmark potential, so each EM1
/// step changes the energy by no more than 50·fp_tol.
#[test]
fn em1_per_step_energy_increment() {
    let prob = builtin_problem(0.05).unwrap();
    let m = make_method(MethodId::Em1, &prob, 0.05).unwrap();
    let mut s = prob.initial_state();
    let fp_tol = 1e-14;
    for _ in 0..200 {
        let before = prob.energy(&s.x, &s.v);
        let rep = em1_step_with(&m, &prob, &s).unwrap();
        assert!(rep.fp_converged);
        let after = prob.energy(&rep.next.x, &rep.next.v);
        assert!(
            (after - before).abs() <= 50.0 * fp_tol,
            "per-step energy jump {:.3e}",
            (after - before).abs()
        );
        s = rep.next;
    }
}

/// A trajectory aborts with the recorded prefix when the state blows up;
/// M2 at a near-resonant stepsize on a stiff run must either complete or
/// abort cleanly, never silently emit non-finite samples.
#[test]
fn aborted_runs_keep_partial_trajectories() {
    let prob = builtin_problem(0.05).unwrap();
    // force a blow-up with an absurdly large stepsize
    let m = make_method(MethodId::M1, &prob, 40.0).unwrap();
    match integrate(&m, &prob, 4000.0, 1) {
        Ok(traj) => {
            assert!(traj.samples.iter().all(|s| s.energy.is_finite()));
        }
        Err(aborted) => {
            assert!(!aborted.partial.samples.is_empty());
            assert!(aborted
                .partial
                .samples
                .iter()
                .all(|s| s.x.iter().all(|c| c.is_finite())));
        }
    }
}

fn arbitrary_skew(d: usize) -> impl Strategy<Value = SkewMatrix> {
    proptest::collection::vec(-2.0..2.0f64, d * d).prop_map(move |vals| {
        let a = DMatrix::from_vec(d, d, vals);
        SkewMatrix::new((&a - a.transpose()) * 0.5).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// φ_k(M)·M = φ_{k-1}(M) - I/(k-1)! for M = τ·scale·B over random skew B.
    #[test]
    fn phi_recurrence_holds(
        b in (2usize..=5).prop_flat_map(arbitrary_skew),
        scale in 0.1..3.0f64,
        tau in 0.1..2.0f64,
        k in 1usize..=3,
    ) {
        let d = b.dim();
        let spectrum = skew_spectral(b).unwrap();
        let table = PhiTable::new(&spectrum, scale);
        let m = spectrum.source().entries() * (scale * tau);
        let inv_fact = 1.0 / (1..k).map(|i| i as f64).product::<f64>().max(1.0);
        let lhs = table.phi_matrix(k, tau).unwrap() * &m;
        let rhs = table.phi_matrix(k - 1, tau).unwrap() - DMatrix::identity(d, d) * inv_fact;
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-10);
    }

    /// φ₀ of a skew argument is orthogonal with unit determinant.
    #[test]
    fn phi0_is_orthogonal(
        b in (2usize..=5).prop_flat_map(arbitrary_skew),
        scale in 0.1..3.0f64,
        tau in 0.1..2.0f64,
    ) {
        let d = b.dim();
        let spectrum = skew_spectral(b).unwrap();
        let table = PhiTable::new(&spectrum, scale);
        let q = table.phi_matrix(0, tau).unwrap();
        prop_assert!(max_abs(&(q.transpose() * &q - DMatrix::identity(d, d))) <= 1e-10);
        prop_assert!((q.determinant() - 1.0).abs() <= 1e-10);
    }

    /// The canonical transform round-trips to 1e-13 relative.
    #[test]
    fn canonical_round_trip(
        coords in proptest::collection::vec(-3.0..3.0f64, 6),
        eps in 0.01..1.0f64,
    ) {
        let prob = builtin_problem(eps).unwrap();
        let s = larmor::model::State::new(
            0.0,
            DVector::from_column_slice(&coords[0..3]),
            DVector::from_column_slice(&coords[3..6]),
        );
        let back = prob.from_canonical(&prob.to_canonical(&s), s.t);
        let scale = s.norm_inf().max(1.0);
        prop_assert!((&back.x - &s.x).amax() <= 1e-13 * scale);
        prop_assert!((&back.v - &s.v).amax() <= 1e-13 * scale);
    }
}
