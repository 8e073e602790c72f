//! Anatomy of an energy-preserving step: EM1 solves an implicit update by
//! fixed-point iteration on x_{n+1}, averaging the force along the chord
//! with Gauss–Legendre quadrature. This prints the iteration behavior and
//! the per-step energy increment, which stays at fixed-point tolerance.
//!
//! Run with `cargo run -p larmor --example em1_fixed_point`.

use larmor::integrators::{em1_step, make_method_with, step, Em1Settings, MethodId};
use larmor::model::builtin_problem;

fn main() {
    let eps = 0.05;
    let prob = builtin_problem(eps).unwrap();
    let s0 = prob.initial_state();
    let e0 = prob.energy(&s0.x, &s0.v);
    println!("initial energy E0 = {e0:.12}\n");

    println!("one step at h = eps with different fixed-point tolerances:");
    for fp_tol in [1e-6, 1e-10, 1e-14] {
        let rep = em1_step(&prob, &s0, eps, 5, fp_tol, 10).unwrap();
        let e1 = prob.energy(&rep.next.x, &rep.next.v);
        println!(
            "  fp_tol = {fp_tol:>7.0e}: {} iterations, residual {:.2e}, |E1 - E0| = {:.2e}",
            rep.fp_iterations,
            rep.fp_residual,
            (e1 - e0).abs()
        );
    }

    println!("\n200 consecutive steps at the default settings:");
    let m = make_method_with(MethodId::Em1, &prob, eps, Em1Settings::default()).unwrap();
    let mut s = s0;
    let mut worst_jump = 0.0_f64;
    let mut max_iters = 0;
    for _ in 0..200 {
        let before = prob.energy(&s.x, &s.v);
        let rep = step(&m, &prob, &s).unwrap();
        s = rep.next;
        worst_jump = worst_jump.max((prob.energy(&s.x, &s.v) - before).abs());
        max_iters = max_iters.max(rep.fp_iterations);
    }
    println!("  worst per-step |dE| = {worst_jump:.3e}, max iterations = {max_iters}");
    println!(
        "  cumulative |E - E0| = {:.3e}",
        (prob.energy(&s.x, &s.v) - e0).abs()
    );
}
