//! Structure certification per method: the scalar coefficient conditions
//! for symplecticity, a finite-difference test of the canonical one-step
//! map, and the adjoint round-trip test for symmetry.
//!
//! Run with `cargo run -p larmor --example structure_checks`.

use larmor::integrators::MethodId;
use larmor::model::builtin_problem;
use larmor::verify::{eq17_residual, symmetry_residual, symplecticity_residual};

fn main() {
    let prob = builtin_problem(0.1).unwrap();
    let s0 = prob.initial_state();
    let h = 0.05;
    let delta = 1e-5 * s0.norm_inf().max(1.0);
    let samples = [0.5, 1.0, 2.0, std::f64::consts::FRAC_PI_2, 3.0];

    println!(
        "{:6} {:>14} {:>14} {:>14}   claimed",
        "method", "coeff cond", "fd symplectic", "adjoint trip"
    );
    for id in MethodId::aei_methods() {
        let eq17 = eq17_residual(id, prob.spectrum(), h, prob.epsilon(), &samples)
            .map(|r| r.max())
            .unwrap();
        let symp = symplecticity_residual(id, &prob, &s0, h, delta).unwrap();
        let symm = symmetry_residual(id, &prob, &s0, h).unwrap();
        println!(
            "{:6} {:>14.3e} {:>14.3e} {:>14.3e}   {}{}{}",
            id.name(),
            eq17,
            symp,
            symm,
            if id.is_symplectic() {
                "symplectic "
            } else {
                ""
            },
            if id.is_symmetric() { "symmetric " } else { "" },
            if id.is_energy_preserving() {
                "energy-preserving"
            } else {
                ""
            },
        );
    }
    println!("\nsmall coefficient residuals and FD residuals certify symplecticity (SM1-SM3);");
    println!("small adjoint round trips certify symmetry (all but M1).");
}
