//! Spectral calculus walkthrough: diagonalize the benchmark field, evaluate
//! φ-functions of hΩ, and confirm the recurrence and orthogonality
//! identities they must satisfy.
//!
//! Run with `cargo run -p larmor --example phi_functions`.

use larmor::model::builtin_problem;
use larmor::spectral::{max_abs, PhiTable};
use nalgebra::DMatrix;

fn main() {
    let prob = builtin_problem(0.05).unwrap();
    let spectrum = prob.spectrum();
    println!("benchmark field B =\n{}", prob.b().entries());
    println!(
        "eigenvalues of B are i*omega with omega = {:?}",
        spectrum.omegas().as_slice()
    );
    println!("|B| (spectral norm) = {:.6}\n", spectrum.norm());

    let h = 0.05;
    let table = PhiTable::new(spectrum, h / prob.epsilon());
    for k in 0..=2 {
        let m = table.phi_matrix(k, 1.0).unwrap();
        println!("phi_{k}(h Omega) =\n{m:.6}");
    }

    // phi_k(M) M = phi_{k-1}(M) - I/(k-1)!
    let m = prob.b().entries() * (h / prob.epsilon());
    for k in 1..=3usize {
        let inv_fact = 1.0 / (1..k).map(|i| i as f64).product::<f64>().max(1.0);
        let lhs = table.phi_matrix(k, 1.0).unwrap() * &m;
        let rhs = table.phi_matrix(k - 1, 1.0).unwrap() - DMatrix::identity(3, 3) * inv_fact;
        println!("recurrence residual k={k}: {:.3e}", max_abs(&(lhs - rhs)));
    }

    // phi_0 of a skew argument is a rotation
    let q = table.phi_matrix(0, 1.0).unwrap();
    println!(
        "phi_0 orthogonality |Q^T Q - I| = {:.3e}, det - 1 = {:.3e}",
        max_abs(&(q.transpose() * &q - DMatrix::identity(3, 3))),
        q.determinant() - 1.0
    );
}
