//! Uniform-in-ε convergence: global errors at T = 1 against the adaptive
//! reference over h = 2⁻⁶ … 2⁻¹⁰ for two oscillation strengths, with the
//! fitted order. The x error of the second-order methods is independent of
//! ε; the velocity error of the symplectic schemes grows like 1/ε.
//!
//! Run with `cargo run --release -p larmor --example convergence_table`.

use larmor::integrators::MethodId;
use larmor::verify::convergence_study;

fn main() {
    let eps_list = [2f64.powi(-4), 2f64.powi(-6)];
    for id in [MethodId::M1, MethodId::M2, MethodId::Sm3, MethodId::Em1] {
        let table = convergence_study(id, &eps_list, 6..=10, 1.0).unwrap();
        println!("{id}:");
        println!(
            "  {:>10} {:>12} {:>12} {:>12}",
            "eps", "h", "err_x", "err_v"
        );
        for r in &table.rows {
            if r.skipped {
                println!(
                    "  {:>10.5} {:>12.5e}      skipped (h > eps)",
                    r.epsilon, r.h
                );
            } else {
                println!(
                    "  {:>10.5} {:>12.5e} {:>12.5e} {:>12.5e}",
                    r.epsilon, r.h, r.err_x, r.err_v
                );
            }
        }
        for s in &table.slopes {
            println!(
                "  eps = {:>8.5}: slope_x = {:.3}, slope_v = {:.3}",
                s.epsilon, s.slope_x, s.slope_v
            );
        }
        let spread = table
            .uniform_err_x()
            .iter()
            .map(|&(h, _)| table.spread_x(h))
            .fold(0.0_f64, |a, b| a.max(b));
        println!("  worst err_x spread across eps: {spread:.2}x\n");
    }
}
