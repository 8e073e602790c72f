//! Stepsize resonance: the M2 coefficients carry 1/φ₁(±hΩ) factors that
//! blow up when (h/ε)·|B| approaches even multiples of π, while M1 has no
//! reciprocal coefficients and stays flat. This scans the error at T = 1
//! over a grid of stepsize ratios h/ε at strong oscillation.
//!
//! Run with `cargo run --release -p larmor --example resonance_scan`.

use larmor::integrators::MethodId;
use larmor::verify::{median, resonance_scan};

fn main() {
    let eps = 2f64.powi(-10);
    let top = 4.5 * std::f64::consts::PI;
    let ratios: Vec<f64> = (1..=90).map(|j| j as f64 * top / 90.0).collect();
    for id in [MethodId::M1, MethodId::M2] {
        let pts = resonance_scan(id, eps, &ratios, 1.0).unwrap();
        let med = median(&pts.iter().map(|p| p.err_x).collect::<Vec<_>>());
        println!("{id}: median err over the grid = {med:.3e}");
        println!("  spikes above 10x median:");
        let mut any = false;
        for p in &pts {
            if p.err_x > 10.0 * med {
                any = true;
                println!(
                    "    h/eps = {:>7.4}  (h/eps)|B| = {:>7.4} = {:.3} pi   err = {:.3e}  ({:.0}x)",
                    p.ratio,
                    p.ratio_times_norm_b,
                    p.ratio_times_norm_b / std::f64::consts::PI,
                    p.err_x,
                    p.err_x / med
                );
            }
        }
        if !any {
            println!("    none");
        }
        println!();
    }
}
