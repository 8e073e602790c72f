//! Long-time energy behavior of the six exponential methods and the
//! symplectic-Euler baseline on the charged-particle benchmark at h = ε.
//! The symmetric/symplectic schemes keep the drift bounded, EM1 conserves
//! to fixed-point tolerance, and M1/SE drift badly.
//!
//! Run with `cargo run --release -p larmor --example energy_drift`.

use larmor::integrators::{integrate, make_method, MethodId};
use larmor::model::builtin_problem;
use larmor::verify::energy_drift;

fn main() {
    let eps = 0.05;
    let t_end = 500.0;
    let prob = builtin_problem(eps).unwrap();
    println!(
        "benchmark, eps = h = {eps}, T = {t_end} ({} steps)\n",
        (t_end / eps) as u64
    );
    println!(
        "{:6} {:>14} {:>22}",
        "method", "max |ERR|", "second/first half max"
    );
    for id in MethodId::all() {
        let m = make_method(id, &prob, eps).unwrap();
        match integrate(&m, &prob, t_end, 10) {
            Ok(traj) => {
                let d = energy_drift(&traj);
                println!(
                    "{:6} {:>14.3e} {:>22.3}",
                    id.name(),
                    d.max_abs,
                    d.secular_ratio
                );
            }
            Err(aborted) => println!("{:6} aborted: {}", id.name(), aborted.cause),
        }
    }
    println!("\nERR(t) = (E(x_n, v_n) - E(x_0, v_0)) / E(x_0, v_0)");
    println!("a second/first-half ratio near 1 means bounded drift, 2 means linear growth.");
}
