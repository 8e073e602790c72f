//! One-step accuracy of every method against a closed-form solution: on the
//! linear problem F(x) = -x the exact flow is a matrix exponential, so each
//! scheme's local error and order are measured exactly.
//!
//! Run with `cargo run -p larmor --example linear_oracle`.

use larmor::integrators::{make_method, step, MethodId};
use larmor::model::LinearProblem;

fn main() {
    let eps = 0.1;
    let lp = LinearProblem::rotation_2d(eps).unwrap();
    let prob = lp.problem();
    println!("d = 2 linear oracle, eps = {eps}, one step from t = 0\n");
    println!(
        "{:6} {:>12} {:>12} {:>12} {:>10}",
        "method", "h=eps/2", "h=eps/4", "h=eps/8", "order"
    );
    for id in MethodId::aei_methods() {
        let mut errs = Vec::new();
        for k in 1..=3 {
            let h = eps / 2f64.powi(k);
            let m = make_method(id, prob, h).unwrap();
            let got = step(&m, prob, &prob.initial_state()).unwrap().next;
            let exact = lp.exact_solution(h);
            errs.push((&got.x - &exact.x).norm() + (&got.v - &exact.v).norm());
        }
        // local order from the last halving
        let order = (errs[1] / errs[2]).log2();
        println!(
            "{:6} {:>12.3e} {:>12.3e} {:>12.3e} {:>10.2}",
            id.name(),
            errs[0],
            errs[1],
            errs[2],
            order
        );
    }
    println!("\nlocal order p+1 means global order p: M1 is first order, the rest second.");
}
