//! High-accuracy reference solutions via the Dormand–Prince 5(4) embedded
//! pair on the first-order form (x' = v, v' = (1/ε) B v + F(x)), with PI
//! stepsize control and exact landing on every requested output time. Plays
//! the role a stock adaptive ODE solver plays in the source experiments; any
//! solver meeting the local-tolerance contract is interchangeable.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{Problem, State};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
/// PI controller damping (Hairer's beta for DOPRI5).
const BETA: f64 = 0.04;

// Dormand–Prince 5(4) tableau (the system is autonomous, so the c nodes
// never appear explicitly).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights (row 7 of A, FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// b5 - b4, the embedded error weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Rhs<'a> {
    prob: &'a Problem,
    inv_eps: f64,
}

impl Rhs<'_> {
    fn eval(&self, y: &DVector<f64>) -> DVector<f64> {
        let d = self.prob.dim();
        let x = y.rows(0, d);
        let v = y.rows(d, d);
        let mut dy = DVector::zeros(2 * d);
        dy.rows_mut(0, d).copy_from(&v);
        let acc = self.prob.b().entries() * v * self.inv_eps + self.prob.force(&x.into_owned());
        dy.rows_mut(d, d).copy_from(&acc);
        dy
    }
}

/// Solves the problem from its initial state and returns the states at the
/// requested times (which must be finite, non-negative and sorted ascending).
/// Local error per step is held below `tol` in a mixed absolute/relative
/// norm; `tol` must lie in [1e-13, 1e-6].
pub fn reference_solve(prob: &Problem, times: &[f64], tol: f64) -> Result<Vec<State>> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::InvalidConfig(format!(
            "reference tolerance {tol:.3e} outside [1e-13, 1e-6]"
        )));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times
        .windows(2)
        .any(|w| w[0] > w[1] || !w[0].is_finite() || !w[1].is_finite())
        || times[0] < 0.0
    {
        return Err(Error::InvalidConfig(
            "requested times must be sorted, finite and non-negative".into(),
        ));
    }
    let d = prob.dim();
    let t_final = *times.last().unwrap();
    let rhs = Rhs {
        prob,
        inv_eps: 1.0 / prob.epsilon(),
    };

    let mut y = DVector::zeros(2 * d);
    y.rows_mut(0, d).copy_from(prob.x0());
    y.rows_mut(d, d).copy_from(prob.v0());
    let mut t = 0.0_f64;
    let mut k1 = rhs.eval(&y);
    let mut out = Vec::with_capacity(times.len());

    let floor = 1e-14 * t_final.max(f64::MIN_POSITIVE);
    let mut h = initial_step(&rhs, &y, &k1, tol, t_final);
    let mut err_old: f64 = 1e-4;
    let mut k = vec![DVector::zeros(2 * d); 7];

    for &target in times {
        loop {
            let gap = target - t;
            if gap <= floor {
                // arrived (within the representable floor)
                t = target;
                break;
            }
            if h < floor {
                return Err(Error::StepSizeUnderflow { h, floor });
            }
            // Landing exactly on an output time must not poison the
            // controller: a clamped step leaves the proposal `h` alone.
            let clamped = h >= gap;
            let h_step = if clamped { gap } else { h };
            // stages; k[0] is f(t, y) carried over (FSAL)
            k[0] = k1.clone();
            for i in 1..7 {
                let mut yi = y.clone();
                for j in 0..i {
                    if A[i][j] != 0.0 {
                        yi.axpy(h_step * A[i][j], &k[j], 1.0);
                    }
                }
                k[i] = rhs.eval(&yi);
            }
            let mut y_new = y.clone();
            for i in 0..7 {
                if B5[i] != 0.0 {
                    y_new.axpy(h_step * B5[i], &k[i], 1.0);
                }
            }
            // scaled error norm
            let mut err_sq = 0.0;
            for row in 0..2 * d {
                let mut e = 0.0;
                for i in 0..7 {
                    if E[i] != 0.0 {
                        e += E[i] * k[i][row];
                    }
                }
                e *= h_step;
                let sc = tol + tol * y[row].abs().max(y_new[row].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / (2 * d) as f64).sqrt();

            if !err.is_finite() {
                h = h_step * MIN_FACTOR;
                if h < floor {
                    return Err(Error::NonFinite {
                        context: format!("reference solver at t = {t}"),
                    });
                }
                continue;
            }
            if err <= 1.0 {
                if clamped {
                    t = target;
                } else {
                    t += h_step;
                }
                y = y_new;
                k1 = k[6].clone();
                let factor =
                    (SAFETY * err.max(1e-10).powf(-0.2 + 0.75 * BETA) * err_old.powf(BETA))
                        .clamp(MIN_FACTOR, MAX_FACTOR);
                err_old = err.max(1e-4);
                let proposal = h_step * factor;
                h = if clamped { h.max(proposal) } else { proposal };
            } else {
                h = h_step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                if h < floor {
                    return Err(Error::StepSizeUnderflow { h, floor });
                }
            }
        }
        out.push(State::new(
            target,
            y.rows(0, d).into_owned(),
            y.rows(d, d).into_owned(),
        ));
    }
    Ok(out)
}

/// State at a single time.
pub fn reference_final(prob: &Problem, t_end: f64, tol: f64) -> Result<State> {
    Ok(reference_solve(prob, &[t_end], tol)?.pop().unwrap())
}

/// Hairer's starting-step heuristic for a 5th-order method.
fn initial_step(
    rhs: &Rhs<'_>,
    y0: &DVector<f64>,
    f0: &DVector<f64>,
    tol: f64,
    t_final: f64,
) -> f64 {
    let n = y0.len() as f64;
    let sc_norm = |v: &DVector<f64>, y: &DVector<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..y.len() {
            let sc = tol + tol * y[i].abs();
            s += (v[i] / sc) * (v[i] / sc);
        }
        (s / n).sqrt()
    };
    let d0 = sc_norm(y0, y0);
    let d1 = sc_norm(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = y0 + f0 * h0;
    let f1 = rhs.eval(&y1);
    let d2 = sc_norm(&(&f1 - f0), y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_problem, LinearProblem};

    #[test]
    fn matches_exact_linear_flow() {
        let lp = LinearProblem::rotation_2d(0.1).unwrap();
        let got = reference_final(lp.problem(), 1.0, 1e-12).unwrap();
        let exact = lp.exact_solution(1.0);
        assert!(
            (&got.x - &exact.x).norm() <= 1e-9,
            "x error {:.3e}",
            (&got.x - &exact.x).norm()
        );
        assert!((&got.v - &exact.v).norm() <= 1e-9);
    }

    #[test]
    fn conserves_energy_on_benchmark() {
        let prob = builtin_problem(0.05).unwrap();
        let e0 = prob.energy(prob.x0(), prob.v0());
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
        let states = reference_solve(&prob, &times, 1e-12).unwrap();
        for s in states {
            let e = prob.energy(&s.x, &s.v);
            assert!(
                ((e - e0) / e0).abs() <= 1e-9,
                "t={}: relative drift {:.3e}",
                s.t,
                ((e - e0) / e0).abs()
            );
        }
    }

    #[test]
    fn tolerance_ordering_is_sane() {
        let prob = builtin_problem(0.1).unwrap();
        let lo = reference_final(&prob, 1.0, 1e-6).unwrap();
        let hi = reference_final(&prob, 1.0, 1e-12).unwrap();
        assert!((&lo.x - &hi.x).norm() <= 1e-4);
    }

    #[test]
    fn rejects_bad_tolerance_and_times() {
        let prob = builtin_problem(0.1).unwrap();
        assert!(reference_final(&prob, 1.0, 1e-5).is_err());
        assert!(reference_final(&prob, 1.0, 1e-14).is_err());
        assert!(reference_solve(&prob, &[0.5, 0.2], 1e-10).is_err());
    }
}
