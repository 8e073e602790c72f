//! Time integration: the six adaptive exponential one-step methods, the
//! symplectic-Euler baseline, fixed-step trajectory runs and an adaptive
//! embedded Runge–Kutta reference solver.

pub mod methods;
pub mod quadrature;
pub mod reference;

pub use methods::{
    aei_step, em1_step, em1_step_with, make_method, make_method_with, rk_to_aei, scalar_coeffs,
    se_step, step, Em1Settings, MethodId, MethodSpec, RKTableau, ScalarCoeffs, StepReport,
};
pub use reference::{reference_final, reference_solve};

use nalgebra::DVector;

use crate::error::Error;
use crate::model::Problem;

/// One recorded point of a trajectory.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub energy: f64,
}

/// Sampled (t, x, v, E) sequence from a fixed-step run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stride: usize,
    pub method: MethodId,
    pub h: f64,
    pub epsilon: f64,
    /// First time |x|∞ exceeded 10³, if it ever did. The analysis assumes the
    /// numerical solution stays in a compact set; this surfaces a violation
    /// instead of enforcing a bound.
    pub norm_warning: Option<f64>,
    /// Steps on which the EM1 fixed point hit its iteration cap.
    pub fp_nonconverged_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }

    pub fn initial_energy(&self) -> f64 {
        self.samples.first().expect("trajectory has samples").energy
    }
}

/// A run that aborted mid-way; the recorded prefix is preserved.
#[derive(Debug)]
pub struct Aborted {
    pub partial: Trajectory,
    pub cause: Error,
}

/// Runs n = round(T/h) steps of `m` from the problem's initial state,
/// recording every `stride`-th state (plus the final one) with its energy.
/// Sample times are k·h computed directly, so the final time is n·h to one
/// representable unit. Rerunning with identical inputs yields bitwise
/// identical trajectories.
pub fn integrate(
    m: &MethodSpec,
    prob: &Problem,
    t_end: f64,
    stride: usize,
) -> std::result::Result<Trajectory, Box<Aborted>> {
    let h = m.h;
    assert!(t_end > 0.0 && h > 0.0 && h <= t_end, "need 0 < h <= T");
    let stride = stride.max(1);
    let n = (t_end / h).round().max(1.0) as u64;
    let mut traj = Trajectory {
        samples: Vec::with_capacity((n / stride as u64 + 2) as usize),
        stride,
        method: m.id,
        h,
        epsilon: prob.epsilon(),
        norm_warning: None,
        fp_nonconverged_steps: 0,
    };
    let mut state = prob.initial_state();
    traj.samples.push(Sample {
        t: 0.0,
        x: state.x.clone(),
        v: state.v.clone(),
        energy: prob.energy(&state.x, &state.v),
    });
    for k in 1..=n {
        match methods::step(m, prob, &state) {
            Ok(report) => {
                state = report.next;
                state.t = k as f64 * h;
                if !report.fp_converged {
                    traj.fp_nonconverged_steps += 1;
                }
            }
            Err(cause) => {
                return Err(Box::new(Aborted {
                    partial: traj,
                    cause,
                }))
            }
        }
        if traj.norm_warning.is_none() && state.x.amax() > 1e3 {
            traj.norm_warning = Some(state.t);
        }
        if k % stride as u64 == 0 || k == n {
            traj.samples.push(Sample {
                t: state.t,
                x: state.x.clone(),
                v: state.v.clone(),
                energy: prob.energy(&state.x, &state.v),
            });
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_problem;

    #[test]
    fn stride_equal_to_step_count_gives_two_samples() {
        let prob = builtin_problem(0.1).unwrap();
        let h = 0.05;
        let m = make_method(MethodId::Sm1, &prob, h).unwrap();
        let n = (1.0_f64 / h).round() as usize;
        let traj = integrate(&m, &prob, 1.0, n).unwrap();
        assert_eq!(traj.samples.len(), 2);
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.samples[1].t, n as f64 * h);
    }

    #[test]
    fn integration_is_deterministic() {
        let prob = builtin_problem(0.05).unwrap();
        let m = make_method(MethodId::Em1, &prob, 0.05).unwrap();
        let a = integrate(&m, &prob, 2.0, 5).unwrap();
        let b = integrate(&m, &prob, 2.0, 5).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            assert!(sa.t.to_bits() == sb.t.to_bits());
            assert!(sa
                .x
                .iter()
                .zip(sb.x.iter())
                .all(|(p, q)| p.to_bits() == q.to_bits()));
            assert!(sa.energy.to_bits() == sb.energy.to_bits());
        }
    }

    #[test]
    fn sample_times_are_strictly_increasing_with_stride_spacing() {
        let prob = builtin_problem(0.1).unwrap();
        let h = 0.1;
        let stride = 4;
        let m = make_method(MethodId::M1, &prob, h).unwrap();
        let traj = integrate(&m, &prob, 4.0, stride).unwrap();
        for w in traj.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            assert!(dt > 0.0);
            assert!((dt - stride as f64 * h).abs() < 1e-12 || w[1].t == 4.0);
        }
    }
}
