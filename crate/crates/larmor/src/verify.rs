//! Empirical certification of the structural claims: coefficient-condition
//! residuals for symplecticity, finite-difference symplecticity of the
//! canonical one-step map, adjoint symmetry, energy-drift statistics,
//! convergence tables with fitted slopes, and stepsize-resonance scans.
//!
//! Everything here treats the integrators as black boxes and checks them
//! against independent routes: the defining φ integral via adaptive
//! quadrature, the matrix-exponential flow of linear problems, the adaptive
//! reference solver, and scalar identities evaluated per eigenvalue.

pub mod certify;

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrators::{
    integrate, make_method, make_method_with, reference_solve, scalar_coeffs, step, Em1Settings,
    MethodId, Trajectory,
};
use crate::model::{builtin_problem, CanonicalState, Problem, State};
use crate::spectral::{phi_scalar, SkewSpectrum};

/// Reference tolerance used for every error measurement in this module.
pub const REFERENCE_TOL: f64 = 1e-12;

/// φ_k(z) by adaptive Simpson quadrature of the defining integral
/// ∫₀¹ e^{(1-σ)z} σ^{k-1}/(k-1)! dσ. Independent of the closed-form /
/// Taylor evaluation path in the spectral module; used as its oracle.
pub fn phi_quadrature_oracle(k: usize, z: Complex64) -> Complex64 {
    assert!(k >= 1, "the integral form needs k >= 1");
    let km1 = (k - 1) as i32;
    let inv_fact: f64 = 1.0 / (1..k).map(|i| i as f64).product::<f64>().max(1.0);
    let g = |sigma: f64| -> Complex64 { ((1.0 - sigma) * z).exp() * sigma.powi(km1) * inv_fact };
    adaptive_simpson(&g, 0.0, 1.0, 1e-14, 48)
}

fn adaptive_simpson<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + fm * 4.0 + fb);
    simpson_refine(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + flm * 4.0 + fm);
    let right = (b - m) / 6.0 * (fm + frm * 4.0 + fb);
    let refined = left + right;
    if depth == 0 || (refined - whole).norm() <= 15.0 * tol {
        refined + (refined - whole) / 15.0
    } else {
        simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Residual maxima of the three symplecticity conditions on the method
/// coefficients, evaluated scalar-wise at K = i·k over the sampled arguments,
/// and the d_j constants recovered from the first condition.
#[derive(Debug, Clone)]
pub struct Eq17Residual {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub d: Vec<Complex64>,
}

impl Eq17Residual {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

/// Checks the coefficient conditions at K = i·k for every k in `k_samples`
/// plus the bound method's own eigenvalue arguments (h/ε)·ω_j. Scalar-wise
/// evaluation suffices because all coefficients are analytic functions of the
/// single matrix hΩ and are therefore simultaneously diagonalized.
pub fn eq17_residual(
    id: MethodId,
    spectrum: &SkewSpectrum,
    h: f64,
    eps: f64,
    k_samples: &[f64],
) -> Result<Eq17Residual> {
    let mut ks: Vec<f64> = k_samples.to_vec();
    ks.extend(spectrum.omegas().iter().map(|&w| w * h / eps));
    assert!(!ks.is_empty());

    let first = scalar_coeffs(id, Complex64::new(0.0, ks[0]))?;
    let s = first.beta.len();
    let k0 = Complex64::new(0.0, ks[0]);
    let d: Vec<Complex64> = (0..s)
        .map(|j| first.gamma[j] - k0 * first.beta[j])
        .collect();

    let mut r1 = 0.0_f64;
    let mut r2 = 0.0_f64;
    let mut r3 = 0.0_f64;
    for &kv in &ks {
        let k = Complex64::new(0.0, kv);
        let sc = scalar_coeffs(id, k)?;
        let phi1_bar = phi_scalar(1, k).conj();
        for (j, &dj) in d.iter().enumerate() {
            let cj = sc.c[j];
            let phi1_cj_bar = phi_scalar(1, k * cj).conj();
            // condition 1: γ_j - K β_j is a constant d_j
            r1 = r1.max((sc.gamma[j] - k * sc.beta[j] - dj).norm());
            // condition 2
            let lhs = sc.gamma[j] * (phi1_bar - cj * phi1_cj_bar);
            let rhs = sc.beta[j] * ((-k).exp() + k * phi1_bar - cj * k * phi1_cj_bar);
            r2 = r2.max((lhs - rhs).norm());
        }
        // condition 3 over all stage pairs
        for i in 0..s {
            for j in 0..s {
                let lhs = sc.beta[i].conj() * sc.gamma[j]
                    - 0.5 * k * sc.beta[i].conj() * sc.beta[j]
                    - sc.alpha[j][i].conj() * (sc.gamma[j] - k * sc.beta[j]);
                let rhs = sc.beta[j] * sc.gamma[i].conj()
                    + 0.5 * k * sc.beta[j] * sc.beta[i].conj()
                    - sc.alpha[i][j] * (sc.gamma[i].conj() + k * sc.beta[i].conj());
                r3 = r3.max((lhs - rhs).norm());
            }
        }
    }
    Ok(Eq17Residual { r1, r2, r3, d })
}

/// ‖JᵀSJ - S‖∞ for the one-step map in canonical variables (x, p), with J
/// built by central differences of step `delta` per coordinate and S the
/// canonical structure matrix [[0, I], [-I, 0]].
pub fn symplecticity_residual(
    id: MethodId,
    prob: &Problem,
    s: &State,
    h: f64,
    delta: f64,
) -> Result<f64> {
    let m = make_method(id, prob, h)?;
    let canon = prob.to_canonical(s);
    let map = |x: &DVector<f64>, p: &DVector<f64>| -> Result<(DVector<f64>, DVector<f64>)> {
        let st = prob.from_canonical(
            &CanonicalState {
                x: x.clone(),
                p: p.clone(),
            },
            s.t,
        );
        let next = step(&m, prob, &st)?.next;
        let c = prob.to_canonical(&next);
        Ok((c.x, c.p))
    };
    let d = prob.dim();
    let mut jac = DMatrix::zeros(2 * d, 2 * d);
    for col in 0..2 * d {
        let mut zp = (canon.x.clone(), canon.p.clone());
        let mut zm = (canon.x.clone(), canon.p.clone());
        if col < d {
            zp.0[col] += delta;
            zm.0[col] -= delta;
        } else {
            zp.1[col - d] += delta;
            zm.1[col - d] -= delta;
        }
        let (xp, pp) = map(&zp.0, &zp.1)?;
        let (xm, pm) = map(&zm.0, &zm.1)?;
        for row in 0..d {
            jac[(row, col)] = (xp[row] - xm[row]) / (2.0 * delta);
            jac[(d + row, col)] = (pp[row] - pm[row]) / (2.0 * delta);
        }
    }
    Ok(structure_defect(&jac))
}

/// As [`symplecticity_residual`] for an arbitrary canonical map, e.g. the
/// exact flow of the linear oracle.
pub fn symplecticity_residual_of_map<F>(
    map: F,
    x: &DVector<f64>,
    p: &DVector<f64>,
    delta: f64,
) -> f64
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> (DVector<f64>, DVector<f64>),
{
    let d = x.len();
    let mut jac = DMatrix::zeros(2 * d, 2 * d);
    for col in 0..2 * d {
        let mut xp = x.clone();
        let mut xm = x.clone();
        let mut pp = p.clone();
        let mut pm = p.clone();
        if col < d {
            xp[col] += delta;
            xm[col] -= delta;
        } else {
            pp[col - d] += delta;
            pm[col - d] -= delta;
        }
        let (ax, ap) = map(&xp, &pp);
        let (bx, bp) = map(&xm, &pm);
        for row in 0..d {
            jac[(row, col)] = (ax[row] - bx[row]) / (2.0 * delta);
            jac[(d + row, col)] = (ap[row] - bp[row]) / (2.0 * delta);
        }
    }
    structure_defect(&jac)
}

fn structure_defect(jac: &DMatrix<f64>) -> f64 {
    let n2 = jac.nrows();
    let d = n2 / 2;
    let mut s = DMatrix::zeros(n2, n2);
    for i in 0..d {
        s[(i, d + i)] = 1.0;
        s[(d + i, i)] = -1.0;
    }
    crate::spectral::max_abs(&(jac.transpose() * &s * jac - s))
}

/// Relative distance between `s` and step(-h) ∘ step(h) applied to `s`;
/// zero for a self-adjoint method up to solver tolerance.
pub fn symmetry_residual(id: MethodId, prob: &Problem, s: &State, h: f64) -> Result<f64> {
    symmetry_residual_with(id, prob, s, h, Em1Settings::default())
}

pub fn symmetry_residual_with(
    id: MethodId,
    prob: &Problem,
    s: &State,
    h: f64,
    settings: Em1Settings,
) -> Result<f64> {
    let fwd = make_method_with(id, prob, h, settings)?;
    let bwd = make_method_with(id, prob, -h, settings)?;
    let mid = step(&fwd, prob, s)?.next;
    let back = step(&bwd, prob, &mid)?.next;
    let scale = s.norm_inf().max(1.0);
    Ok(((&back.x - &s.x).amax().max((&back.v - &s.v).amax())) / scale)
}

/// Relative energy errors ERR(t) = (E(t) - E(0))/E(0) along a trajectory,
/// with the largest magnitude and a secular-growth proxy.
#[derive(Debug, Clone)]
pub struct DriftSeries {
    pub times: Vec<f64>,
    pub err: Vec<f64>,
    pub max_abs: f64,
    /// max |ERR| over the second half divided by max |ERR| over the first
    /// half (floored at 1e-15). Near 1 for bounded drift, ~2 for linear
    /// secular growth.
    pub secular_ratio: f64,
}

pub fn energy_drift(traj: &Trajectory) -> DriftSeries {
    assert!(traj.samples.len() >= 2, "drift needs at least two samples");
    let e0 = traj.initial_energy();
    let denom = if e0.abs() > 1e-300 { e0 } else { 1.0 };
    let times: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let err: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| (s.energy - e0) / denom)
        .collect();
    let t_mid = 0.5 * times.last().unwrap();
    let mut first = 0.0_f64;
    let mut second = 0.0_f64;
    let mut max_abs = 0.0_f64;
    for (t, e) in times.iter().zip(&err) {
        let a = e.abs();
        max_abs = max_abs.max(a);
        if *t <= t_mid {
            first = first.max(a);
        } else {
            second = second.max(a);
        }
    }
    DriftSeries {
        times,
        err,
        max_abs,
        secular_ratio: second / first.max(1e-15),
    }
}

/// One measured grid point of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub h: f64,
    pub err_x: f64,
    pub err_v: f64,
    /// (ε, h) violated h <= ε for a method whose error bound requires it.
    pub skipped: bool,
}

#[derive(Debug, Clone)]
pub struct EpsSlopes {
    pub epsilon: f64,
    pub slope_x: f64,
    pub slope_v: f64,
}

/// (ε, h, err_x, err_v) grid with least-squares slopes per ε.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub method: MethodId,
    pub rows: Vec<ConvergenceRow>,
    pub slopes: Vec<EpsSlopes>,
}

impl ConvergenceTable {
    /// max over ε of err_x at each h present for every ε.
    pub fn uniform_err_x(&self) -> Vec<(f64, f64)> {
        let mut hs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| !r.skipped)
            .map(|r| r.h)
            .collect();
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        hs.iter()
            .map(|&h| {
                let m = self
                    .rows
                    .iter()
                    .filter(|r| !r.skipped && r.h == h)
                    .map(|r| r.err_x)
                    .fold(0.0_f64, f64::max);
                (h, m)
            })
            .collect()
    }

    /// max/min of err_x across ε at stepsize `h` (1.0 when only one ε ran).
    pub fn spread_x(&self, h: f64) -> f64 {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| !r.skipped && r.h == h)
            .map(|r| r.err_x)
            .collect();
        if vals.len() < 2 {
            return 1.0;
        }
        let lo = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = vals.iter().fold(0.0_f64, |a, &b| a.max(b));
        hi / lo.max(1e-300)
    }
}

/// Fits log err against log h.
pub fn fit_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errs)
        .filter(|(_, &e)| e.is_finite() && e > 0.0)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Global errors of `id` on the benchmark at t = T against the adaptive
/// reference, over h = 2^-i for i in `i_range` and each ε. Pairs violating
/// h <= ε are skipped (and recorded) for the methods whose error bound
/// requires that condition.
pub fn convergence_study(
    id: MethodId,
    eps_list: &[f64],
    i_range: RangeInclusive<u32>,
    t_end: f64,
) -> Result<ConvergenceTable> {
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &eps in eps_list {
        let prob = builtin_problem(eps)?;
        let reference = reference_solve(&prob, &[t_end], REFERENCE_TOL)?
            .pop()
            .unwrap();
        let grid: Vec<u32> = i_range.clone().collect();
        let eps_rows: Vec<ConvergenceRow> = grid
            .par_iter()
            .map(|&i| {
                let h = 2f64.powi(-(i as i32));
                if id.requires_h_below_eps() && h > eps {
                    return Ok(ConvergenceRow {
                        epsilon: eps,
                        h,
                        err_x: f64::NAN,
                        err_v: f64::NAN,
                        skipped: true,
                    });
                }
                let m = make_method(id, &prob, h)?;
                let traj = match integrate(&m, &prob, t_end, usize::MAX) {
                    Ok(t) => t,
                    Err(aborted) => return Err(aborted.cause),
                };
                let fin = traj.final_state();
                Ok(ConvergenceRow {
                    epsilon: eps,
                    h,
                    err_x: (&fin.x - &reference.x).norm() / reference.x.norm(),
                    err_v: (&fin.v - &reference.v).norm() / reference.v.norm(),
                    skipped: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let hs: Vec<f64> = eps_rows
            .iter()
            .filter(|r| !r.skipped)
            .map(|r| r.h)
            .collect();
        let ex: Vec<f64> = eps_rows
            .iter()
            .filter(|r| !r.skipped)
            .map(|r| r.err_x)
            .collect();
        let ev: Vec<f64> = eps_rows
            .iter()
            .filter(|r| !r.skipped)
            .map(|r| r.err_v)
            .collect();
        slopes.push(EpsSlopes {
            epsilon: eps,
            slope_x: fit_slope(&hs, &ex),
            slope_v: fit_slope(&hs, &ev),
        });
        rows.extend(eps_rows);
    }
    rows.sort_by(|a, b| (a.epsilon, a.h).partial_cmp(&(b.epsilon, b.h)).unwrap());
    Ok(ConvergenceTable {
        method: id,
        rows,
        slopes,
    })
}

/// One point of a resonance scan: stepsize ratio h/ε, the same ratio times
/// ‖B‖ (where the φ₁ denominators actually vanish), and the global x error
/// at t ≈ T. Construction or run failures at resonant ratios are recorded
/// as +∞ rather than raised.
#[derive(Debug, Clone)]
pub struct ResonancePoint {
    pub ratio: f64,
    pub ratio_times_norm_b: f64,
    pub err_x: f64,
}

/// Global x-errors of `id` on the benchmark at fixed ε for h = ratio·ε.
/// Every run ends at t_n = round(T/h)·h, and the reference is evaluated at
/// exactly those times in a single adaptive pass.
pub fn resonance_scan(
    id: MethodId,
    eps: f64,
    ratios: &[f64],
    t_end: f64,
) -> Result<Vec<ResonancePoint>> {
    let prob = builtin_problem(eps)?;
    let norm_b = prob.spectrum().norm();
    let ends: Vec<f64> = ratios
        .iter()
        .map(|&r| {
            let h = r * eps;
            (t_end / h).round().max(1.0) * h
        })
        .collect();
    let mut sorted = ends.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let ref_states = reference_solve(&prob, &sorted, REFERENCE_TOL)?;
    let lookup = |t: f64| -> &State {
        let idx = sorted.partition_point(|&u| u < t);
        &ref_states[idx.min(ref_states.len() - 1)]
    };

    let points: Vec<ResonancePoint> = ratios
        .par_iter()
        .zip(ends.par_iter())
        .map(|(&ratio, &tn)| {
            let h = ratio * eps;
            let err_x = match make_method(id, &prob, h) {
                Ok(m) => match integrate(&m, &prob, tn, usize::MAX) {
                    Ok(traj) => {
                        let fin = traj.final_state();
                        let reference = lookup(tn);
                        (&fin.x - &reference.x).norm() / reference.x.norm()
                    }
                    Err(_) => f64::INFINITY,
                },
                Err(_) => f64::INFINITY,
            };
            ResonancePoint {
                ratio,
                ratio_times_norm_b: ratio * norm_b,
                err_x,
            }
        })
        .collect();
    Ok(points)
}

/// Deterministic states with |x| <= radius and |v| <= radius (Euclidean).
pub fn random_states(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball = |rng: &mut ChaCha8Rng| -> DVector<f64> {
        loop {
            let u = DVector::from_fn(dim, |_, _| rng.random_range(-radius..radius));
            if u.norm() <= radius {
                return u;
            }
        }
    };
    (0..count)
        .map(|_| {
            let x = ball(&mut rng);
            let v = ball(&mut rng);
            State::new(0.0, x, v)
        })
        .collect()
}

/// Median of a slice (ignores non-finite entries).
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[allow(unused)]
fn _error_is_send_sync(e: Error) -> impl Send + Sync {
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearProblem;
    use std::f64::consts::PI;

    #[test]
    fn quadrature_oracle_agrees_with_phi_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
        for _ in 0..100 {
            // log-uniform magnitude over [1e-8, 10]
            let mag = 10f64.powf(rng.random_range(-8.0..1.0));
            let arg = rng.random_range(0.0..2.0 * PI);
            let z = Complex64::from_polar(mag, arg);
            let fast = phi_scalar(2, z);
            let slow = phi_quadrature_oracle(2, z);
            assert!(
                (fast - slow).norm() <= 1e-12 * slow.norm(),
                "z={z}: {fast} vs {slow}, rel {:.3e}",
                (fast - slow).norm() / slow.norm()
            );
        }
    }

    #[test]
    fn eq17_sm_methods_satisfy_conditions() {
        let prob = builtin_problem(0.05).unwrap();
        let samples = [0.5, 1.0, 2.0, PI / 2.0, 3.0];
        for id in [MethodId::Sm1, MethodId::Sm2, MethodId::Sm3] {
            let r = eq17_residual(id, prob.spectrum(), 0.05, 0.05, &samples).unwrap();
            assert!(r.max() <= 1e-12, "{id}: residuals {r:?}");
        }
    }

    #[test]
    fn eq17_m1_satisfies_condition_one_but_not_two() {
        let prob = builtin_problem(0.05).unwrap();
        let r = eq17_residual(MethodId::M1, prob.spectrum(), 0.05, 0.05, &[1.0]).unwrap();
        assert!(r.r1 <= 1e-12, "condition 1 should hold: {:.3e}", r.r1);
        assert!((r.d[0] - Complex64::ONE).norm() <= 1e-12, "d1 = 1");
        assert!(r.r2 >= 1e-3, "condition 2 must fail: {:.3e}", r.r2);
    }

    #[test]
    fn eq17_survives_vanishing_argument() {
        let prob = builtin_problem(0.05).unwrap();
        for id in MethodId::aei_methods() {
            let r = eq17_residual(id, prob.spectrum(), 0.05, 0.05, &[1e-6]).unwrap();
            assert!(
                r.r1.is_finite() && r.r2.is_finite() && r.r3.is_finite(),
                "{id}"
            );
        }
    }

    #[test]
    fn exact_linear_flow_is_symplectic() {
        let lp = LinearProblem::rotation_2d(0.1).unwrap();
        let prob = lp.problem();
        let h = 0.05;
        let map = |x: &DVector<f64>, p: &DVector<f64>| {
            let s = prob.from_canonical(
                &CanonicalState {
                    x: x.clone(),
                    p: p.clone(),
                },
                0.0,
            );
            let next = lp.exact_flow(&s, h);
            let c = prob.to_canonical(&next);
            (c.x, c.p)
        };
        let c0 = prob.to_canonical(&prob.initial_state());
        let r = symplecticity_residual_of_map(map, &c0.x, &c0.p, 1e-5);
        assert!(r <= 1e-8, "exact flow FD residual {r:.3e}");
    }

    #[test]
    fn energy_drift_of_constant_energy_is_zero() {
        let prob = builtin_problem(0.1).unwrap();
        let m = make_method(MethodId::Em1, &prob, 0.1).unwrap();
        let mut traj = integrate(&m, &prob, 1.0, 1).unwrap();
        let e = traj.samples[0].energy;
        for s in &mut traj.samples {
            s.energy = e;
        }
        let d = energy_drift(&traj);
        assert_eq!(d.max_abs, 0.0);
        assert!(d.err.iter().all(|&x| x == 0.0));
        assert_eq!(d.err[0], 0.0, "ERR(0) = 0");
    }

    #[test]
    fn slope_fit_recovers_exact_power() {
        let hs: Vec<f64> = (4..9).map(|i| 2f64.powi(-i)).collect();
        let errs: Vec<f64> = hs.iter().map(|&h| h * h).collect();
        let s = fit_slope(&hs, &errs);
        assert!((s - 2.0).abs() < 1e-12, "slope {s}");
    }

    #[test]
    fn random_states_are_bounded_and_deterministic() {
        let a = random_states(3, 5, 2.0, 42);
        let b = random_states(3, 5, 2.0, 42);
        for (sa, sb) in a.iter().zip(&b) {
            assert_eq!(sa.x, sb.x);
            assert!(sa.x.norm() <= 2.0 && sa.v.norm() <= 2.0);
        }
    }
}
