//! Problem definitions: ε, the skew field B, potential U and force F = -∇U,
//! initial data, the conserved energy E = ½|v|² + U(x), the canonical
//! transform p = v - B x/(2ε) with Hamiltonian H = ½|p + B x/(2ε)|² + U(x),
//! the built-in charged-particle benchmark and a linear oracle with exact
//! matrix-exponential flow.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{self, skew_spectral, SkewMatrix, SkewSpectrum};

pub type PotentialFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
pub type ForceFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Position/velocity pair at a time t.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
}

impl State {
    pub fn new(t: f64, x: DVector<f64>, v: DVector<f64>) -> Self {
        Self { t, x, v }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.v.iter()).all(|c| c.is_finite())
    }

    /// Max-abs over both components.
    pub fn norm_inf(&self) -> f64 {
        self.x
            .iter()
            .chain(self.v.iter())
            .fold(0.0_f64, |a, &c| a.max(c.abs()))
    }
}

/// Canonical variables (x, p) with p = v - B x/(2ε).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalState {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

/// An instance of x'' = (1/ε) B x' + F(x). Immutable after construction;
/// the force and potential must be pure functions.
pub struct Problem {
    epsilon: f64,
    b: SkewMatrix,
    spectrum: SkewSpectrum,
    potential: Box<PotentialFn>,
    force: Box<ForceFn>,
    force_jacobian: Option<Box<JacobianFn>>,
    x0: DVector<f64>,
    v0: DVector<f64>,
    label: String,
}

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        epsilon: f64,
        b: SkewMatrix,
        potential: Box<PotentialFn>,
        force: Box<ForceFn>,
        force_jacobian: Option<Box<JacobianFn>>,
        x0: DVector<f64>,
        v0: DVector<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        let d = b.dim();
        if x0.len() != d || v0.len() != d {
            return Err(Error::InvalidConfig(format!(
                "initial data dimension {}/{} does not match B ({d})",
                x0.len(),
                v0.len()
            )));
        }
        let spectrum = skew_spectral(b.clone())?;
        let prob = Self {
            epsilon,
            b,
            spectrum,
            potential,
            force,
            force_jacobian,
            x0,
            v0,
            label: label.into(),
        };
        if cfg!(debug_assertions) {
            prob.check_force_consistency()?;
        }
        Ok(prob)
    }

    /// Builds a problem from the potential alone, generating the force by
    /// central differences with step 1e-6·max(1, |x|∞). The differenced
    /// force carries ~1e-10 absolute error, which dominates the high-accuracy
    /// structure checks; meant for tests and quick experiments only.
    pub fn from_potential_fd(
        epsilon: f64,
        b: SkewMatrix,
        potential: Box<PotentialFn>,
        x0: DVector<f64>,
        v0: DVector<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let potential = std::sync::Arc::new(potential);
        let u = potential.clone();
        let force = move |x: &DVector<f64>| -> DVector<f64> {
            let step = 1e-6 * x.amax().max(1.0);
            DVector::from_fn(x.len(), |i, _| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                -(u(&xp) - u(&xm)) / (2.0 * step)
            })
        };
        let u2 = potential.clone();
        Self::new(
            epsilon,
            b,
            Box::new(move |x: &DVector<f64>| u2(x)),
            Box::new(force),
            None,
            x0,
            v0,
            label,
        )
    }

    /// Verifies F = -∇U by central differences at 10 random points in the
    /// unit ball around x0 (fixed seed; absolute tolerance 1e-5).
    pub fn check_force_consistency(&self) -> Result<()> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0cc);
        for _ in 0..10 {
            let mut u = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let n = u.norm();
            if n > 1.0 {
                u /= n;
            }
            let x = &self.x0 + u;
            let f = self.force(&x);
            let step = 1e-6 * x.amax().max(1.0);
            for i in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                let grad_i = (self.potential(&xp) - self.potential(&xm)) / (2.0 * step);
                if (f[i] + grad_i).abs() > 1e-5 {
                    return Err(Error::InvalidConfig(format!(
                        "force is not -grad(U): component {i} differs by {:.3e} at |x|={:.3}",
                        (f[i] + grad_i).abs(),
                        x.norm()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn b(&self) -> &SkewMatrix {
        &self.b
    }

    pub fn spectrum(&self) -> &SkewSpectrum {
        &self.spectrum
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn v0(&self) -> &DVector<f64> {
        &self.v0
    }

    pub fn initial_state(&self) -> State {
        State::new(0.0, self.x0.clone(), self.v0.clone())
    }

    pub fn potential(&self, x: &DVector<f64>) -> f64 {
        (self.potential)(x)
    }

    pub fn force(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.force)(x)
    }

    /// Analytic ∂F/∂x when the problem supplies one (oracles only).
    pub fn force_jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.force_jacobian.as_ref().map(|j| j(x))
    }

    /// E(x, v) = ½|v|² + U(x); exactly conserved along exact solutions.
    pub fn energy(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        0.5 * v.norm_squared() + self.potential(x)
    }

    /// H(x, p) = ½|p + B x/(2ε)|² + U(x).
    pub fn hamiltonian(&self, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
        let v = p + self.b.entries() * x * (0.5 / self.epsilon);
        0.5 * v.norm_squared() + self.potential(x)
    }

    pub fn to_canonical(&self, s: &State) -> CanonicalState {
        let p = &s.v - self.b.entries() * &s.x * (0.5 / self.epsilon);
        CanonicalState { x: s.x.clone(), p }
    }

    pub fn from_canonical(&self, c: &CanonicalState, t: f64) -> State {
        let v = &c.p + self.b.entries() * &c.x * (0.5 / self.epsilon);
        State::new(t, c.x.clone(), v)
    }
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("epsilon", &self.epsilon)
            .field("dim", &self.dim())
            .finish()
    }
}

/// The charged-particle benchmark: d = 3,
/// U(x) = x₁³ - x₂³ + x₁⁴/5 + x₂⁴ + x₃⁴,
/// B rows (0, 0.2, 0.2), (-0.2, 0, 1), (-0.2, -1, 0),
/// x0 = (0.6, 1, -1), v0 = (-1, 0.5, 0.6).
pub fn builtin_problem(epsilon: f64) -> Result<Problem> {
    let b = SkewMatrix::from_rows(&[&[0.0, 0.2, 0.2], &[-0.2, 0.0, 1.0], &[-0.2, -1.0, 0.0]])?;
    // Evaluation order is fixed (Horner per coordinate) so energies are
    // bitwise reproducible across runs.
    let potential = |x: &DVector<f64>| -> f64 {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let u1 = ((x1 / 5.0 + 1.0) * x1) * x1 * x1; // x1^3 + x1^4/5
        let u2 = ((x2 - 1.0) * x2) * x2 * x2; // -x2^3 + x2^4
        let u3 = (x3 * x3) * (x3 * x3); // x3^4
        u1 + u2 + u3
    };
    let force = |x: &DVector<f64>| -> DVector<f64> {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        DVector::from_column_slice(&[
            -(3.0 + 0.8 * x1) * x1 * x1,
            (3.0 - 4.0 * x2) * x2 * x2,
            -4.0 * x3 * x3 * x3,
        ])
    };
    let jacobian = |x: &DVector<f64>| -> DMatrix<f64> {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        DMatrix::from_diagonal(&DVector::from_column_slice(&[
            -(6.0 + 2.4 * x1) * x1,
            (6.0 - 12.0 * x2) * x2,
            -12.0 * x3 * x3,
        ]))
    };
    Problem::new(
        epsilon,
        b,
        Box::new(potential),
        Box::new(force),
        Some(Box::new(jacobian)),
        DVector::from_column_slice(&[0.6, 1.0, -1.0]),
        DVector::from_column_slice(&[-1.0, 0.5, 0.6]),
        "charged-particle benchmark",
    )
}

/// Linear oracle: F(x) = -K x with symmetric positive semidefinite K. The
/// exact flow is the exponential of the block matrix [[0, I], [-K, B/ε]],
/// so every integrator can be checked against a closed-form solution.
pub struct LinearProblem {
    problem: Problem,
    stiffness: DMatrix<f64>,
}

impl LinearProblem {
    pub fn new(
        epsilon: f64,
        stiffness: DMatrix<f64>,
        b: SkewMatrix,
        x0: DVector<f64>,
        v0: DVector<f64>,
    ) -> Result<Self> {
        let d = b.dim();
        if stiffness.nrows() != d || stiffness.ncols() != d {
            return Err(Error::InvalidConfig(format!(
                "stiffness is {}x{}, expected {d}x{d}",
                stiffness.nrows(),
                stiffness.ncols()
            )));
        }
        let sym = spectral::max_abs(&(&stiffness - stiffness.transpose()));
        if sym > 1e-12 * spectral::max_abs(&stiffness).max(1.0) {
            return Err(Error::InvalidConfig(
                "stiffness matrix must be symmetric".into(),
            ));
        }
        let k_pot = stiffness.clone();
        let k_force = stiffness.clone();
        let k_jac = stiffness.clone();
        let problem = Problem::new(
            epsilon,
            b,
            Box::new(move |x: &DVector<f64>| 0.5 * x.dot(&(&k_pot * x))),
            Box::new(move |x: &DVector<f64>| -(&k_force * x)),
            Some(Box::new(move |_: &DVector<f64>| -k_jac.clone())),
            x0,
            v0,
            "linear oracle",
        )?;
        Ok(Self { problem, stiffness })
    }

    /// d = 2 instance with K = I and B the rotation generator [[0,1],[-1,0]].
    pub fn rotation_2d(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            DMatrix::identity(2, 2),
            SkewMatrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]])?,
            DVector::from_column_slice(&[0.6, -0.4]),
            DVector::from_column_slice(&[0.5, 0.8]),
        )
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Exact solution at time t via the matrix exponential of the first-order
    /// block form, starting from the problem's initial data.
    pub fn exact_solution(&self, t: f64) -> State {
        self.exact_flow(&self.problem.initial_state(), t)
    }

    /// Exact flow over a time increment dt from an arbitrary state.
    pub fn exact_flow(&self, from: &State, dt: f64) -> State {
        let d = self.problem.dim();
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            m[(i, d + i)] = 1.0;
        }
        let inv_eps = 1.0 / self.problem.epsilon();
        for i in 0..d {
            for j in 0..d {
                m[(d + i, j)] = -self.stiffness[(i, j)];
                m[(d + i, d + j)] = self.problem.b().entries()[(i, j)] * inv_eps;
            }
        }
        let phi = expm(&(m * dt));
        let mut z = DVector::zeros(2 * d);
        z.rows_mut(0, d).copy_from(&from.x);
        z.rows_mut(d, d).copy_from(&from.v);
        let zt = phi * z;
        State::new(
            from.t + dt,
            zt.rows(0, d).into_owned(),
            zt.rows(d, d).into_owned(),
        )
    }
}

/// Linear oracle with the canonical field: B is the block-diagonal rotation
/// generator (pairs [[0,1],[-1,0]], zero row/column when d is odd) and the
/// initial data alternates ±1 in x with a constant 1/2 velocity.
pub fn linear_problem(epsilon: f64, stiffness: DMatrix<f64>) -> Result<LinearProblem> {
    let d = stiffness.nrows();
    let mut b = DMatrix::zeros(d, d);
    for k in 0..d / 2 {
        b[(2 * k, 2 * k + 1)] = 1.0;
        b[(2 * k + 1, 2 * k)] = -1.0;
    }
    let x0 = DVector::from_fn(d, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let v0 = DVector::from_element(d, 0.5);
    LinearProblem::new(epsilon, stiffness, SkewMatrix::new(b)?, x0, v0)
}

/// Dense matrix exponential by Padé-13 with scaling and squaring
/// (Higham 2005). Adequate for the small block matrices used here.
pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const THETA_13: f64 = 5.371920351148152;
    const B13: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a / 2f64.powi(s as i32);
    let id = DMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u = &a
        * (&a6 * (&a6 * B13[13] + &a4 * B13[11] + &a2 * B13[9])
            + &a6 * B13[7]
            + &a4 * B13[5]
            + &a2 * B13[3]
            + &id * B13[1]);
    let v = &a6 * (&a6 * B13[12] + &a4 * B13[10] + &a2 * B13[8])
        + &a6 * B13[6]
        + &a4 * B13[4]
        + &a2 * B13[2]
        + &id * B13[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("Pade denominator is singular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::max_abs;

    #[test]
    fn builtin_values() {
        let p = builtin_problem(0.05).unwrap();
        let x0 = p.x0().clone();
        assert!((p.potential(&x0) - 1.24192).abs() < 1e-12);
        assert!((p.energy(p.x0(), p.v0()) - 2.04692).abs() < 1e-12);
        let f0 = p.force(&x0);
        let expect = DVector::from_column_slice(&[-1.2528, -1.0, 4.0]);
        assert!((f0 - expect).amax() < 1e-12);
        assert_eq!(p.force(&DVector::zeros(3)), DVector::zeros(3));
    }

    #[test]
    fn energy_matches_hamiltonian_at_random_points() {
        let p = builtin_problem(0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let v = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let e = p.energy(&x, &v);
            let c = p.to_canonical(&State::new(0.0, x.clone(), v.clone()));
            let h = p.hamiltonian(&x, &c.p);
            assert!((e - h).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn canonical_round_trip() {
        let p = builtin_problem(0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = State::new(
                0.3,
                DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)),
                DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0)),
            );
            let back = p.from_canonical(&p.to_canonical(&s), s.t);
            let scale = s.norm_inf().max(1.0);
            assert!((&back.x - &s.x).amax() <= 1e-13 * scale);
            assert!((&back.v - &s.v).amax() <= 1e-13 * scale);
        }
    }

    #[test]
    fn canonical_p_equals_v_minus_scaled_bx() {
        let p = builtin_problem(0.05).unwrap();
        let c = p.to_canonical(&p.initial_state());
        let expect = p.v0() - p.b().entries() * p.x0() * 10.0;
        assert!((c.p - expect).amax() < 1e-14);
        // H at the canonical image of the initial data equals the energy
        let c = p.to_canonical(&p.initial_state());
        assert!((p.hamiltonian(&c.x, &c.p) - 2.04692).abs() < 1e-12);
        // x = 0 reduces H to kinetic energy plus U(0)
        let h0 = p.hamiltonian(
            &DVector::zeros(3),
            &DVector::from_column_slice(&[3.0, 0.0, 4.0]),
        );
        assert!((h0 - 12.5).abs() < 1e-14);
    }

    #[test]
    fn fd_forces_pass_the_consistency_check() {
        let p = Problem::from_potential_fd(
            0.2,
            SkewMatrix::from_rows(&[&[0.0, 0.3], &[-0.3, 0.0]]).unwrap(),
            Box::new(|x: &DVector<f64>| x[0].powi(4) + x[0] * x[1] + x[1].powi(2)),
            DVector::from_column_slice(&[0.5, -0.5]),
            DVector::from_column_slice(&[0.1, 0.2]),
            "fd potential",
        )
        .unwrap();
        let f = p.force(&DVector::from_column_slice(&[1.0, 2.0]));
        // -dU/dx = (-4x1^3 - x2, -x1 - 2x2)
        assert!((f[0] + 6.0).abs() < 1e-7);
        assert!((f[1] + 5.0).abs() < 1e-7);
    }

    #[test]
    fn canonical_linear_problem_has_rotation_blocks() {
        let lp = linear_problem(0.25, DMatrix::identity(5, 5)).unwrap();
        assert_eq!(lp.problem().dim(), 5);
        let b = lp.problem().b().entries();
        assert_eq!(b[(0, 1)], 1.0);
        assert_eq!(b[(3, 2)], -1.0);
        assert_eq!(b[(4, 4)], 0.0);
        // exact flow conserves the quadratic energy
        let e0 = lp.problem().energy(lp.problem().x0(), lp.problem().v0());
        let s = lp.exact_solution(0.8);
        assert!((lp.problem().energy(&s.x, &s.v) - e0).abs() < 1e-12 * e0);
    }

    #[test]
    fn zero_b_or_zero_x_gives_p_equals_v() {
        let pb = Problem::new(
            0.5,
            SkewMatrix::zero(2).unwrap(),
            Box::new(|_| 0.0),
            Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
            None,
            DVector::from_column_slice(&[1.0, 2.0]),
            DVector::from_column_slice(&[3.0, 4.0]),
            "free",
        )
        .unwrap();
        let c = pb.to_canonical(&pb.initial_state());
        assert_eq!(c.p, *pb.v0());
        let p2 = builtin_problem(0.1).unwrap();
        let s = State::new(
            0.0,
            DVector::zeros(3),
            DVector::from_column_slice(&[1.0, -1.0, 2.0]),
        );
        assert_eq!(p2.to_canonical(&s).p, s.v);
    }

    #[test]
    fn rejects_epsilon_outside_unit_interval() {
        assert!(builtin_problem(0.0).is_err());
        assert!(builtin_problem(1.5).is_err());
        assert!(builtin_problem(1.0).is_ok());
    }

    #[test]
    fn expm_of_rotation() {
        let theta = 1.3_f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0]);
        let e = expm(&a);
        let expect =
            DMatrix::from_row_slice(2, 2, &[theta.cos(), theta.sin(), -theta.sin(), theta.cos()]);
        assert!(max_abs(&(e - expect)) < 1e-14);
        // large-norm path exercises scaling and squaring
        let big = DMatrix::from_row_slice(2, 2, &[0.0, 40.0, -40.0, 0.0]);
        let eb = expm(&big);
        let expect_b =
            DMatrix::from_row_slice(2, 2, &[40f64.cos(), 40f64.sin(), -40f64.sin(), 40f64.cos()]);
        assert!(max_abs(&(eb - expect_b)) < 1e-12);
    }

    #[test]
    fn exact_linear_free_motion() {
        // K = 0, B = 0: x(t) = x0 + t v0
        let lp = LinearProblem::new(
            1.0,
            DMatrix::zeros(2, 2),
            SkewMatrix::zero(2).unwrap(),
            DVector::from_column_slice(&[1.0, -2.0]),
            DVector::from_column_slice(&[0.5, 0.25]),
        )
        .unwrap();
        let s = lp.exact_solution(2.0);
        let expect = DVector::from_column_slice(&[2.0, -1.5]);
        assert!((s.x - expect).amax() < 1e-12);
        assert!((s.v - lp.problem().v0()).amax() < 1e-12);
    }

    #[test]
    fn exact_linear_pure_rotation_preserves_speed() {
        // K = 0: v(t) = e^{tB/ε} v0, |v| constant
        let lp = LinearProblem::new(
            0.1,
            DMatrix::zeros(2, 2),
            SkewMatrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap(),
            DVector::from_column_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[3.0, 4.0]),
        )
        .unwrap();
        for &t in &[0.3, 1.0, 2.7] {
            let s = lp.exact_solution(t);
            assert!((s.v.norm() - 5.0).abs() < 1e-11);
        }
    }

    #[test]
    fn exact_linear_flow_conserves_energy() {
        let lp = LinearProblem::rotation_2d(0.1).unwrap();
        let e0 = lp.problem().energy(lp.problem().x0(), lp.problem().v0());
        for i in 0..=20 {
            let s = lp.exact_solution(i as f64 * 0.05);
            let e = lp.problem().energy(&s.x, &s.v);
            assert!(
                (e - e0).abs() <= 1e-12 * e0.abs(),
                "t={}: energy drift {:.3e}",
                s.t,
                (e - e0).abs()
            );
        }
    }
}
