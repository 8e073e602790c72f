//! Spectral calculus for real skew-symmetric matrices.
//!
//! A real skew-symmetric B has a unitary diagonalization B = P diag(i ω_j) P^H
//! with real ω_j. Every method coefficient used by this crate is an analytic
//! function of the single matrix hΩ = (h/ε) B, so it can be evaluated once on
//! the eigenvalues and reassembled: f(τ hΩ) = Re(P diag(f(i τ (h/ε) ω_j)) P^H).
//! The eigendecomposition is computed once per problem and amortized over all
//! steps; [`PhiTable`] caches the φ_k matrices a method requests repeatedly.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative antisymmetry tolerance accepted by [`SkewMatrix::new`].
pub const SKEW_TOLERANCE: f64 = 1e-14;
/// Unitarity / reconstruction tolerance guaranteed by [`SkewSpectrum`].
pub const SPECTRUM_TOLERANCE: f64 = 1e-12;
/// Max imaginary residue tolerated before the real part of an assembled
/// matrix function is returned.
pub const IMAG_RESIDUE_TOLERANCE: f64 = 1e-11;
/// Below this |z| the φ recurrence cancels (relative error ~eps/|z|^k);
/// switch to the Taylor series. 0.5 keeps the recurrence error under 1e-15
/// while the series truncation stays below 1e-18.
const PHI_TAYLOR_THRESHOLD: f64 = 0.5;
/// Terms of the Taylor series used below the threshold; the remainder is
/// bounded by |z|^16/16! < 1e-18 at the switch point.
const PHI_TAYLOR_TERMS: usize = 16;
/// Reciprocal coefficients with |denominator| below this raise
/// [`Error::NearSingularCoefficient`] instead of producing a huge matrix.
pub const RESONANCE_GUARD: f64 = 1e-8;

/// Entrywise max-abs of a real matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

fn max_abs_c(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// A real skew-symmetric d×d matrix, d >= 2, exactly antisymmetric as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    entries: DMatrix<f64>,
}

impl SkewMatrix {
    /// Validates and stores `entries`. Inputs antisymmetric to within
    /// `SKEW_TOLERANCE` (relative) are accepted and symmetrized so that
    /// `entries[i][j] == -entries[j][i]` holds exactly as stored.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let d = entries.nrows();
        if d != entries.ncols() || d < 2 {
            return Err(Error::DimensionTooSmall {
                dim: d.min(entries.ncols()),
            });
        }
        let scale = max_abs(&entries).max(1.0);
        let sym_residual = max_abs(&(&entries + entries.transpose()));
        if sym_residual > SKEW_TOLERANCE * scale {
            return Err(Error::NotSkewSymmetric {
                residual: sym_residual / scale,
                tolerance: SKEW_TOLERANCE,
            });
        }
        let skew = (&entries - entries.transpose()) * 0.5;
        Ok(Self { entries: skew })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), d, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Self::new(m)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Unitary diagonalization B = P diag(i ω_j) P^H of a [`SkewMatrix`],
/// with ω sorted ascending. ±ω come in pairs and a zero eigenvalue is
/// present whenever d is odd.
#[derive(Debug, Clone)]
pub struct SkewSpectrum {
    p: DMatrix<Complex64>,
    omegas: DVector<f64>,
    source: SkewMatrix,
}

/// Diagonalizes the Hermitian matrix -iB by cyclic Jacobi rotations and maps
/// the (real) eigenvalues ω_j back to the eigenvalues i ω_j of B.
pub fn skew_spectral(b: SkewMatrix) -> Result<SkewSpectrum> {
    let d = b.dim();
    // H = -iB is Hermitian with eigenvalues ω_j.
    let mut h = DMatrix::from_fn(d, d, |i, j| Complex64::new(0.0, -b.entries()[(i, j)]));
    let mut p = DMatrix::<Complex64>::identity(d, d);
    hermitian_jacobi(&mut h, &mut p);

    let mut order: Vec<usize> = (0..d).collect();
    let eigs: Vec<f64> = (0..d).map(|j| h[(j, j)].re).collect();
    order.sort_by(|&a, &b| eigs[a].total_cmp(&eigs[b]));
    let omegas = DVector::from_iterator(d, order.iter().map(|&j| eigs[j]));
    let mut p_sorted = DMatrix::zeros(d, d);
    for (col, &j) in order.iter().enumerate() {
        p_sorted.set_column(col, &p.column(j));
    }

    let spectrum = SkewSpectrum {
        p: p_sorted,
        omegas,
        source: b,
    };
    spectrum.validate()?;
    Ok(spectrum)
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix. Rotations accumulate
/// into `p`; on return `h` is diagonal to machine precision.
fn hermitian_jacobi(h: &mut DMatrix<Complex64>, p: &mut DMatrix<Complex64>) {
    let d = h.nrows();
    let scale = max_abs_c(h).max(f64::MIN_POSITIVE);
    let stop = f64::EPSILON * scale;
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for q in 1..d {
            for pr in 0..q {
                off = off.max(h[(pr, q)].norm());
            }
        }
        if off <= stop {
            return;
        }
        for q in 1..d {
            for pr in 0..q {
                let b = h[(pr, q)];
                let babs = b.norm();
                if babs <= stop * 1e-3 {
                    continue;
                }
                let alpha = b / babs; // phase of the pivot
                let tau = (h[(q, q)].re - h[(pr, pr)].re) / (2.0 * babs);
                // smaller root of t^2 - 2 tau t - 1 = 0
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = [[c, -s], [conj(alpha) s, conj(alpha) c]] diagonalizes the pivot block.
                let u11 = Complex64::new(c, 0.0);
                let u12 = Complex64::new(-s, 0.0);
                let u21 = alpha.conj() * s;
                let u22 = alpha.conj() * c;
                // H <- U^H H (columns pr,q of every row), then rows pr,q.
                for i in 0..d {
                    let hip = h[(i, pr)];
                    let hiq = h[(i, q)];
                    h[(i, pr)] = hip * u11 + hiq * u21;
                    h[(i, q)] = hip * u12 + hiq * u22;
                }
                for j in 0..d {
                    let hpj = h[(pr, j)];
                    let hqj = h[(q, j)];
                    h[(pr, j)] = u11.conj() * hpj + u21.conj() * hqj;
                    h[(q, j)] = u12.conj() * hpj + u22.conj() * hqj;
                }
                for i in 0..d {
                    let pip = p[(i, pr)];
                    let piq = p[(i, q)];
                    p[(i, pr)] = pip * u11 + piq * u21;
                    p[(i, q)] = pip * u12 + piq * u22;
                }
            }
        }
    }
}

impl SkewSpectrum {
    /// Unitary eigenvector matrix P.
    pub fn p(&self) -> &DMatrix<Complex64> {
        &self.p
    }

    /// Eigenvalue imaginary parts ω_j of B, sorted ascending.
    pub fn omegas(&self) -> &DVector<f64> {
        &self.omegas
    }

    pub fn source(&self) -> &SkewMatrix {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.omegas.len()
    }

    /// Spectral norm of the source matrix, max_j |ω_j|.
    pub fn norm(&self) -> f64 {
        self.omegas.iter().fold(0.0_f64, |a, &w| a.max(w.abs()))
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        let unit = max_abs_c(&(self.p.adjoint() * &self.p - DMatrix::identity(d, d)));
        let lambda = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(0.0, self.omegas[i])
            } else {
                Complex64::ZERO
            }
        });
        let rebuilt = &self.p * lambda * self.p.adjoint();
        let target = DMatrix::from_fn(d, d, |i, j| {
            Complex64::new(self.source.entries()[(i, j)], 0.0)
        });
        let recon = max_abs_c(&(rebuilt - target)) / max_abs(self.source.entries()).max(1.0);
        let residue = unit.max(recon);
        if residue > SPECTRUM_TOLERANCE {
            return Err(Error::BrokenSpectrum {
                residue,
                tolerance: SPECTRUM_TOLERANCE,
            });
        }
        Ok(())
    }

    /// Assembles Re(P diag(f(i τ scale ω_j)) P^H), verifying that the
    /// discarded imaginary part is below `IMAG_RESIDUE_TOLERANCE`.
    fn assemble<F>(&self, scale: f64, tau: f64, f: F) -> Result<DMatrix<f64>>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let d = self.dim();
        let mut values = Vec::with_capacity(d);
        for j in 0..d {
            let z = Complex64::new(0.0, tau * scale * self.omegas[j]);
            let v = f(z)?;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("matrix function value at eigenvalue {z}"),
                });
            }
            values.push(v);
        }
        let diag = DMatrix::from_fn(
            d,
            d,
            |i, j| if i == j { values[i] } else { Complex64::ZERO },
        );
        let full = &self.p * diag * self.p.adjoint();
        let residue = full.iter().fold(0.0_f64, |a, v| a.max(v.im.abs()));
        if residue > IMAG_RESIDUE_TOLERANCE {
            return Err(Error::BrokenSpectrum {
                residue,
                tolerance: IMAG_RESIDUE_TOLERANCE,
            });
        }
        Ok(full.map(|v| v.re))
    }
}

/// φ_k(z): φ_0(z) = e^z, φ_k(z) = ∫_0^1 e^{(1-σ)z} σ^{k-1}/(k-1)! dσ.
///
/// Evaluated by the recurrence φ_k(z) = (φ_{k-1}(z) - 1/(k-1)!)/z away from
/// the origin and by a truncated Taylor series φ_k(z) = Σ_j z^j/(j+k)! for
/// |z| < 1e-2, where the recurrence cancels.
pub fn phi_scalar(k: usize, z: Complex64) -> Complex64 {
    if k == 0 {
        return z.exp();
    }
    if z.norm() < PHI_TAYLOR_THRESHOLD {
        let mut term = Complex64::new(inv_factorial(k), 0.0);
        let mut sum = term;
        for j in 1..PHI_TAYLOR_TERMS {
            term = term * z / (k + j) as f64;
            sum += term;
        }
        sum
    } else {
        let mut phi = z.exp();
        for m in 1..=k {
            phi = (phi - inv_factorial(m - 1)) / z;
        }
        phi
    }
}

fn inv_factorial(n: usize) -> f64 {
    let mut f = 1.0_f64;
    for i in 2..=n {
        f *= i as f64;
    }
    1.0 / f
}

/// 1/z with the resonance guard: |z| < `RESONANCE_GUARD` raises
/// [`Error::NearSingularCoefficient`] naming `what`.
pub fn guarded_recip(z: Complex64, what: &'static str) -> Result<Complex64> {
    let mag = z.norm();
    if mag < RESONANCE_GUARD {
        Err(Error::NearSingularCoefficient {
            what,
            magnitude: mag,
            guard: RESONANCE_GUARD,
        })
    } else {
        Ok(z.inv())
    }
}

/// Evaluator for matrix functions of τ·(h/ε)·B with a φ_k cache.
///
/// Emitted matrices are immutable; the cache is internally synchronized so a
/// table can be shared across threads.
pub struct PhiTable<'a> {
    spectrum: &'a SkewSpectrum,
    scale: f64,
    cache: Mutex<HashMap<(u32, u64), DMatrix<f64>>>,
}

impl<'a> PhiTable<'a> {
    /// `scale` is the factor multiplying B, i.e. h/ε.
    pub fn new(spectrum: &'a SkewSpectrum, scale: f64) -> Self {
        Self {
            spectrum,
            scale,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn spectrum(&self) -> &SkewSpectrum {
        self.spectrum
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// φ_k(τ·(h/ε)·B) as a real matrix. Results are cached per (k, τ);
    /// repeated calls return bitwise-identical matrices.
    pub fn phi_matrix(&self, k: usize, tau: f64) -> Result<DMatrix<f64>> {
        let key = (k as u32, tau.to_bits());
        if let Some(m) = self.cache.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let m = self
            .spectrum
            .assemble(self.scale, tau, |z| Ok(phi_scalar(k, z)))?;
        self.cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| m.clone());
        Ok(m)
    }

    /// f(τ·(h/ε)·B) for an arbitrary analytic scalar function. The closure may
    /// reject a near-singular denominator via [`guarded_recip`]; the error
    /// propagates as [`Error::NearSingularCoefficient`].
    pub fn matfun<F>(&self, f: F, tau: f64) -> Result<DMatrix<f64>>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        self.spectrum.assemble(self.scale, tau, f)
    }
}
