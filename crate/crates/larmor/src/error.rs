//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric: max asymmetry {residual:.3e} exceeds {tolerance:.3e}")]
    NotSkewSymmetric { residual: f64, tolerance: f64 },

    #[error("dimension {dim} too small: skew-symmetric systems need d >= 2")]
    DimensionTooSmall { dim: usize },

    #[error("near-singular coefficient {what}: |denominator| = {magnitude:.3e} < {guard:.3e} (stepsize resonance)")]
    NearSingularCoefficient {
        what: &'static str,
        magnitude: f64,
        guard: f64,
    },

    #[error("spectral assembly left imaginary residue {residue:.3e} > {tolerance:.3e}; spectrum is broken")]
    BrokenSpectrum { residue: f64, tolerance: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("reference solver step size underflow: needs h = {h:.3e} < {floor:.3e}; raise tol or shrink T")]
    StepSizeUnderflow { h: f64, floor: f64 },

    #[error("{method} does not support {what}")]
    Unsupported {
        method: &'static str,
        what: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
