use thiserror::Error;

/// Errors produced by validation and numerical operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("entry count {len} does not form a {dim}x{dim} matrix")]
    BadShape { dim: usize, len: usize },

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_mass:.3e})"
    )]
    NoConvergence { sweeps: usize, off_mass: f64 },

    #[error("not a density operator: {check} violated by {magnitude:.3e}")]
    NotDensity { check: &'static str, magnitude: f64 },

    #[error("eigenvalue {value:.6e} outside domain [{lo}, {hi}]")]
    DomainViolation { value: f64, lo: f64, hi: f64 },

    #[error("basis is not unitary: max deviation {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("invalid POVM: {reason}")]
    InvalidPovm { reason: String },

    #[error("generator '{name}' failed the convexity check: midpoint violation {violation:.3e} at ({a:.4}, {b:.4})")]
    NotConvex {
        name: String,
        violation: f64,
        a: f64,
        b: f64,
    },

    #[error("derivative map of '{name}' disagrees with finite differences at t={at:.6} (relative error {rel_err:.3e})")]
    DerivativeMismatch { name: String, at: f64, rel_err: f64 },

    #[error("unknown generator '{name}' (known: log, quadratic)")]
    UnknownGenerator { name: String },

    #[error("SLD construction is singular: eigenvalue-pair sum {value:.3e} below floor at indices ({i}, {j})")]
    SldSingular { value: f64, i: usize, j: usize },

    #[error("QFI matrix is ill-conditioned (condition number {cond:.3e}); near-null direction {direction:?}")]
    SingularQfi { cond: f64, direction: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
