//! Proper scoring rules over density operators.
//!
//! The crate covers four layers:
//!
//! - [`matrix`], [`eigen`], [`hermitian`], [`calculus`]: dense complex
//!   Hermitian algebra with a deterministic Jacobi eigensolver and the
//!   divided-difference machinery behind matrix-function derivatives.
//! - [`states`], [`random`]: validated density operators, measurement bases,
//!   the dephasing channel, entropy and coherence, and seeded random states.
//! - [`scoring`], [`estimation`]: value functionals Tr f(ρ), score operators,
//!   Bregman and Petz divergences, SLD operators, quantum and classical
//!   Fisher information, and the curvature/Fisher minimax risk bound.
//! - [`simulator`]: Monte Carlo n-copy tomography experiments that measure
//!   the forecasting-risk gap between fixed-basis and quantum measurement
//!   strategies.
//!
//! Everything is a pure function over immutable values; reports produced
//! from the same seed are bitwise reproducible across runs and thread
//! counts.

pub mod calculus;
pub mod eigen;
pub mod error;
pub mod estimation;
pub mod hermitian;
pub mod matrix;
pub mod random;
pub mod scoring;
pub mod simulator;
pub mod states;

pub use calculus::{
    apply_function, directional_derivative_trace, divided_difference_first, hessian_quadratic_form,
    DEFAULT_EPS_FLOOR,
};
pub use error::{Error, Result};
pub use hermitian::{eigendecompose, HermitianMatrix, ScalarFunction};
pub use matrix::{hs_inner, ComplexMatrix};
pub use random::{random_mixed, random_pure, random_unitary, SeededRng};
pub use scoring::{
    bregman_divergence, check_operator_convexity, expected_score, petz_f_divergence,
    score_operator, score_report, value_functional, Divergence, Generator, ScoreReport,
};
pub use states::{
    bloch_to_density, coherence, density_to_bloch, dephase, von_neumann_entropy, BlochVector,
    DensityOperator, MeasurementBasis,
};
