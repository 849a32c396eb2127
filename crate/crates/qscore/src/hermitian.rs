//! Validated Hermitian matrices with an eigendecomposition cache, and the
//! scalar functions that drive matrix functional calculus.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::eigen::jacobi_hermitian;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Relative tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Hermitian matrix with eigenvalues (ascending) and eigenvectors computed at
/// construction. Immutable afterwards, so values can be shared freely across
/// threads and the cache never goes stale.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
    eigvals: Vec<f64>,
    eigvecs: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validates Hermiticity (within `HERMITICITY_TOL` relative to the entry
    /// scale), symmetrizes the roundoff, and eigendecomposes.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let scale = 1.0 + m.max_abs();
        let dev = m.hermiticity_deviation();
        if dev > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                max_asymmetry: dev,
                tolerance: HERMITICITY_TOL * scale,
            });
        }
        let mat = m.hermitian_part();
        let (eigvals, eigvecs) = jacobi_hermitian(&mat)?;
        Ok(Self {
            mat,
            eigvals,
            eigvecs,
        })
    }

    /// Assembles U diag(values) U† from known eigenpairs, sorting ascending.
    /// `vectors` columns must be orthonormal; this is the fast path used when
    /// a decomposition is already available (spectral maps, dephasing).
    pub fn from_eigen_pairs(vectors: &ComplexMatrix, values: &[f64]) -> Self {
        let d = vectors.dim();
        assert_eq!(values.len(), d, "one eigenvalue per column");
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .expect("finite eigenvalues")
        });
        let eigvals: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let mut eigvecs = ComplexMatrix::zeros(d);
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..d {
                eigvecs.set(row, new_col, vectors.get(row, old_col));
            }
        }
        let mat = ComplexMatrix::from_fn(d, |i, j| {
            let mut sum = Complex64::ZERO;
            for k in 0..d {
                sum += eigvecs.get(i, k) * eigvals[k] * eigvecs.get(j, k).conj();
            }
            sum
        })
        .hermitian_part();
        Self {
            mat,
            eigvals,
            eigvecs,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// Unitary of eigenvectors; column k pairs with `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigvecs
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigvals[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigvals[self.eigvals.len() - 1]
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Conjugates by the eigenbasis: returns W = U† m U.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let u = &self.eigvecs;
        u.adjoint().mul(m)?.mul(u)
    }

    /// Max-norm residual of the cached decomposition, ‖UΛU† − m‖_max.
    pub fn reconstruction_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut sum = Complex64::ZERO;
                for k in 0..d {
                    sum += self.eigvecs.get(i, k) * self.eigvals[k] * self.eigvecs.get(j, k).conj();
                }
                worst = worst.max((sum - self.mat.get(i, j)).norm());
            }
        }
        worst
    }
}

/// The public eigendecomposition entry point: decomposition happens at
/// construction, so this is an accessor pair.
pub fn eigendecompose(h: &HermitianMatrix) -> (&[f64], &ComplexMatrix) {
    (h.eigenvalues(), h.eigenvectors())
}

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar map with its first two derivatives and the closed interval on
/// which spectra are validated before functional calculus.
#[derive(Clone)]
pub struct ScalarFunction {
    f: ScalarMap,
    fprime: ScalarMap,
    fsecond: ScalarMap,
    domain: (f64, f64),
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("ScalarFunction")
            .field("domain", &self.domain)
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fprime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fsecond: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: (f64, f64),
    ) -> Self {
        assert!(domain.0 < domain.1, "domain must be a proper interval");
        Self {
            f: Arc::new(f),
            fprime: Arc::new(fprime),
            fsecond: Arc::new(fsecond),
            domain,
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn fprime(&self, t: f64) -> f64 {
        (self.fprime)(t)
    }

    pub fn fsecond(&self, t: f64) -> f64 {
        (self.fsecond)(t)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Checks `fprime` against central finite differences of `f`, and
    /// `fsecond` against `fprime`, at `samples` interior points. Relative
    /// tolerance 1e-6. `name` is only used for error reporting.
    pub fn validate_derivatives(&self, name: &str, samples: usize) -> Result<()> {
        let (lo, hi) = self.domain;
        let span = hi - lo;
        // Stay away from endpoints where f may be singular.
        let margin = 0.05 * span;
        let h = 1e-6 * span.max(1.0);
        for k in 0..samples {
            let t = lo + margin + (span - 2.0 * margin) * (k as f64 + 0.5) / samples as f64;
            let fd1 = (self.f(t + h) - self.f(t - h)) / (2.0 * h);
            let rel1 = (fd1 - self.fprime(t)).abs() / (1.0 + self.fprime(t).abs());
            if rel1 > 1e-6 {
                return Err(Error::DerivativeMismatch {
                    name: name.to_string(),
                    at: t,
                    rel_err: rel1,
                });
            }
            let fd2 = (self.fprime(t + h) - self.fprime(t - h)) / (2.0 * h);
            let rel2 = (fd2 - self.fsecond(t)).abs() / (1.0 + self.fsecond(t).abs());
            if rel2 > 1e-6 {
                return Err(Error::DerivativeMismatch {
                    name: name.to_string(),
                    at: t,
                    rel_err: rel2,
                });
            }
        }
        Ok(())
    }
}
