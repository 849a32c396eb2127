//! Density operators, measurement bases, Bloch-sphere utilities, the
//! dephasing channel, and entropy/coherence measures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::matrix::{outer, ComplexMatrix};

/// How negative an eigenvalue may be before a state is rejected rather than
/// clipped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-10;

/// Validated quantum state: Hermitian, positive semidefinite, unit trace.
/// Eigenvalue dust in [−1e-10, 0) is clipped to zero and the spectrum
/// renormalized, so downstream logarithms never see negative weights.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    herm: HermitianMatrix,
}

impl DensityOperator {
    /// Validates and normalizes an arbitrary matrix into a state.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = HermitianMatrix::new(m)?;
        Self::from_hermitian(herm)
    }

    pub fn from_hermitian(herm: HermitianMatrix) -> Result<Self> {
        let min = herm.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotDensity {
                check: "positivity",
                magnitude: min,
            });
        }
        let trace = herm.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity {
                check: "unit trace",
                magnitude: trace - 1.0,
            });
        }
        // Clip negative dust, renormalize the spectrum exactly to one.
        let clipped: Vec<f64> = herm.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        let normalized: Vec<f64> = clipped.iter().map(|&l| l / sum).collect();
        Ok(Self {
            herm: HermitianMatrix::from_eigen_pairs(herm.eigenvectors(), &normalized),
        })
    }

    /// Diagonal state Σ p_k |b_k⟩⟨b_k| in the given basis. Probabilities may
    /// carry dust down to −1e-12, which is clipped before renormalization.
    pub fn from_basis_probs(basis: &MeasurementBasis, probs: &[f64]) -> Result<Self> {
        let d = basis.dim();
        if probs.len() != d {
            return Err(Error::DimensionMismatch {
                left: probs.len(),
                right: d,
            });
        }
        let mut clipped = Vec::with_capacity(d);
        for &p in probs {
            if p < -1e-12 {
                return Err(Error::NotDensity {
                    check: "positivity",
                    magnitude: p,
                });
            }
            clipped.push(p.max(0.0));
        }
        let sum: f64 = clipped.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::NotDensity {
                check: "unit trace",
                magnitude: sum - 1.0,
            });
        }
        let normalized: Vec<f64> = clipped.iter().map(|&p| p / sum).collect();
        Ok(Self {
            herm: HermitianMatrix::from_eigen_pairs(basis.matrix(), &normalized),
        })
    }

    /// Projector onto a ket (normalized internally).
    pub fn pure_from_ket(ket: &[Complex64]) -> Result<Self> {
        let norm = ket.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidParameter("zero ket".into()));
        }
        let normalized: Vec<Complex64> = ket.iter().map(|c| c / norm).collect();
        Self::new(outer(&normalized, &normalized))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let basis = MeasurementBasis::computational(dim);
        Self::from_basis_probs(&basis, &vec![1.0 / dim as f64; dim]).expect("uniform spectrum")
    }

    /// |+⟩⟨+| on a qubit.
    pub fn plus_state() -> Self {
        Self::new(ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap())
            .expect("plus projector is a valid state")
    }

    /// Maximally coherent pure state in dimension d: the uniform
    /// superposition (first Fourier column), spread evenly over the
    /// computational basis.
    pub fn fourier_state(dim: usize) -> Self {
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::pure_from_ket(&vec![amp; dim]).expect("uniform ket")
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.herm.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.herm
    }

    /// Ascending, clipped to [0, 1], summing to one.
    pub fn eigenvalues(&self) -> &[f64] {
        self.herm.eigenvalues()
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        self.herm.eigenvectors()
    }

    /// The state's own eigenbasis as a measurement basis.
    pub fn eigenbasis(&self) -> MeasurementBasis {
        MeasurementBasis::new(self.herm.eigenvectors().clone(), "eigen")
            .expect("cached eigenvectors are unitary")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.herm.min_eigenvalue()
    }

    pub fn trace(&self) -> f64 {
        self.herm.trace()
    }

    pub fn purity(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l * l).sum()
    }

    /// Trace distance ‖ρ − σ‖₁ (sum of absolute eigenvalues of the
    /// difference).
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.matrix().sub(other.matrix())?;
        let h = HermitianMatrix::new(diff)?;
        Ok(h.eigenvalues().iter().map(|l| l.abs()).sum())
    }

    /// Convex mixture p·self + (1−p)·other.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        let m = self
            .matrix()
            .scale_re(p)
            .add(&other.matrix().scale_re(1.0 - p))?;
        Self::new(m)
    }

    /// UρU† for unitary U.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.mul(self.matrix())?.mul(&u.adjoint())?)
    }
}

/// Orthonormal measurement basis: unitary matrix whose columns are the basis
/// vectors, plus a label for reports.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    mat: ComplexMatrix,
    label: String,
}

impl MeasurementBasis {
    pub fn new(mat: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let dev = mat.unitarity_deviation();
        if dev > 1e-10 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self {
            mat,
            label: label.into(),
        })
    }

    /// Computational (Z) basis.
    pub fn computational(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim), "Z").unwrap()
    }

    /// Hadamard (X) basis {|+⟩, |−⟩} on a qubit.
    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(ComplexMatrix::from_real(2, &[s, s, s, -s]).unwrap(), "X").unwrap()
    }

    /// Circular (Y) basis on a qubit: eigenvectors of σ_y.
    pub fn circular() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Self::new(
            ComplexMatrix::from_entries(2, vec![c(s, 0.0), c(s, 0.0), c(0.0, s), c(0.0, -s)])
                .unwrap(),
            "Y",
        )
        .unwrap()
    }

    /// Discrete-Fourier basis, column k has entries exp(2πi jk/d)/√d.
    pub fn fourier(dim: usize) -> Self {
        let norm = 1.0 / (dim as f64).sqrt();
        let mat = ComplexMatrix::from_fn(dim, |j, k| {
            let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
            Complex64::new(angle.cos() * norm, angle.sin() * norm)
        });
        Self::new(mat, "fourier").unwrap()
    }

    /// A named standard basis: "Z", "X", "Y", or "fourier".
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "Z" | "z" | "computational" => Ok(Self::computational(dim)),
            "X" | "x" => {
                if dim == 2 {
                    Ok(Self::hadamard())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "basis X is qubit-only, got dim {dim}"
                    )))
                }
            }
            "Y" | "y" => {
                if dim == 2 {
                    Ok(Self::circular())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "basis Y is qubit-only, got dim {dim}"
                    )))
                }
            }
            "fourier" | "F" => Ok(Self::fourier(dim)),
            other => Err(Error::InvalidParameter(format!("unknown basis '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.mat.column(k)
    }

    /// Rank-one projector |b_k⟩⟨b_k|.
    pub fn projector(&self, k: usize) -> ComplexMatrix {
        let col = self.vector(k);
        outer(&col, &col)
    }
}

/// Dephasing channel Δ(ρ) = Σ_k |b_k⟩⟨b_k| ρ |b_k⟩⟨b_k|: keeps the diagonal
/// of ρ in the given basis and kills every off-diagonal element.
pub fn dephase(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<DensityOperator> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: basis.dim(),
        });
    }
    let probs = basis_diagonal(rho, basis)?;
    DensityOperator::from_basis_probs(basis, &probs)
}

/// The diagonal ⟨b_k|ρ|b_k⟩ of a state in a basis.
pub fn basis_diagonal(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: basis.dim(),
        });
    }
    let d = rho.dim();
    let mut probs = Vec::with_capacity(d);
    for k in 0..d {
        let col = basis.vector(k);
        let mut sum = Complex64::ZERO;
        for i in 0..d {
            for j in 0..d {
                sum += col[i].conj() * rho.matrix().get(i, j) * col[j];
            }
        }
        probs.push(sum.re);
    }
    Ok(probs)
}

/// Von Neumann entropy S(ρ) = −Σ λ log λ in nats, with 0·log 0 = 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let s: f64 = rho
        .eigenvalues()
        .iter()
        .map(|&l| if l > 1e-14 { -l * l.ln() } else { 0.0 })
        .sum();
    s.max(0.0)
}

/// Relative entropy of coherence C(ρ) = S(Δ(ρ)) − S(ρ) in the given basis.
pub fn coherence(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<f64> {
    let dephased = dephase(rho, basis)?;
    Ok((von_neumann_entropy(&dephased) - von_neumann_entropy(rho)).max(0.0))
}

/// Bloch vector (r_x, r_y, r_z) of a qubit state, ‖r‖ ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if v.norm() > 1.0 + 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "Bloch vector norm {} exceeds 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    let c = Complex64::new;
    ComplexMatrix::from_entries(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

/// ρ = (I + r·σ)/2.
pub fn bloch_to_density(r: &BlochVector) -> Result<DensityOperator> {
    let m = ComplexMatrix::identity(2)
        .add(&pauli_x().scale_re(r.x))?
        .add(&pauli_y().scale_re(r.y))?
        .add(&pauli_z().scale_re(r.z))?
        .scale_re(0.5);
    DensityOperator::new(m)
}

/// r_i = Tr(ρ σ_i); qubit states only.
pub fn density_to_bloch(rho: &DensityOperator) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 2,
        });
    }
    let m = rho.matrix();
    let x = 2.0 * m.get(0, 1).re;
    let y = -2.0 * m.get(0, 1).im;
    let z = (m.get(0, 0) - m.get(1, 1)).re;
    BlochVector::new(x, y, z)
}
