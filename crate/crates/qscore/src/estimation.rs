//! Parametrized state families, symmetric logarithmic derivatives, quantum
//! and classical Fisher information, and the curvature/Fisher minimax-risk
//! bound.
//!
//! Rank-deficient states are floored: eigenvalues below `eps_floor` are
//! raised to the floor and the spectrum renormalized before SLD denominators
//! are formed, so pure-state quantities are regularized limits (the report
//! carries a `floored` flag). Family tangents are taken as-is, which keeps
//! e.g. the pure-qubit rotation QFI exactly 1 at every floor value.

use std::sync::Arc;

use crate::calculus;
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::matrix::ComplexMatrix;
use crate::scoring::Generator;
use crate::states::{dephase, DensityOperator, MeasurementBasis};

/// Central-difference step for numerically differentiated families.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Condition-number cutoff beyond which the QFI is treated as singular.
pub const QFI_CONDITION_LIMIT: f64 = 1e12;

/// Small dense real symmetric matrix (parameter-space objects: QFI,
/// Hessians). Eigenwork is routed through the complex Jacobi solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_real(self.dim, &self.data).expect("square data")
    }

    /// Eigendecomposition (ascending) via the Hermitian solver.
    pub fn sym_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        crate::eigen::jacobi_hermitian(&self.to_complex())
    }

    /// Σ_ij a_ij b_ji, the trace of the product.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                sum += self.get(i, j) * other.get(j, i);
            }
        }
        sum
    }

    /// Inverse through the spectral decomposition; errs with the near-null
    /// direction when the condition number exceeds `QFI_CONDITION_LIMIT`.
    pub fn inverse_spd(&self) -> Result<Self> {
        let (vals, vecs) = self.sym_eigen()?;
        let max = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let min = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
        if !(min > 0.0) || max / min > QFI_CONDITION_LIMIT {
            let direction: Vec<f64> = (0..self.dim).map(|i| vecs.get(i, 0).re).collect();
            return Err(Error::SingularQfi {
                cond: if min > 0.0 { max / min } else { f64::INFINITY },
                direction,
            });
        }
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut sum = 0.0;
                for k in 0..self.dim {
                    sum += vecs.get(i, k).re * vecs.get(j, k).re / vals[k];
                }
                out.set(i, j, sum);
            }
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.sym_eigen()?.0[0])
    }
}

type StateMap = Arc<dyn Fn(&[f64]) -> Result<DensityOperator> + Send + Sync>;
type TangentMap = Arc<dyn Fn(&[f64]) -> Result<Vec<HermitianMatrix>> + Send + Sync>;

/// Smooth map θ ↦ ρ_θ with tangent operators ∂_i ρ_θ, either analytic or by
/// central finite differences of the state map.
#[derive(Clone)]
pub struct ParametrizedFamily {
    dim: usize,
    n_params: usize,
    label: String,
    state: StateMap,
    tangents: Option<TangentMap>,
    fd_step: f64,
}

impl std::fmt::Debug for ParametrizedFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametrizedFamily")
            .field("dim", &self.dim)
            .field("n_params", &self.n_params)
            .field("label", &self.label)
            .finish()
    }
}

impl ParametrizedFamily {
    pub fn new(
        dim: usize,
        n_params: usize,
        label: impl Into<String>,
        state: impl Fn(&[f64]) -> Result<DensityOperator> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            n_params,
            label: label.into(),
            state: Arc::new(state),
            tangents: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_tangents(
        mut self,
        tangents: impl Fn(&[f64]) -> Result<Vec<HermitianMatrix>> + Send + Sync + 'static,
    ) -> Self {
        self.tangents = Some(Arc::new(tangents));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_tangents(&self) -> bool {
        self.tangents.is_some()
    }

    pub fn state_at(&self, theta: &[f64]) -> Result<DensityOperator> {
        self.check_theta(theta)?;
        (self.state)(theta)
    }

    /// Tangents ∂_i ρ_θ: analytic when provided, otherwise central finite
    /// differences of the state map with step `fd_step`. Tangents of a
    /// trace-one family are traceless; debug builds check this to 1e-8.
    pub fn tangents_at(&self, theta: &[f64]) -> Result<Vec<HermitianMatrix>> {
        self.check_theta(theta)?;
        let tangents = match &self.tangents {
            Some(t) => t(theta)?,
            None => self.fd_tangents(theta)?,
        };
        debug_assert!(
            tangents.iter().all(|t| t.trace().abs() < 1e-8),
            "family '{}' produced a non-traceless tangent",
            self.label
        );
        Ok(tangents)
    }

    /// Finite-difference tangents regardless of analytic availability;
    /// used to cross-check analytic tangent maps.
    pub fn fd_tangents(&self, theta: &[f64]) -> Result<Vec<HermitianMatrix>> {
        let h = self.fd_step;
        let mut out = Vec::with_capacity(self.n_params);
        for i in 0..self.n_params {
            let mut up = theta.to_vec();
            let mut down = theta.to_vec();
            up[i] += h;
            down[i] -= h;
            let plus = (self.state)(&up)?;
            let minus = (self.state)(&down)?;
            let diff = plus.matrix().sub(minus.matrix())?.scale_re(1.0 / (2.0 * h));
            out.push(HermitianMatrix::new(diff)?);
        }
        Ok(out)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::InvalidParameter(format!(
                "family '{}' expects {} parameters, got {}",
                self.label,
                self.n_params,
                theta.len()
            )));
        }
        Ok(())
    }

    /// The family pushed through the dephasing channel; dephasing is linear,
    /// so tangents dephase entrywise.
    pub fn dephased(&self, basis: &MeasurementBasis) -> ParametrizedFamily {
        let b = basis.clone();
        let state = self.state.clone();
        let inner = self.clone();
        let b2 = basis.clone();
        ParametrizedFamily {
            dim: self.dim,
            n_params: self.n_params,
            label: format!("{}-dephased-{}", self.label, basis.label()),
            state: Arc::new(move |theta: &[f64]| dephase(&state(theta)?, &b)),
            tangents: Some(Arc::new(move |theta: &[f64]| {
                let tans = inner.tangents_at(theta)?;
                tans.iter()
                    .map(|t| {
                        let w = b2.matrix().adjoint().mul(t.matrix())?.mul(b2.matrix())?;
                        let mut diag = ComplexMatrix::zeros(w.dim());
                        for k in 0..w.dim() {
                            diag.set(k, k, w.get(k, k));
                        }
                        HermitianMatrix::new(b2.matrix().mul(&diag)?.mul(&b2.matrix().adjoint())?)
                    })
                    .collect()
            })),
            fd_step: self.fd_step,
        }
    }

    /// Equatorial rotation of |+⟩⟨+|: ρ_θ = e^{-iθσ_z/2} |+⟩⟨+| e^{iθσ_z/2},
    /// the Bloch path (cos θ, sin θ, 0). Computational-basis outcome
    /// probabilities are θ-independent, the SLD at θ = 0 is σ_y, and the QFI
    /// is 1.
    pub fn bloch_rotation() -> Self {
        Self::bloch_circle(1.0)
    }

    /// Bloch circle of radius r: ρ_θ = (I + r cos θ σ_x + r sin θ σ_y)/2.
    pub fn bloch_circle(radius: f64) -> Self {
        assert!((0.0..=1.0).contains(&radius));
        let label = if radius == 1.0 {
            "bloch-rotation".to_string()
        } else {
            format!("bloch-circle({radius})")
        };
        Self::new(2, 1, label, move |theta: &[f64]| {
            let r = crate::states::BlochVector::new(
                radius * theta[0].cos(),
                radius * theta[0].sin(),
                0.0,
            )?;
            crate::states::bloch_to_density(&r)
        })
        .with_tangents(move |theta: &[f64]| {
            let t = crate::states::pauli_x()
                .scale_re(-radius * theta[0].sin() * 0.5)
                .add(&crate::states::pauli_y().scale_re(radius * theta[0].cos() * 0.5))?;
            Ok(vec![HermitianMatrix::new(t)?])
        })
    }

    /// Diagonal qubit family diag(θ, 1−θ) with tangent σ_z.
    pub fn diagonal_qubit() -> Self {
        Self::new(2, 1, "diagonal", |theta: &[f64]| {
            let p = theta[0];
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "diagonal family needs θ in [0,1], got {p}"
                )));
            }
            let z = MeasurementBasis::computational(2);
            DensityOperator::from_basis_probs(&z, &[p, 1.0 - p])
        })
        .with_tangents(|_theta: &[f64]| Ok(vec![HermitianMatrix::new(crate::states::pauli_z())?]))
    }

    /// Full qubit Bloch family ρ_θ = (I + θ·σ)/2, three parameters.
    pub fn qubit_bloch_full() -> Self {
        Self::new(2, 3, "bloch-full", |theta: &[f64]| {
            let r = crate::states::BlochVector::new(theta[0], theta[1], theta[2])?;
            crate::states::bloch_to_density(&r)
        })
        .with_tangents(|_theta: &[f64]| {
            Ok(vec![
                HermitianMatrix::new(crate::states::pauli_x().scale_re(0.5))?,
                HermitianMatrix::new(crate::states::pauli_y().scale_re(0.5))?,
                HermitianMatrix::new(crate::states::pauli_z().scale_re(0.5))?,
            ])
        })
    }

    /// Classical spectrum family in dimension d: the first d−1 probabilities
    /// are free parameters, the last is 1 − Σθ. Tangents are diag(e_i − e_d).
    pub fn spectrum(dim: usize) -> Self {
        assert!(dim >= 2);
        let m = dim - 1;
        Self::new(
            dim,
            m,
            format!("spectrum({dim})"),
            move |theta: &[f64]| {
                let mut probs = theta.to_vec();
                let last: f64 = 1.0 - theta.iter().sum::<f64>();
                probs.push(last);
                if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::InvalidParameter(format!(
                        "spectrum point {probs:?} outside the simplex"
                    )));
                }
                let z = MeasurementBasis::computational(dim);
                DensityOperator::from_basis_probs(&z, &probs)
            },
        )
        .with_tangents(move |_theta: &[f64]| {
            (0..m)
                .map(|i| {
                    let mut mtx = ComplexMatrix::zeros(m + 1);
                    mtx.set(i, i, num_complex::Complex64::ONE);
                    mtx.set(m, m, -num_complex::Complex64::ONE);
                    HermitianMatrix::new(mtx)
                })
                .collect()
        })
    }

    /// Reparametrized family θ′ ↦ ρ(Aθ′): tangents pick up the Jacobian A.
    pub fn linear_reparam(&self, a: &RealMatrix) -> ParametrizedFamily {
        assert_eq!(a.dim(), self.n_params);
        let a1 = a.clone();
        let a2 = a.clone();
        let state = self.state.clone();
        let inner = self.clone();
        let m = self.n_params;
        ParametrizedFamily {
            dim: self.dim,
            n_params: m,
            label: format!("{}-reparam", self.label),
            state: Arc::new(move |theta: &[f64]| {
                let mapped = apply_linear(&a1, theta);
                state(&mapped)
            }),
            tangents: Some(Arc::new(move |theta: &[f64]| {
                let mapped = apply_linear(&a2, theta);
                let base = inner.tangents_at(&mapped)?;
                // ∂/∂θ′_i = Σ_j A_ji ∂_j.
                (0..m)
                    .map(|i| {
                        let mut sum = ComplexMatrix::zeros(base[0].dim());
                        for (j, t) in base.iter().enumerate() {
                            sum = sum.add(&t.matrix().scale_re(a2.get(j, i)))?;
                        }
                        HermitianMatrix::new(sum)
                    })
                    .collect()
            })),
            fd_step: self.fd_step,
        }
    }
}

fn apply_linear(a: &RealMatrix, theta: &[f64]) -> Vec<f64> {
    (0..a.dim())
        .map(|i| (0..a.dim()).map(|j| a.get(i, j) * theta[j]).sum())
        .collect()
}

/// Positive operator-valued measure: PSD effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<HermitianMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianMatrix>, labels: Vec<String>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidPovm {
                reason: "no effects".into(),
            });
        }
        if labels.len() != effects.len() {
            return Err(Error::InvalidPovm {
                reason: "label count does not match effect count".into(),
            });
        }
        let d = effects[0].dim();
        let mut sum = ComplexMatrix::zeros(d);
        for e in &effects {
            if e.dim() != d {
                return Err(Error::InvalidPovm {
                    reason: "effects have mixed dimensions".into(),
                });
            }
            if e.min_eigenvalue() < -1e-10 {
                return Err(Error::InvalidPovm {
                    reason: format!("effect has eigenvalue {}", e.min_eigenvalue()),
                });
            }
            sum = sum.add(e.matrix())?;
        }
        let dev = sum.sub(&ComplexMatrix::identity(d))?.max_abs();
        if dev > 1e-10 {
            return Err(Error::InvalidPovm {
                reason: format!("effects sum deviates from identity by {dev:.3e}"),
            });
        }
        Ok(Self { effects, labels })
    }

    /// Rank-one projective POVM from an orthonormal basis.
    pub fn from_basis(basis: &MeasurementBasis) -> Self {
        let d = basis.dim();
        let effects: Vec<HermitianMatrix> = (0..d)
            .map(|k| {
                let mut vals = vec![0.0; d];
                vals[k] = 1.0;
                HermitianMatrix::from_eigen_pairs(basis.matrix(), &vals)
            })
            .collect();
        let labels = (0..d).map(|k| format!("{}:{k}", basis.label())).collect();
        Self { effects, labels }
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Born-rule outcome distribution p_k = Tr(E_k ρ), clipped at −1e-12 and
/// renormalized.
pub fn povm_probabilities(rho: &DensityOperator, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: povm.dim(),
        });
    }
    let mut probs = Vec::with_capacity(povm.len());
    for e in povm.effects() {
        let p = crate::matrix::hs_inner(e.matrix(), rho.matrix())?.re;
        if p < -1e-12 {
            return Err(Error::InvalidPovm {
                reason: format!("negative outcome probability {p:.3e}"),
            });
        }
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidPovm {
            reason: format!("probabilities sum to {total}"),
        });
    }
    Ok(probs.iter().map(|p| p / total).collect())
}

/// SLD operators and the floored state they were built against.
#[derive(Debug, Clone)]
pub struct SldSet {
    /// The state with eigenvalues floored at `eps_floor` and renormalized.
    pub state: DensityOperator,
    pub operators: Vec<HermitianMatrix>,
    /// Whether flooring actually changed the spectrum.
    pub floored: bool,
}

/// Fisher information bundle at one parameter point.
#[derive(Debug, Clone)]
pub struct FisherReport {
    pub qfi: RealMatrix,
    pub cfi: Option<RealMatrix>,
    pub sld: Vec<HermitianMatrix>,
    pub floored: bool,
}

/// Floors a state's spectrum at `eps_floor` and renormalizes.
pub fn floor_state(rho: &DensityOperator, eps_floor: f64) -> (DensityOperator, bool) {
    let floored = rho.min_eigenvalue() < eps_floor;
    if !floored {
        return (rho.clone(), false);
    }
    let vals: Vec<f64> = rho
        .eigenvalues()
        .iter()
        .map(|&l| l.max(eps_floor))
        .collect();
    let sum: f64 = vals.iter().sum();
    let normalized: Vec<f64> = vals.iter().map(|&l| l / sum).collect();
    let herm = HermitianMatrix::from_eigen_pairs(rho.eigenvectors(), &normalized);
    (
        DensityOperator::from_hermitian(herm).expect("floored spectrum is a valid state"),
        true,
    )
}

/// Symmetric logarithmic derivatives at θ: Hermitian L_i solving
/// ∂_i ρ = (ρ L_i + L_i ρ)/2, built in the eigenbasis of the floored state
/// as (L_i)_jk = 2 (∂_i ρ)_jk / (λ_j + λ_k).
pub fn sld_operators(fam: &ParametrizedFamily, theta: &[f64], eps_floor: f64) -> Result<SldSet> {
    let rho = fam.state_at(theta)?;
    let tangents = fam.tangents_at(theta)?;
    let (state, floored) = floor_state(&rho, eps_floor);
    let lam = state.eigenvalues();
    let d = state.dim();
    let mut operators = Vec::with_capacity(tangents.len());
    for t in &tangents {
        let w = state.hermitian().to_eigenbasis(t.matrix())?;
        let mut l_eig = ComplexMatrix::zeros(d);
        // Mirror the upper triangle: the kernel is manifestly Hermitian, and
        // tiny floored denominators would otherwise amplify roundoff in W
        // into a visible asymmetry.
        for j in 0..d {
            for k in j..d {
                let denom = lam[j] + lam[k];
                if denom < eps_floor {
                    return Err(Error::SldSingular {
                        value: denom,
                        i: j,
                        j: k,
                    });
                }
                let v = w.get(j, k).scale(2.0 / denom);
                if j == k {
                    l_eig.set(j, j, num_complex::Complex64::new(v.re, 0.0));
                } else {
                    l_eig.set(j, k, v);
                    l_eig.set(k, j, v.conj());
                }
            }
        }
        let u = state.eigenvectors();
        let l = u.mul(&l_eig)?.mul(&u.adjoint())?;
        operators.push(HermitianMatrix::new(l)?);
    }
    Ok(SldSet {
        state,
        operators,
        floored,
    })
}

/// Quantum Fisher Information matrix, symmetrized:
/// ℐ_ij = Re Tr(ρ (L_i L_j + L_j L_i)/2).
pub fn qfi_matrix(fam: &ParametrizedFamily, theta: &[f64], eps_floor: f64) -> Result<RealMatrix> {
    let sld = sld_operators(fam, theta, eps_floor)?;
    qfi_from_sld(&sld)
}

pub fn qfi_from_sld(sld: &SldSet) -> Result<RealMatrix> {
    let m = sld.operators.len();
    let mut out = RealMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            let li_lj = sld.operators[i].matrix().mul(sld.operators[j].matrix())?;
            let lj_li = sld.operators[j].matrix().mul(sld.operators[i].matrix())?;
            let anti = li_lj.add(&lj_li)?.scale_re(0.5);
            let v = sld.state.matrix().mul(&anti)?.trace().re;
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    Ok(out)
}

/// Classical Fisher information of a POVM at θ:
/// ℐ_ij = Σ_k ∂_i p_k ∂_j p_k / p_k. Outcomes with p_k < 1e-12 are skipped
/// when their gradient also vanishes (|∂p_k| < 1e-9); a vanishing
/// probability with a live gradient marks the touched diagonal entries +∞.
pub fn classical_fisher(
    fam: &ParametrizedFamily,
    theta: &[f64],
    povm: &Povm,
    _eps_floor: f64,
) -> Result<RealMatrix> {
    let rho = fam.state_at(theta)?;
    let tangents = fam.tangents_at(theta)?;
    let probs = povm_probabilities(&rho, povm)?;
    let m = tangents.len();
    let mut out = RealMatrix::zeros(m);
    for (k, e) in povm.effects().iter().enumerate() {
        let grads: Vec<f64> = tangents
            .iter()
            .map(|t| crate::matrix::hs_inner(e.matrix(), t.matrix()).map(|v| v.re))
            .collect::<Result<_>>()?;
        let grad_max = grads.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if probs[k] < 1e-12 {
            if grad_max < 1e-9 {
                continue;
            }
            for (i, &gi) in grads.iter().enumerate() {
                if gi.abs() >= 1e-9 {
                    out.set(i, i, f64::INFINITY);
                }
            }
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                let v = out.get(i, j) + grads[i] * grads[j] / probs[k];
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Full Fisher bundle; the classical matrix is included when a POVM is given.
pub fn fisher_report(
    fam: &ParametrizedFamily,
    theta: &[f64],
    povm: Option<&Povm>,
    eps_floor: f64,
) -> Result<FisherReport> {
    let sld = sld_operators(fam, theta, eps_floor)?;
    let qfi = qfi_from_sld(&sld)?;
    let cfi = match povm {
        Some(p) => Some(classical_fisher(fam, theta, p, eps_floor)?),
        None => None,
    };
    Ok(FisherReport {
        qfi,
        cfi,
        sld: sld.operators,
        floored: sld.floored,
    })
}

/// Minimax risk bound for n copies at θ.
#[derive(Debug, Clone)]
pub struct CrmcBound {
    /// (1/2n)·Tr(Hess_θ V · ℐ⁻¹) with the exact divided-difference Hessian
    /// kernel; the canonical value.
    pub value: f64,
    /// Variant with the kernel replaced by f″ at eigenvalue midpoints; the
    /// two agree when tangents commute with the state.
    pub f2diag_value: f64,
    pub hessian: RealMatrix,
    pub qfi: RealMatrix,
    pub floored: bool,
    pub n: u64,
}

/// Which Hessian kernel the bound should report as its headline value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Hessian,
    F2Diag,
}

impl CrmcBound {
    pub fn value_for(&self, mode: BoundMode) -> f64 {
        match mode {
            BoundMode::Hessian => self.value,
            BoundMode::F2Diag => self.f2diag_value,
        }
    }
}

/// Cramér-Rao-type bound coupling scoring curvature to the QFI:
/// (1/2n)·Tr(Hess_θ V_Q · ℐ_SLD⁻¹), where Hess_ij is the second derivative
/// of Tr f(ρ_θ) along tangent pairs (divided-difference kernel of f′).
pub fn crmc_bound(
    fam: &ParametrizedFamily,
    theta: &[f64],
    g: &Generator,
    n: u64,
    eps_floor: f64,
) -> Result<CrmcBound> {
    if n == 0 {
        return Err(Error::InvalidParameter("copy count n must be ≥ 1".into()));
    }
    let sld = sld_operators(fam, theta, eps_floor)?;
    let tangents = fam.tangents_at(theta)?;
    let qfi = qfi_from_sld(&sld)?;
    let qfi_inv = qfi.inverse_spd()?;
    let m = tangents.len();
    let floor = g.floor(eps_floor);

    let mut hessian = RealMatrix::zeros(m);
    let mut hessian_f2 = RealMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            let v = calculus::hessian_bilinear_form(
                sld.state.hermitian(),
                g.scalar(),
                &tangents[i],
                &tangents[j],
                floor,
            )?;
            hessian.set(i, j, v);
            hessian.set(j, i, v);
            let v2 = f2diag_bilinear(&sld.state, g, &tangents[i], &tangents[j], eps_floor)?;
            hessian_f2.set(i, j, v2);
            hessian_f2.set(j, i, v2);
        }
    }

    let scale = 1.0 / (2.0 * n as f64);
    Ok(CrmcBound {
        value: scale * hessian.trace_product(&qfi_inv),
        f2diag_value: scale * hessian_f2.trace_product(&qfi_inv),
        hessian,
        qfi,
        floored: sld.floored,
        n,
    })
}

/// Hessian variant with kernel f″((λ_i + λ_j)/2): the literal curvature
/// matrix f″(ρ) read in the eigenbasis.
fn f2diag_bilinear(
    state: &DensityOperator,
    g: &Generator,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    eps_floor: f64,
) -> Result<f64> {
    let lam = state.eigenvalues();
    let wa = state.hermitian().to_eigenbasis(a.matrix())?;
    let wb = state.hermitian().to_eigenbasis(b.matrix())?;
    let floor = g.floor(eps_floor);
    let d = state.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mid = 0.5 * (lam[i] + lam[j]);
            let k = calculus::eval_spectral(g.scalar(), calculus::Map::FSecond, mid, floor)?;
            sum += k * (wa.get(i, j) * wb.get(i, j).conj()).re;
        }
    }
    Ok(sum)
}
