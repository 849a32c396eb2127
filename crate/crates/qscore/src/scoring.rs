//! Scoring rules over density operators: value functionals, score operators,
//! expected scores, Bregman and Petz divergences, and a numerical
//! operator-convexity tester.
//!
//! A generator is a convex scalar f on [0, 1]. The value functional is
//! V(ρ) = Tr f(ρ), and the score operator handed to a forecaster reporting σ
//! is the supporting-hyperplane (McCarthy) form
//!
//!   S(σ) = f′(σ) + (V(σ) − Tr σ f′(σ) + κ)·I,
//!
//! whose expectation against any truth ρ is the affine minorant of V at σ
//! shifted by the generator's score offset κ. This is the unique tangent
//! construction for which Tr ρS(ρ) − Tr ρS(σ) equals the Bregman divergence
//! identically, i.e. for which truth-telling is proper for every convex
//! generator. For f = t log t the correction term vanishes (Tr σ f′(σ) −
//! V(σ) = 1 = κ), so the log score operator is exactly log σ + I and the
//! classical expected scores are recovered unchanged; for the quadratic
//! generator the construction gives the matrix Brier score 2σ − Tr(σ²)·I.

use num_complex::Complex64;

use crate::calculus::{self, Map};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, ScalarFunction};
use crate::matrix::{hs_inner, ComplexMatrix};
use crate::random::{random_hermitian_with_spectrum, SeededRng};
use crate::states::DensityOperator;

/// Rank cutoff for the support test behind the +∞ sentinel.
pub const SUPPORT_RANK_TOL: f64 = 1e-8;

/// A scoring-rule generator: scalar f with derivatives, plus the flags that
/// drive clamping and the score normalization.
#[derive(Debug, Clone)]
pub struct Generator {
    name: String,
    scalar: ScalarFunction,
    operator_convex: bool,
    singular_at_zero: bool,
    /// Constant added to the score operator; fixes the conventional
    /// normalization (log rule pays 1 for a pure truth report).
    score_offset: f64,
}

impl Generator {
    /// f(t) = t log t: the logarithmic (relative-entropy) rule.
    pub fn log() -> Self {
        Self {
            name: "log".into(),
            scalar: ScalarFunction::new(
                |t| if t <= 0.0 { 0.0 } else { t * t.ln() },
                |t| t.ln() + 1.0,
                |t| 1.0 / t,
                (0.0, 1.0),
            ),
            operator_convex: true,
            singular_at_zero: true,
            score_offset: 1.0,
        }
    }

    /// f(t) = t²: the quadratic (Brier) rule.
    pub fn quadratic() -> Self {
        Self {
            name: "quadratic".into(),
            scalar: ScalarFunction::new(|t| t * t, |t| 2.0 * t, |_| 2.0, (0.0, 1.0)),
            operator_convex: true,
            singular_at_zero: false,
            score_offset: 0.0,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "log" => Ok(Self::log()),
            "quadratic" | "quad" => Ok(Self::quadratic()),
            other => Err(Error::UnknownGenerator { name: other.into() }),
        }
    }

    /// User-supplied generator. Accepted only if the scalar passes a sampled
    /// midpoint-convexity check (200 pairs) and its derivative maps agree
    /// with finite differences. `operator_convex` is the caller's claim; use
    /// [`check_operator_convexity`] to test it.
    pub fn custom(
        name: impl Into<String>,
        scalar: ScalarFunction,
        operator_convex: bool,
        singular_at_zero: bool,
    ) -> Result<Self> {
        let name = name.into();
        scalar.validate_derivatives(&name, 100)?;
        let (lo, hi) = scalar.domain();
        let mut rng = SeededRng::new(0x5c0_11e, 0);
        let margin = if singular_at_zero {
            1e-6 * (hi - lo)
        } else {
            0.0
        };
        for _ in 0..200 {
            let a = rng.uniform_in(lo + margin, hi);
            let b = rng.uniform_in(lo + margin, hi);
            let mid = 0.5 * (a + b);
            let violation = scalar.f(mid) - 0.5 * (scalar.f(a) + scalar.f(b));
            if violation > 1e-9 {
                return Err(Error::NotConvex {
                    name,
                    violation,
                    a,
                    b,
                });
            }
        }
        Ok(Self {
            name,
            scalar,
            operator_convex,
            singular_at_zero,
            score_offset: 0.0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scalar(&self) -> &ScalarFunction {
        &self.scalar
    }

    pub fn operator_convex(&self) -> bool {
        self.operator_convex
    }

    pub fn singular_at_zero(&self) -> bool {
        self.singular_at_zero
    }

    /// The clamping floor to use for derivative maps: `Some(eps)` for
    /// generators singular at zero, `None` otherwise.
    pub fn floor(&self, eps_floor: f64) -> Option<f64> {
        self.singular_at_zero.then_some(eps_floor)
    }
}

/// A divergence value that may be infinite (support violation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_finite(&self) -> bool {
        matches!(self, Divergence::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(*v),
            Divergence::Infinite => None,
        }
    }

    /// Collapses to f64, mapping the sentinel to +∞.
    pub fn as_f64(&self) -> f64 {
        match self {
            Divergence::Finite(v) => *v,
            Divergence::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Divergence::Finite(v) => write!(f, "{v}"),
            Divergence::Infinite => write!(f, "inf"),
        }
    }
}

/// Bundle of the expected-score quantities for one (truth, report) pair.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    pub expected_self: f64,
    pub expected_report: f64,
    pub gap: f64,
    pub divergence_bregman: Divergence,
    pub divergence_petz: Divergence,
}

/// V(ρ) = Tr f(ρ) = Σ f(λ_i). Unitarily invariant by construction.
pub fn value_functional(rho: &DensityOperator, g: &Generator, eps_floor: f64) -> Result<f64> {
    calculus::trace_function(rho.hermitian(), g.scalar(), g.floor(eps_floor))
}

/// The score operator S(σ) = f′(σ) + (V(σ) − Tr σ f′(σ) + κ)·I.
pub fn score_operator(
    sigma: &DensityOperator,
    g: &Generator,
    eps_floor: f64,
) -> Result<HermitianMatrix> {
    let floor = g.floor(eps_floor);
    let correction = score_correction(sigma, g, eps_floor)?;
    let values: Vec<f64> = sigma
        .eigenvalues()
        .iter()
        .map(|&l| {
            calculus::eval_spectral(g.scalar(), Map::FPrime, l, floor).map(|v| v + correction)
        })
        .collect::<Result<_>>()?;
    Ok(HermitianMatrix::from_eigen_pairs(
        sigma.eigenvectors(),
        &values,
    ))
}

/// V(σ) − Tr σ f′(σ) + κ, the scalar added to f′(σ).
fn score_correction(sigma: &DensityOperator, g: &Generator, eps_floor: f64) -> Result<f64> {
    let floor = g.floor(eps_floor);
    let mut v = 0.0;
    let mut tangent = 0.0;
    for &l in sigma.eigenvalues() {
        v += calculus::eval_spectral(g.scalar(), Map::F, l, floor)?;
        tangent += l * calculus::eval_spectral(g.scalar(), Map::FPrime, l, floor)?;
    }
    Ok(v - tangent + g.score_offset)
}

/// Expected score Tr(ρ S(σ)) of reporting σ when the truth is ρ.
pub fn expected_score(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    g: &Generator,
    eps_floor: f64,
) -> Result<f64> {
    rho.matrix().check_dim(sigma.matrix())?;
    let s = score_operator(sigma, g, eps_floor)?;
    let val = hs_inner(s.matrix(), rho.matrix())?;
    debug_assert!(val.im.abs() < 1e-9 * (1.0 + val.re.abs()));
    Ok(val.re)
}

/// Support test: does ρ put more than `SUPPORT_RANK_TOL` mass on the kernel
/// of σ (eigenvalues below the same cutoff)?
fn support_violated(rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
    let mut kernel_mass = 0.0;
    let d = sigma.dim();
    for k in 0..d {
        if sigma.eigenvalues()[k] < SUPPORT_RANK_TOL {
            let col = sigma.eigenvectors().column(k);
            let mut m = Complex64::ZERO;
            for i in 0..d {
                for j in 0..d {
                    m += col[i].conj() * rho.matrix().get(i, j) * col[j];
                }
            }
            kernel_mass += m.re;
        }
    }
    Ok(kernel_mass > SUPPORT_RANK_TOL)
}

/// Quantum Bregman divergence D(ρ‖σ) = V(ρ) − V(σ) − Tr(S(σ)(ρ − σ)).
/// Returns the +∞ sentinel when the generator is singular at zero and the
/// support of ρ is not contained in the support of σ.
pub fn bregman_divergence(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    g: &Generator,
    eps_floor: f64,
) -> Result<Divergence> {
    rho.matrix().check_dim(sigma.matrix())?;
    if g.singular_at_zero() && support_violated(rho, sigma)? {
        return Ok(Divergence::Infinite);
    }
    let v_rho = value_functional(rho, g, eps_floor)?;
    let v_sigma = value_functional(sigma, g, eps_floor)?;
    let grad = calculus::apply_derivative(sigma.hermitian(), g.scalar(), g.floor(eps_floor))?;
    let diff = rho.matrix().sub(sigma.matrix())?;
    let tangent = hs_inner(grad.matrix(), &diff)?.re;
    Ok(Divergence::Finite(v_rho - v_sigma - tangent))
}

/// Petz quantum f-divergence D_f(ρ‖σ) = Tr[σ^{1/2} f(σ^{-1/2} ρ σ^{-1/2}) σ^{1/2}].
/// σ's eigenvalues are floored at `eps_floor` before inversion; a support
/// violation yields the +∞ sentinel. The relative-weight operator's spectrum
/// lives on [0, ∞), so f is evaluated beyond the nominal domain; the 0-rule
/// f(0) applies to zero eigenvalues.
pub fn petz_f_divergence(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    g: &Generator,
    eps_floor: f64,
) -> Result<Divergence> {
    rho.matrix().check_dim(sigma.matrix())?;
    if sigma.min_eigenvalue() < SUPPORT_RANK_TOL && support_violated(rho, sigma)? {
        return Ok(Divergence::Infinite);
    }
    let inv_sqrt_vals: Vec<f64> = sigma
        .eigenvalues()
        .iter()
        .map(|&l| 1.0 / l.max(eps_floor).sqrt())
        .collect();
    let inv_sqrt = HermitianMatrix::from_eigen_pairs(sigma.eigenvectors(), &inv_sqrt_vals);
    let m = inv_sqrt
        .matrix()
        .mul(rho.matrix())?
        .mul(inv_sqrt.matrix())?;
    let m = HermitianMatrix::new(m)?;
    let f_vals: Vec<f64> = m
        .eigenvalues()
        .iter()
        .map(|&mu| {
            if mu.abs() <= 1e-14 {
                g.scalar().f(0.0)
            } else {
                g.scalar().f(mu.max(0.0))
            }
        })
        .collect();
    let f_m = HermitianMatrix::from_eigen_pairs(m.eigenvectors(), &f_vals);
    let val = hs_inner(sigma.matrix(), f_m.matrix())?;
    Ok(Divergence::Finite(val.re))
}

/// Outcome of the numerical operator-convexity test.
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub passed: bool,
    pub trials: usize,
    /// Most negative min-eigenvalue of (f(A)+f(B))/2 − f((A+B)/2) seen.
    pub worst_violation: f64,
    /// A violating pair, when one was found.
    pub witness: Option<(ComplexMatrix, ComplexMatrix)>,
}

/// Samples random Hermitian pairs with spectra inside the generator's domain
/// and tests the operator Jensen inequality f((A+B)/2) ⪯ (f(A)+f(B))/2.
/// Violations below −1e-8 fail the test and report the witness pair.
pub fn check_operator_convexity(
    g: &Generator,
    dim: usize,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<ConvexityReport> {
    let (lo, hi) = g.scalar().domain();
    let margin = 0.02 * (hi - lo);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..trials {
        let a = random_hermitian_with_spectrum(dim, lo + margin, hi - margin, rng)?;
        let b = random_hermitian_with_spectrum(dim, lo + margin, hi - margin, rng)?;
        let mid = HermitianMatrix::new(a.matrix().add(b.matrix())?.scale_re(0.5))?;
        let fa = calculus::apply_function(&a, g.scalar(), None)?;
        let fb = calculus::apply_function(&b, g.scalar(), None)?;
        let fmid = calculus::apply_function(&mid, g.scalar(), None)?;
        let gap = fa
            .matrix()
            .add(fb.matrix())?
            .scale_re(0.5)
            .sub(fmid.matrix())?;
        let min_eig = HermitianMatrix::new(gap)?.min_eigenvalue();
        if min_eig < worst {
            worst = min_eig;
            if min_eig < -1e-8 && witness.is_none() {
                witness = Some((a.matrix().clone(), b.matrix().clone()));
            }
        }
    }
    Ok(ConvexityReport {
        passed: worst >= -1e-8,
        trials,
        worst_violation: worst,
        witness,
    })
}

/// Assembles the full score report for a (truth, report) pair. The gap is
/// taken from the divergence form when finite (numerically stabler near
/// ρ ≈ σ); the two routes agree to roundoff and are cross-checked in debug
/// builds.
pub fn score_report(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    g: &Generator,
    eps_floor: f64,
) -> Result<ScoreReport> {
    let expected_self = expected_score(rho, rho, g, eps_floor)?;
    let expected_report = expected_score(rho, sigma, g, eps_floor)?;
    let bregman = bregman_divergence(rho, sigma, g, eps_floor)?;
    let petz = petz_f_divergence(rho, sigma, g, eps_floor)?;
    let gap = match bregman {
        Divergence::Finite(d) => {
            debug_assert!(
                (d - (expected_self - expected_report)).abs() < 1e-10 * (1.0 + d.abs()),
                "gap/divergence identity drifted: {} vs {}",
                d,
                expected_self - expected_report
            );
            d
        }
        Divergence::Infinite => expected_self - expected_report,
    };
    debug_assert!(gap >= -1e-9, "properness gap went negative: {gap}");
    Ok(ScoreReport {
        expected_self,
        expected_report,
        gap,
        divergence_bregman: bregman,
        divergence_petz: petz,
    })
}
