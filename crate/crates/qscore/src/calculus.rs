//! Matrix functional calculus on Hermitian matrices: spectral maps, first
//! divided differences, and the trace-functional derivative machinery.
//!
//! All spectral evaluation goes through one clamping policy. For generators
//! that are singular at zero (t log t), eigenvalues are clamped into
//! [floor, 1] before derivative maps are applied; the f-map itself evaluates
//! 0·log 0 := 0 exactly whenever an eigenvalue is zero to within 1e-14,
//! before any clamping. Non-singular maps skip clamping and instead validate
//! the spectrum against the scalar function's domain (with a 1e-9 slack for
//! floating-point dust).

use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, ScalarFunction};

/// Absolute eigenvalue-gap threshold below which divided differences fall
/// back to the midpoint derivative.
pub const DIVIDED_DIFF_GAP: f64 = 1e-8;
/// Default eigenvalue floor for generators singular at zero.
pub const DEFAULT_EPS_FLOOR: f64 = 1e-10;
/// |λ| below this counts as an exact zero for the 0·log 0 rule.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-14;
/// Slack allowed on domain checks before rejecting an eigenvalue.
const DOMAIN_SLACK: f64 = 1e-9;

/// Which scalar map of a [`ScalarFunction`] to evaluate on a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Map {
    F,
    FPrime,
    FSecond,
}

/// Evaluates one scalar map at an eigenvalue under the clamping policy.
/// `floor = Some(ε)` clamps into [ε, 1]; `None` validates against the domain.
pub fn eval_spectral(f: &ScalarFunction, map: Map, lambda: f64, floor: Option<f64>) -> Result<f64> {
    let t = match floor {
        Some(eps) => {
            if map == Map::F && lambda.abs() <= ZERO_EIGENVALUE_TOL {
                // 0·log 0 := 0, evaluated before clamping.
                return Ok(f.f(0.0));
            }
            lambda.clamp(eps, 1.0)
        }
        None => {
            let (lo, hi) = f.domain();
            if lambda < lo - DOMAIN_SLACK || lambda > hi + DOMAIN_SLACK {
                return Err(Error::DomainViolation {
                    value: lambda,
                    lo,
                    hi,
                });
            }
            lambda.clamp(lo, hi)
        }
    };
    Ok(match map {
        Map::F => f.f(t),
        Map::FPrime => f.fprime(t),
        Map::FSecond => f.fsecond(t),
    })
}

/// Clamped copy of a spectrum under the same policy used by `eval_spectral`.
fn effective_spectrum(f: &ScalarFunction, eig: &[f64], floor: Option<f64>) -> Result<Vec<f64>> {
    eig.iter()
        .map(|&l| match floor {
            Some(eps) => Ok(l.clamp(eps, 1.0)),
            None => {
                let (lo, hi) = f.domain();
                if l < lo - DOMAIN_SLACK || l > hi + DOMAIN_SLACK {
                    return Err(Error::DomainViolation { value: l, lo, hi });
                }
                Ok(l.clamp(lo, hi))
            }
        })
        .collect()
}

/// Spectral map h ↦ U diag(f(λ)) U†.
pub fn apply_function(
    h: &HermitianMatrix,
    f: &ScalarFunction,
    floor: Option<f64>,
) -> Result<HermitianMatrix> {
    let values: Vec<f64> = h
        .eigenvalues()
        .iter()
        .map(|&l| eval_spectral(f, Map::F, l, floor))
        .collect::<Result<_>>()?;
    Ok(HermitianMatrix::from_eigen_pairs(h.eigenvectors(), &values))
}

/// Spectral map with f′ instead of f. Used for score operators.
pub fn apply_derivative(
    h: &HermitianMatrix,
    f: &ScalarFunction,
    floor: Option<f64>,
) -> Result<HermitianMatrix> {
    let values: Vec<f64> = h
        .eigenvalues()
        .iter()
        .map(|&l| eval_spectral(f, Map::FPrime, l, floor))
        .collect::<Result<_>>()?;
    Ok(HermitianMatrix::from_eigen_pairs(h.eigenvectors(), &values))
}

/// First divided difference matrix of `f` on a spectrum:
/// entry (i, j) is (f(λi) − f(λj))/(λi − λj), or f′ at the midpoint when the
/// gap is below [`DIVIDED_DIFF_GAP`]. Symmetric by construction.
pub fn divided_difference_first(
    eigenvalues: &[f64],
    f: &ScalarFunction,
    floor: Option<f64>,
) -> Result<Vec<Vec<f64>>> {
    divided_difference_of(eigenvalues, f, Map::F, floor)
}

/// Divided differences of f′; the Hessian kernel of Tr f.
fn divided_difference_of(
    eigenvalues: &[f64],
    f: &ScalarFunction,
    map: Map,
    floor: Option<f64>,
) -> Result<Vec<Vec<f64>>> {
    let lam = effective_spectrum(f, eigenvalues, floor)?;
    let (value, deriv): (
        fn(&ScalarFunction, f64) -> f64,
        fn(&ScalarFunction, f64) -> f64,
    ) = match map {
        Map::F => (|sf, t| sf.f(t), |sf, t| sf.fprime(t)),
        Map::FPrime => (|sf, t| sf.fprime(t), |sf, t| sf.fsecond(t)),
        Map::FSecond => unreachable!("no third derivative available"),
    };
    let d = lam.len();
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let gap = lam[i] - lam[j];
            let v = if gap.abs() > DIVIDED_DIFF_GAP {
                (value(f, lam[i]) - value(f, lam[j])) / gap
            } else {
                deriv(f, 0.5 * (lam[i] + lam[j]))
            };
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// d/dt Tr f(h + tH) at t = 0, i.e. Tr(f′(h)·H).
pub fn directional_derivative_trace(
    h: &HermitianMatrix,
    f: &ScalarFunction,
    direction: &HermitianMatrix,
    floor: Option<f64>,
) -> Result<f64> {
    h.matrix().check_dim(direction.matrix())?;
    let w = h.to_eigenbasis(direction.matrix())?;
    let mut sum = 0.0;
    for (i, &l) in h.eigenvalues().iter().enumerate() {
        sum += eval_spectral(f, Map::FPrime, l, floor)? * w.get(i, i).re;
    }
    Ok(sum)
}

/// d²/dt² Tr f(h + tH) at t = 0: Σ_ij (f′)^[1](λi, λj) |⟨ui|H|uj⟩|².
/// Diagonal terms use f″(λi), so the result reduces to Σ f″(λi) Hii² when H
/// commutes with h.
pub fn hessian_quadratic_form(
    h: &HermitianMatrix,
    f: &ScalarFunction,
    direction: &HermitianMatrix,
    floor: Option<f64>,
) -> Result<f64> {
    h.matrix().check_dim(direction.matrix())?;
    let kernel = divided_difference_of(h.eigenvalues(), f, Map::FPrime, floor)?;
    let w = h.to_eigenbasis(direction.matrix())?;
    let d = h.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            sum += kernel[i][j] * w.get(i, j).norm_sqr();
        }
    }
    Ok(sum)
}

/// Polarized Hessian form: Σ_ij (f′)^[1](λi, λj) Re(Ai̅j · conj(Bi̅j)) with A, B
/// expressed in the eigenbasis of h. `hessian_quadratic_form(h, f, A) ==
/// hessian_bilinear_form(h, f, A, A)`.
pub fn hessian_bilinear_form(
    h: &HermitianMatrix,
    f: &ScalarFunction,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    floor: Option<f64>,
) -> Result<f64> {
    h.matrix().check_dim(a.matrix())?;
    h.matrix().check_dim(b.matrix())?;
    let kernel = divided_difference_of(h.eigenvalues(), f, Map::FPrime, floor)?;
    let wa = h.to_eigenbasis(a.matrix())?;
    let wb = h.to_eigenbasis(b.matrix())?;
    let d = h.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            sum += kernel[i][j] * (wa.get(i, j) * wb.get(i, j).conj()).re;
        }
    }
    Ok(sum)
}

/// Tr f(h) under the clamping policy.
pub fn trace_function(h: &HermitianMatrix, f: &ScalarFunction, floor: Option<f64>) -> Result<f64> {
    let mut sum = 0.0;
    for &l in h.eigenvalues() {
        sum += eval_spectral(f, Map::F, l, floor)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ComplexMatrix;

    fn log_gen() -> ScalarFunction {
        ScalarFunction::new(
            |t| if t <= 0.0 { 0.0 } else { t * t.ln() },
            |t| t.ln() + 1.0,
            |t| 1.0 / t,
            (0.0, 1.0),
        )
    }

    fn quad_gen() -> ScalarFunction {
        ScalarFunction::new(|t| t * t, |t| 2.0 * t, |_| 2.0, (0.0, 1.0))
    }

    fn herm(entries: &[f64]) -> HermitianMatrix {
        let d = (entries.len() as f64).sqrt() as usize;
        HermitianMatrix::new(ComplexMatrix::from_real(d, entries).unwrap()).unwrap()
    }

    #[test]
    fn apply_function_scalar_matrix() {
        // f(I/2) with f = t log t is (log(1/2)/2)·I.
        let h = herm(&[0.5, 0.0, 0.0, 0.5]);
        let out = apply_function(&h, &log_gen(), Some(DEFAULT_EPS_FLOOR)).unwrap();
        let expect = 0.5 * 0.5f64.ln();
        assert!((out.matrix().get(0, 0).re - expect).abs() < 1e-15);
        assert!(out.matrix().get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn apply_function_projector_idempotent_under_square() {
        let h = herm(&[0.5, 0.5, 0.5, 0.5]);
        let out = apply_function(&h, &quad_gen(), None).unwrap();
        assert!(out.matrix().sub(h.matrix()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn apply_function_diagonal_log() {
        let h = herm(&[0.3, 0.0, 0.0, 0.7]);
        let out = apply_function(&h, &log_gen(), Some(DEFAULT_EPS_FLOOR)).unwrap();
        assert!((out.matrix().get(0, 0).re - 0.3 * 0.3f64.ln()).abs() < 1e-15);
        assert!((out.matrix().get(1, 1).re - 0.7 * 0.7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn apply_function_commutes_with_input() {
        let h = herm(&[0.4, 0.1, 0.1, 0.6]);
        let out = apply_function(&h, &quad_gen(), None).unwrap();
        let hf = h.matrix().mul(out.matrix()).unwrap();
        let fh = out.matrix().mul(h.matrix()).unwrap();
        assert!(hf.sub(&fh).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn domain_violation_detected() {
        let h = herm(&[1.5, 0.0, 0.0, 0.5]);
        assert!(matches!(
            apply_function(&h, &quad_gen(), None),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn divided_difference_degenerate_pair() {
        let dd = divided_difference_first(&[0.5, 0.5], &quad_gen(), None).unwrap();
        for row in &dd {
            for &v in row {
                assert!((v - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn divided_difference_quadratic_is_sum() {
        // (λi² − λj²)/(λi − λj) = λi + λj.
        let dd = divided_difference_first(&[0.25, 0.75], &quad_gen(), None).unwrap();
        assert!((dd[0][0] - 0.5).abs() < 1e-15);
        assert!((dd[1][1] - 1.5).abs() < 1e-15);
        assert!((dd[0][1] - 1.0).abs() < 1e-15);
        assert!((dd[1][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn divided_difference_log_off_diagonal() {
        let dd =
            divided_difference_first(&[0.3, 0.7], &log_gen(), Some(DEFAULT_EPS_FLOOR)).unwrap();
        let expect = (0.7 * 0.7f64.ln() - 0.3 * 0.3f64.ln()) / 0.4;
        assert!((dd[0][1] - expect).abs() < 1e-14);
    }

    #[test]
    fn directional_derivative_trivial_cases() {
        // h = I/2, f = t²: Tr(2·(I/2)·σz) = Tr(σz) = 0.
        let h = herm(&[0.5, 0.0, 0.0, 0.5]);
        let sz = herm(&[1.0, 0.0, 0.0, -1.0]);
        let v = directional_derivative_trace(&h, &quad_gen(), &sz, None).unwrap();
        assert!(v.abs() < 1e-15);

        // f′(h) diagonal, σx off-diagonal: trace product vanishes.
        let h = herm(&[0.3, 0.0, 0.0, 0.7]);
        let sx = herm(&[0.0, 1.0, 1.0, 0.0]);
        let v = directional_derivative_trace(&h, &log_gen(), &sx, Some(DEFAULT_EPS_FLOOR)).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn hessian_quadratic_generator_is_twice_hs_norm() {
        let h = herm(&[0.4, 0.1, 0.1, 0.6]);
        let dir = herm(&[0.2, -0.3, -0.3, -0.2]);
        let v = hessian_quadratic_form(&h, &quad_gen(), &dir, None).unwrap();
        let tr_h2 = dir.matrix().mul(dir.matrix()).unwrap().trace().re;
        assert!((v - 2.0 * tr_h2).abs() < 1e-12);
    }

    #[test]
    fn hessian_diagonal_log_case() {
        let h = herm(&[0.3, 0.0, 0.0, 0.7]);
        let sz = herm(&[1.0, 0.0, 0.0, -1.0]);
        let v = hessian_quadratic_form(&h, &log_gen(), &sz, Some(DEFAULT_EPS_FLOOR)).unwrap();
        assert!((v - (1.0 / 0.3 + 1.0 / 0.7)).abs() < 1e-12);
    }

    #[test]
    fn hessian_dimension_mismatch() {
        let h = herm(&[0.5, 0.0, 0.0, 0.5]);
        let big = herm(&[0.1; 9]);
        assert!(matches!(
            hessian_quadratic_form(&h, &quad_gen(), &big, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
