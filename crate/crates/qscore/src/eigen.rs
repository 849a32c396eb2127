//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal element a_pq with a complex
//! plane rotation: the phase of a_pq is absorbed into the rotation so the
//! remaining 2×2 subproblem is the classic real symmetric one (Numerical
//! Recipes §11.1), solved with the smaller-angle root for stability. Cyclic
//! sweeps in a fixed (p, q) order make the decomposition deterministic for
//! identical input, and the final phase convention (first component of each
//! eigenvector above 1e-12 in magnitude is made real positive) pins the
//! output bit-for-bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Convergence: off-diagonal Frobenius mass below this multiple of ‖h‖_F.
pub const JACOBI_REL_TOL: f64 = 1e-14;
/// Hard cap on sweeps; the cyclic method converges long before this at d ≤ 64.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Magnitude below which an eigenvector component counts as zero for the
/// phase convention.
pub const PHASE_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors, so `m = U diag(λ) U†`. The caller is expected
/// to have checked Hermiticity; only the Hermitian part of `m` is read.
pub fn jacobi_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let d = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(d);

    if d == 1 {
        return Ok((vec![a.get(0, 0).re], v));
    }

    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Ok((vec![0.0; d], v));
    }
    let tol = JACOBI_REL_TOL * norm;

    let mut converged = false;
    let mut off = off_diagonal_mass(&a);
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..d - 1 {
            for q in p + 1..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = off_diagonal_mass(&a);
    }
    if !converged && off > tol {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off_mass: off,
        });
    }

    let mut eigvals: Vec<f64> = (0..d).map(|i| a.get(i, i).re).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eigvals[i]
            .partial_cmp(&eigvals[j])
            .expect("finite eigenvalues")
    });
    eigvals = order.iter().map(|&i| a.get(i, i).re).collect();

    let mut vecs = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        let phase = column_phase_fix(&v, old_col);
        for row in 0..d {
            vecs.set(row, new_col, v.get(row, old_col) * phase);
        }
    }

    Ok((eigvals, vecs))
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            sum += 2.0 * a.get(i, j).norm_sqr();
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating a[p][q], applied two-sided to `a` and
/// accumulated into `v` (v ← v·J).
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J differs from the identity only in rows/cols p, q:
    //   J[p][p] = c,          J[p][q] = s·phase,
    //   J[q][p] = -s·conj(phase),  J[q][q] = c.
    let d = a.dim();
    let sp = phase.scale(s);

    // a ← J† a (rows p, q).
    for k in 0..d {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, apk.scale(c) - sp * aqk);
        a.set(q, k, sp.conj() * apk + aqk.scale(c));
    }
    // a ← a J (columns p, q).
    for k in 0..d {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp.scale(c) - sp.conj() * akq);
        a.set(k, q, sp * akp + akq.scale(c));
    }
    // Exact zeros on the annihilated pair; roundoff would otherwise linger.
    a.set(p, q, Complex64::ZERO);
    a.set(q, p, Complex64::ZERO);
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));

    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp.scale(c) - sp.conj() * vkq);
        v.set(k, q, sp * vkp + vkq.scale(c));
    }
}

/// Phase factor that makes the first component of magnitude > PHASE_TOL
/// real positive.
fn column_phase_fix(v: &ComplexMatrix, col: usize) -> Complex64 {
    for row in 0..v.dim() {
        let x = v.get(row, col);
        let n = x.norm();
        if n > PHASE_TOL {
            return x.conj() / n;
        }
    }
    Complex64::ONE
}
