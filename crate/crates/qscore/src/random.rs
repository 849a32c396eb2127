//! Reproducible randomness: a counter-addressed (seed, stream) generator and
//! random states/unitaries under standard measures.
//!
//! Monte Carlo trials derive `stream = trial index`, so any trial can be
//! replayed in isolation and parallel execution cannot perturb the draw
//! sequence. ChaCha8 gives identical output across platforms.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::states::DensityOperator;

/// Counter-based generator addressed by an explicit (seed, stream) pair.
/// Identical addresses yield identical sequences on every platform. Deriving
/// a new stream returns a fresh value; drawing advances only local state.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh generator on a different stream of the same seed.
    pub fn substream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 high bits, the standard double-precision construction.
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.standard_normal(), self.standard_normal())
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Haar-random pure state: a normalized complex-Gaussian ket's projector.
pub fn random_pure(dim: usize, rng: &mut SeededRng) -> DensityOperator {
    let ket = random_ket(dim, rng);
    DensityOperator::pure_from_ket(&ket).expect("normalized ket projects to a valid state")
}

/// Hilbert-Schmidt-random mixed state, GG†/Tr(GG†) for complex-Gaussian G.
pub fn random_mixed(dim: usize, rng: &mut SeededRng) -> DensityOperator {
    loop {
        let g = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
        let gg = g.mul(&g.adjoint()).expect("same dim");
        let tr = gg.trace().re;
        if tr > 1e-12 {
            return DensityOperator::new(gg.scale_re(1.0 / tr))
                .expect("normalized Gram matrix is a valid state");
        }
    }
}

/// Haar-random unitary: orthonormalized complex-Gaussian matrix. Modified
/// Gram-Schmidt with positive-real diagonal fixes the phase gauge, which is
/// exactly the QR convention that makes the result Haar-distributed.
pub fn random_unitary(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    loop {
        let g = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
        if let Some(u) = gram_schmidt(&g) {
            return u;
        }
    }
}

/// Random Hermitian with a prescribed spectrum range: U diag(u) U† with
/// eigenvalues uniform in [lo, hi] and U Haar-random.
pub fn random_hermitian_with_spectrum(
    dim: usize,
    lo: f64,
    hi: f64,
    rng: &mut SeededRng,
) -> Result<crate::hermitian::HermitianMatrix> {
    let u = random_unitary(dim, rng);
    let vals: Vec<f64> = (0..dim).map(|_| rng.uniform_in(lo, hi)).collect();
    Ok(crate::hermitian::HermitianMatrix::from_eigen_pairs(
        &u, &vals,
    ))
}

/// Normalized complex-Gaussian ket.
pub fn random_ket(dim: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    loop {
        let ket: Vec<Complex64> = (0..dim).map(|_| rng.complex_normal()).collect();
        let norm = ket.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return ket.iter().map(|c| c / norm).collect();
        }
    }
}

fn gram_schmidt(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let d = g.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|j| g.column(j)).collect();
    for j in 0..d {
        // Two orthogonalization passes keep loss of orthogonality at roundoff.
        for _ in 0..2 {
            for i in 0..j {
                let proj: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for k in 0..d {
                    let v = cols[j][k] - proj * cols[i][k];
                    cols[j][k] = v;
                }
            }
        }
        let norm = cols[j].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for k in 0..d {
            cols[j][k] /= norm;
        }
    }
    Some(ComplexMatrix::from_fn(d, |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_address_identical_sequence() {
        let mut a = SeededRng::new(42, 7);
        let mut b = SeededRng::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = SeededRng::new(42, 0);
        let mut b = SeededRng::new(42, 1);
        let same = (0..16).filter(|_| a.uniform() == b.uniform()).count();
        assert!(same < 16);
    }

    #[test]
    fn random_pure_has_unit_purity() {
        let mut rng = SeededRng::new(1, 0);
        let rho = random_pure(2, &mut rng);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_mixed_is_valid_state() {
        let mut rng = SeededRng::new(7, 0);
        let rho = random_mixed(3, &mut rng);
        assert!(rho.min_eigenvalue() >= 0.0);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = SeededRng::new(3, 0);
        for d in 2..=5 {
            let u = random_unitary(d, &mut rng);
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }
}
