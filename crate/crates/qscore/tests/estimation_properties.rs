//! Estimation-layer properties: SLD residuals, Fisher-information ordering,
//! the pure-state QFI oracle, and bound invariances.

use num_complex::Complex64;
use qscore::calculus::DEFAULT_EPS_FLOOR;
use qscore::estimation::{
    classical_fisher, crmc_bound, fisher_report, qfi_matrix, sld_operators, ParametrizedFamily,
    Povm, RealMatrix,
};
use qscore::hermitian::HermitianMatrix;
use qscore::matrix::ComplexMatrix;
use qscore::random::{random_mixed, random_unitary, SeededRng};
use qscore::scoring::Generator;
use qscore::states::MeasurementBasis;

const EPS: f64 = DEFAULT_EPS_FLOOR;

/// Random family: full-rank base state with random traceless tangents,
/// evaluated at θ = 0.
fn random_family(dim: usize, n_params: usize, rng: &mut SeededRng) -> ParametrizedFamily {
    let base = random_mixed(dim, rng);
    let tangents: Vec<HermitianMatrix> = (0..n_params)
        .map(|_| {
            let raw = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal()).hermitian_part();
            let tr = raw.trace().re / dim as f64;
            let traceless = raw.sub(&ComplexMatrix::identity(dim).scale_re(tr)).unwrap();
            let norm = traceless.frobenius_norm();
            HermitianMatrix::new(traceless.scale_re(1.0 / norm)).unwrap()
        })
        .collect();
    let base_for_state = base.clone();
    let tangents_for_state = tangents.clone();
    ParametrizedFamily::new(dim, n_params, "random", move |theta: &[f64]| {
        let mut m = base_for_state.matrix().clone();
        for (t, &c) in tangents_for_state.iter().zip(theta) {
            m = m.add(&t.matrix().scale_re(c))?;
        }
        qscore::states::DensityOperator::new(m)
    })
    .with_tangents(move |_theta: &[f64]| Ok(tangents.clone()))
}

#[test]
fn sld_defining_equation_residuals() {
    let mut rng = SeededRng::new(300, 0);
    for _ in 0..50 {
        let d = 2 + (rng.uniform() * 3.0) as usize;
        let fam = random_family(d, 2, &mut rng);
        let sld = sld_operators(&fam, &[0.0, 0.0], EPS).unwrap();
        let tangents = fam.tangents_at(&[0.0, 0.0]).unwrap();
        for (t, l) in tangents.iter().zip(&sld.operators) {
            let rl = sld.state.matrix().mul(l.matrix()).unwrap();
            let lr = l.matrix().mul(sld.state.matrix()).unwrap();
            let recon = rl.add(&lr).unwrap().scale_re(0.5);
            let residual = recon.sub(t.matrix()).unwrap().max_abs();
            assert!(residual < 1e-8, "SLD residual {residual} at d={d}");
        }
    }
}

#[test]
fn classical_fisher_never_exceeds_qfi() {
    let mut rng = SeededRng::new(301, 0);
    for trial in 0..200 {
        let d = 2 + (trial % 3);
        let fam = random_family(d, 2, &mut rng);
        let povm = if trial % 3 == 0 {
            // Two-outcome POVM {E, I − E}.
            let u = random_unitary(d, &mut rng);
            let vals: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
            let e = HermitianMatrix::from_eigen_pairs(&u, &vals);
            let complement =
                HermitianMatrix::new(ComplexMatrix::identity(d).sub(e.matrix()).unwrap()).unwrap();
            Povm::new(vec![e, complement], vec!["e".into(), "rest".into()]).unwrap()
        } else {
            Povm::from_basis(&MeasurementBasis::new(random_unitary(d, &mut rng), "rand").unwrap())
        };
        let report = fisher_report(&fam, &[0.0, 0.0], Some(&povm), EPS).unwrap();
        let qfi = &report.qfi;
        let cfi = report.cfi.as_ref().unwrap();
        assert!(qfi.min_eigenvalue().unwrap() > -1e-9, "QFI must be PSD");

        let mut gap = RealMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                gap.set(i, j, qfi.get(i, j) - cfi.get(i, j));
            }
        }
        let min = gap.min_eigenvalue().unwrap();
        assert!(min > -1e-7, "CFI exceeded QFI by {min} at d={d}");
    }
}

#[test]
fn pure_qubit_qfi_matches_ket_oracle() {
    // Oracle: 4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²) with the ket derivative taken by
    // central finite differences, independent of the SLD machinery.
    let ket_at = |speed: f64, theta: f64| -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            Complex64::new(s, 0.0),
            Complex64::new(s * (speed * theta).cos(), s * (speed * theta).sin()),
        ]
    };
    let oracle = |speed: f64, theta: f64| -> f64 {
        let h = 1e-5;
        let plus = ket_at(speed, theta + h);
        let minus = ket_at(speed, theta - h);
        let psi = ket_at(speed, theta);
        let dpsi: Vec<Complex64> = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let dd: f64 = dpsi.iter().map(|c| c.norm_sqr()).sum();
        let overlap: Complex64 = psi.iter().zip(&dpsi).map(|(a, b)| a.conj() * b).sum();
        4.0 * (dd - overlap.norm_sqr())
    };

    for speed in [1.0, 0.7, 2.3] {
        let mut reparam = RealMatrix::zeros(1);
        reparam.set(0, 0, speed);
        let fam = ParametrizedFamily::bloch_rotation().linear_reparam(&reparam);
        for theta in [0.0, 0.4, 1.1] {
            let qfi = qfi_matrix(&fam, &[theta], EPS).unwrap();
            let expect = oracle(speed, theta);
            assert!(
                (qfi.get(0, 0) - expect).abs() < 1e-6,
                "qfi {} vs ket oracle {expect} (speed {speed}, θ {theta})",
                qfi.get(0, 0)
            );
        }
    }
}

#[test]
fn mixed_qubit_qfi_matches_bloch_closed_form() {
    // For a qubit Bloch path r(θ) with |r| < 1 the QFI is
    // |ṙ|² + (r·ṙ)²/(1 − |r|²). Checked on a radial family, where the
    // second term is live.
    let fam = ParametrizedFamily::new(2, 1, "radial", |theta: &[f64]| {
        let r = qscore::states::BlochVector::new(theta[0], 0.0, 0.0)?;
        qscore::states::bloch_to_density(&r)
    });
    for r in [0.2, 0.5, 0.8] {
        let qfi = qfi_matrix(&fam, &[r], EPS).unwrap();
        let expect = 1.0 + r * r / (1.0 - r * r);
        assert!(
            (qfi.get(0, 0) - expect).abs() < 1e-6,
            "radial qfi {} vs closed form {expect} at r={r}",
            qfi.get(0, 0)
        );
    }
}

#[test]
fn crmc_bound_invariant_under_linear_reparametrization() {
    let mut rng = SeededRng::new(302, 0);
    let g = Generator::log();
    let fam = ParametrizedFamily::qubit_bloch_full();
    let theta = [0.2, -0.1, 0.25];
    let bound = crmc_bound(&fam, &theta, &g, 64, EPS).unwrap();

    for _ in 0..10 {
        // Random symmetric positive-definite reparametrization matrix.
        let u = random_unitary(3, &mut rng);
        let mut real_u = RealMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                real_u.set(i, j, u.get(i, j).re);
            }
        }
        // Symmetrize and shift to be safely positive definite.
        let mut a = RealMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, 0.2 * (real_u.get(i, j) + real_u.get(j, i)));
            }
            a.set(i, i, a.get(i, i) + 1.0);
        }
        let a_inv = a.inverse_spd().unwrap();
        let theta_prime: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a_inv.get(i, j) * theta[j]).sum())
            .collect();
        let reparam = fam.linear_reparam(&a);
        let bound_reparam = crmc_bound(&reparam, &theta_prime, &g, 64, EPS).unwrap();
        assert!(
            (bound.value - bound_reparam.value).abs() < 1e-8,
            "bound changed under reparametrization: {} vs {}",
            bound.value,
            bound_reparam.value
        );
    }
}

#[test]
fn qfi_monotone_under_dephasing() {
    let mut rng = SeededRng::new(303, 0);
    for trial in 0..100 {
        let d = 2 + (trial % 2);
        let fam = random_family(d, 2, &mut rng);
        let basis = MeasurementBasis::new(random_unitary(d, &mut rng), "rand").unwrap();
        let dephased = fam.dephased(&basis);

        let qfi = qfi_matrix(&fam, &[0.0, 0.0], EPS).unwrap();
        let qfi_deph = qfi_matrix(&dephased, &[0.0, 0.0], EPS).unwrap();
        let mut gap = RealMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                gap.set(i, j, qfi.get(i, j) - qfi_deph.get(i, j));
            }
        }
        let min = gap.min_eigenvalue().unwrap();
        assert!(min > -1e-7, "dephasing increased QFI by {min}");
    }
}

#[test]
fn classical_fisher_divergent_component_is_flagged() {
    // Pure state measured at the support boundary: a vanishing outcome with
    // live gradient marks the diagonal +∞.
    let fam = ParametrizedFamily::bloch_circle(1.0);
    // Basis rotated so the state is an eigenvector only at θ exactly 0; at a
    // tilted θ the x-basis probability of the minus outcome is sin²(θ/2) > 0,
    // so pick θ = 0 against a basis aligned with the state.
    let x = Povm::from_basis(&MeasurementBasis::hadamard());
    // θ = π/2 puts the state at Bloch (0,1,0): both X outcomes are 1/2,
    // no divergence. θ = 0: outcome at p = 0 has zero gradient, skipped.
    let cfi = classical_fisher(&fam, &[0.0], &x, EPS).unwrap();
    assert!(cfi.get(0, 0).is_finite());

    // A family moving at the boundary: diagonal qubit at θ near 0 measured
    // in Z has p₀ = θ with ∂p₀ = 1.
    let diag = ParametrizedFamily::diagonal_qubit();
    let z = Povm::from_basis(&MeasurementBasis::computational(2));
    let cfi = classical_fisher(&diag, &[0.0], &z, EPS).unwrap();
    assert!(cfi.get(0, 0).is_infinite());
}

#[test]
fn fisher_report_flags_flooring() {
    let pure = ParametrizedFamily::bloch_rotation();
    let report = fisher_report(&pure, &[0.0], None, EPS).unwrap();
    assert!(report.floored);

    let mixed = ParametrizedFamily::bloch_circle(0.5);
    let report = fisher_report(&mixed, &[0.3], None, EPS).unwrap();
    assert!(!report.floored);
}
