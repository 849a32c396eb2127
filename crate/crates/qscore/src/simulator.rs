//! Monte Carlo n-copy tomography experiments: classical fixed-basis versus
//! quantum measurement strategies, scored by a proper scoring rule.
//!
//! Per trial, n copies are measured under a strategy, an estimate is formed,
//! and the properness gap (the Bregman divergence from the truth to the
//! estimate) is recorded. Trials are paired: the classical and quantum
//! strategies of a gap experiment consume the same per-trial random stream,
//! which cancels most sampling noise out of the gap estimate. Trial t always
//! draws from stream `stream_base + t`, so reports are bitwise reproducible
//! across runs and across thread counts; parallel execution only changes who
//! computes a trial, never what it draws.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::crmc_bound;
use crate::estimation::ParametrizedFamily;
use crate::hermitian::HermitianMatrix;
use crate::matrix::ComplexMatrix;
use crate::random::SeededRng;
use crate::scoring::{bregman_divergence, Divergence, Generator};
use crate::states::{
    basis_diagonal, bloch_to_density, coherence, BlochVector, DensityOperator, MeasurementBasis,
};

/// Default add-α smoothing for count-based frequency estimates.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// A measurement-and-estimation strategy for the n-copy forecasting game.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Measure every copy in one fixed basis; report the smoothed diagonal
    /// frequency state in that basis.
    ClassicalFixedBasis { basis: MeasurementBasis, alpha: f64 },
    /// Measure every copy in the eigenbasis of the true state (oracle side
    /// information); report the smoothed diagonal frequency state there.
    QuantumOracleBasis { alpha: f64 },
    /// Split copies over a tomographically complete set of bases (X/Y/Z for
    /// qubits, computational plus coherence-pair bases above) and invert
    /// linearly, then project onto physical states with eigenvalue floor
    /// `eps_est` (default 1/(2n)).
    QuantumPauliTomography { alpha: f64, eps_est: Option<f64> },
}

impl Strategy {
    pub fn classical(basis: MeasurementBasis, alpha: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothing constant must be positive, got {alpha}"
            )));
        }
        Ok(Self::ClassicalFixedBasis { basis, alpha })
    }

    pub fn oracle(alpha: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothing constant must be positive, got {alpha}"
            )));
        }
        Ok(Self::QuantumOracleBasis { alpha })
    }

    pub fn pauli_tomography(alpha: f64, eps_est: Option<f64>) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothing constant must be nonnegative, got {alpha}"
            )));
        }
        Ok(Self::QuantumPauliTomography { alpha, eps_est })
    }

    pub fn label(&self) -> String {
        match self {
            Strategy::ClassicalFixedBasis { basis, alpha } => {
                format!("classical-{}(alpha={alpha})", basis.label())
            }
            Strategy::QuantumOracleBasis { alpha } => format!("quantum-oracle(alpha={alpha})"),
            Strategy::QuantumPauliTomography { alpha, eps_est } => match eps_est {
                Some(e) => format!("quantum-pauli(alpha={alpha},eps_est={e})"),
                None => format!("quantum-pauli(alpha={alpha})"),
            },
        }
    }
}

/// Monte Carlo risk estimate for one (state, strategy, generator, n) cell.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub risk_mean: f64,
    pub risk_stderr: f64,
    pub n: u64,
    pub trials: usize,
    pub strategy: String,
    pub generator: String,
    /// Number of eigenvalue-floor / Bloch-projection activations.
    pub clamp_events: u64,
}

/// Paired classical-vs-quantum gap estimate.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub classical: RiskReport,
    pub quantum: RiskReport,
    /// classical.risk_mean − quantum.risk_mean.
    pub gap_mean: f64,
    /// Standard error of the paired per-trial differences.
    pub gap_stderr: f64,
    /// √(se_cl² + se_q²); never smaller than the paired error.
    pub gap_stderr_unpaired: f64,
    /// Relative entropy of coherence in the classical basis.
    pub coherence: f64,
    /// C(ρ)/n, the first-order gap prediction.
    pub predicted_gap: f64,
    pub n: u64,
    pub trials: usize,
}

/// One row of a dimension/copies scaling grid.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub d: usize,
    pub n: u64,
    pub generator: String,
    pub classical_risk: f64,
    pub classical_stderr: f64,
    pub quantum_risk: f64,
    pub quantum_stderr: f64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub coherence: f64,
    pub predicted_gap: f64,
    pub crmc_bound: f64,
    pub clamp_events: u64,
    pub seed: u64,
}

/// Multinomial outcome counts from measuring `shots` copies of ρ in a basis.
pub fn sample_outcomes(
    rho: &DensityOperator,
    basis: &MeasurementBasis,
    shots: u64,
    rng: &mut SeededRng,
) -> Result<Vec<u64>> {
    let probs = basis_diagonal(rho, basis)?;
    let clipped: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
    Ok(sample_counts(&clipped, shots, rng))
}

/// CDF-inversion multinomial sampler. One uniform per shot keeps the stream
/// consumption identical across strategies, and the CDF is walked in
/// ascending-probability order so that paired strategies map small uniforms
/// to their rare outcomes together (stronger common-random-number coupling;
/// the marginal distribution is unchanged).
fn sample_counts(probs: &[f64], shots: u64, rng: &mut SeededRng) -> Vec<u64> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&i, &j| {
        probs[i]
            .partial_cmp(&probs[j])
            .expect("finite probabilities")
    });
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut outcome = order[probs.len() - 1];
        for &k in &order {
            acc += probs[k];
            if u < acc {
                outcome = k;
                break;
            }
        }
        counts[outcome] += 1;
    }
    counts
}

/// Smoothed frequency state: diagonal in `basis` with entries
/// (counts_k + α)/(shots + dα). Full rank whenever α > 0.
pub fn classical_estimate(
    counts: &[u64],
    basis: &MeasurementBasis,
    alpha: f64,
) -> Result<DensityOperator> {
    let shots: u64 = counts.iter().sum();
    if shots == 0 {
        return Err(Error::InvalidParameter(
            "cannot estimate from zero shots".into(),
        ));
    }
    let d = counts.len();
    if d != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: d,
            right: basis.dim(),
        });
    }
    let denom = shots as f64 + d as f64 * alpha;
    let probs: Vec<f64> = counts.iter().map(|&c| (c as f64 + alpha) / denom).collect();
    DensityOperator::from_basis_probs(basis, &probs)
}

/// The measurement bases of the tomography strategy: X, Y, Z for qubits;
/// computational plus one (real, imaginary) pair basis per off-diagonal
/// element for d > 2. The set is tomographically complete in any dimension.
pub fn tomography_bases(dim: usize) -> Vec<MeasurementBasis> {
    if dim == 2 {
        return vec![
            MeasurementBasis::hadamard(),
            MeasurementBasis::circular(),
            MeasurementBasis::computational(2),
        ];
    }
    let mut bases = vec![MeasurementBasis::computational(dim)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in j + 1..dim {
            let mut re = ComplexMatrix::identity(dim);
            re.set(j, j, num_complex::Complex64::new(s, 0.0));
            re.set(k, j, num_complex::Complex64::new(s, 0.0));
            re.set(j, k, num_complex::Complex64::new(s, 0.0));
            re.set(k, k, num_complex::Complex64::new(-s, 0.0));
            bases.push(
                MeasurementBasis::new(re, format!("re({j},{k})")).expect("pair basis is unitary"),
            );
            let mut im = ComplexMatrix::identity(dim);
            im.set(j, j, num_complex::Complex64::new(s, 0.0));
            im.set(k, j, num_complex::Complex64::new(0.0, s));
            im.set(j, k, num_complex::Complex64::new(s, 0.0));
            im.set(k, k, num_complex::Complex64::new(0.0, -s));
            bases.push(
                MeasurementBasis::new(im, format!("im({j},{k})")).expect("pair basis is unitary"),
            );
        }
    }
    bases
}

/// Copy allocation over `n_bases` bases: ⌊n/B⌋ each, remainder to the first
/// bases, so allocations always sum to n.
pub fn tomography_allocations(n: u64, n_bases: usize) -> Vec<u64> {
    let b = n_bases as u64;
    (0..b).map(|i| n / b + u64::from(i < n % b)).collect()
}

/// Radial Bloch projection: vectors outside the unit ball are pulled back to
/// norm 1 − eps_est.
pub fn project_bloch(r: (f64, f64, f64), eps_est: f64) -> ((f64, f64, f64), bool) {
    let norm = (r.0 * r.0 + r.1 * r.1 + r.2 * r.2).sqrt();
    if norm <= 1.0 {
        return (r, false);
    }
    let s = (1.0 - eps_est) / norm;
    ((r.0 * s, r.1 * s, r.2 * s), true)
}

/// Linear-inversion tomography estimate from per-basis counts (in the order
/// of [`tomography_bases`]), smoothed per basis with add-α, then projected
/// onto physical states: Bloch-ball projection for qubits, eigenvalue floor
/// at `eps_est` with renormalization in every dimension. Returns the state
/// and the number of clamp activations.
pub fn pauli_tomography_estimate(
    counts_per_basis: &[Vec<u64>],
    dim: usize,
    alpha: f64,
    eps_est: f64,
) -> Result<(DensityOperator, u64)> {
    let bases_needed = if dim == 2 { 3 } else { 1 + dim * (dim - 1) };
    if counts_per_basis.len() != bases_needed {
        return Err(Error::InvalidParameter(format!(
            "expected counts for {bases_needed} bases, got {}",
            counts_per_basis.len()
        )));
    }
    for counts in counts_per_basis {
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::InvalidParameter(
                "empty allocation for a tomography basis".into(),
            ));
        }
    }
    let mut clamps = 0u64;

    let raw = if dim == 2 {
        // r̂_i = smoothed (p₊ − p₋) per Pauli axis, order X, Y, Z.
        let expect = |counts: &Vec<u64>| {
            let m: u64 = counts.iter().sum();
            (counts[0] as f64 - counts[1] as f64) / (m as f64 + 2.0 * alpha)
        };
        let r = (
            expect(&counts_per_basis[0]),
            expect(&counts_per_basis[1]),
            expect(&counts_per_basis[2]),
        );
        let (r, clipped) = project_bloch(r, eps_est);
        if clipped {
            clamps += 1;
        }
        let bloch = BlochVector::new(r.0, r.1, r.2)?;
        bloch_to_density(&bloch)?
    } else {
        let freq = |counts: &[u64], k: usize| {
            let m: u64 = counts.iter().sum();
            (counts[k] as f64 + alpha) / (m as f64 + counts.len() as f64 * alpha)
        };
        let mut m = ComplexMatrix::zeros(dim);
        for l in 0..dim {
            m.set(
                l,
                l,
                num_complex::Complex64::new(freq(&counts_per_basis[0], l), 0.0),
            );
        }
        let mut idx = 1;
        for j in 0..dim {
            for k in j + 1..dim {
                let re = 0.5 * (freq(&counts_per_basis[idx], j) - freq(&counts_per_basis[idx], k));
                let im = 0.5
                    * (freq(&counts_per_basis[idx + 1], k) - freq(&counts_per_basis[idx + 1], j));
                m.set(j, k, num_complex::Complex64::new(re, im));
                m.set(k, j, num_complex::Complex64::new(re, -im));
                idx += 2;
            }
        }
        // Linear inversion does not enforce a unit trace exactly once the
        // pair bases contribute; rescale the diagonal.
        let tr = m.trace().re;
        let m = m.scale_re(1.0 / tr);
        DensityOperator::from_hermitian(floor_hermitian(
            &HermitianMatrix::new(m)?,
            0.0,
            &mut clamps,
        ))?
    };

    // Physicality projection: floor the spectrum and renormalize.
    let (state, floored) = floor_density(&raw, eps_est);
    if floored {
        clamps += 1;
    }
    Ok((state, clamps))
}

fn floor_hermitian(h: &HermitianMatrix, floor: f64, clamps: &mut u64) -> HermitianMatrix {
    if h.min_eigenvalue() >= floor {
        return h.clone();
    }
    *clamps += 1;
    let vals: Vec<f64> = h.eigenvalues().iter().map(|&l| l.max(floor)).collect();
    let sum: f64 = vals.iter().sum();
    let normalized: Vec<f64> = vals.iter().map(|&l| l / sum).collect();
    HermitianMatrix::from_eigen_pairs(h.eigenvectors(), &normalized)
}

fn floor_density(rho: &DensityOperator, eps: f64) -> (DensityOperator, bool) {
    crate::estimation::floor_state(rho, eps)
}

/// Everything a trial needs, precomputed once per experiment cell.
struct PreparedStrategy {
    bases: Vec<MeasurementBasis>,
    probs: Vec<Vec<f64>>,
    allocations: Vec<u64>,
    kind: PreparedKind,
}

enum PreparedKind {
    Frequency { basis_index: usize, alpha: f64 },
    Tomography { alpha: f64, eps_est: f64 },
}

fn prepare(strategy: &Strategy, rho: &DensityOperator, n: u64) -> Result<PreparedStrategy> {
    if n == 0 {
        return Err(Error::InvalidParameter("copy count n must be ≥ 1".into()));
    }
    match strategy {
        Strategy::ClassicalFixedBasis { basis, alpha } => {
            let probs = clipped_diagonal(rho, basis)?;
            Ok(PreparedStrategy {
                bases: vec![basis.clone()],
                probs: vec![probs],
                allocations: vec![n],
                kind: PreparedKind::Frequency {
                    basis_index: 0,
                    alpha: *alpha,
                },
            })
        }
        Strategy::QuantumOracleBasis { alpha } => {
            let basis = rho.eigenbasis();
            // In its own eigenbasis the diagonal is the spectrum.
            let probs = rho.eigenvalues().to_vec();
            Ok(PreparedStrategy {
                bases: vec![basis],
                probs: vec![probs],
                allocations: vec![n],
                kind: PreparedKind::Frequency {
                    basis_index: 0,
                    alpha: *alpha,
                },
            })
        }
        Strategy::QuantumPauliTomography { alpha, eps_est } => {
            let bases = tomography_bases(rho.dim());
            let allocations = tomography_allocations(n, bases.len());
            if allocations.iter().any(|&m| m == 0) {
                return Err(Error::InvalidParameter(format!(
                    "n = {n} cannot cover {} tomography bases",
                    bases.len()
                )));
            }
            let probs = bases
                .iter()
                .map(|b| clipped_diagonal(rho, b))
                .collect::<Result<Vec<_>>>()?;
            let eps = eps_est.unwrap_or(1.0 / (2.0 * n as f64));
            Ok(PreparedStrategy {
                bases,
                probs,
                allocations,
                kind: PreparedKind::Tomography {
                    alpha: *alpha,
                    eps_est: eps,
                },
            })
        }
    }
}

fn clipped_diagonal(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    Ok(basis_diagonal(rho, basis)?
        .iter()
        .map(|&p| p.max(0.0))
        .collect())
}

/// One Monte Carlo trial: sample, estimate, score. Returns the properness
/// gap (Bregman divergence truth → estimate) and the clamp count.
fn run_trial(
    prep: &PreparedStrategy,
    rho: &DensityOperator,
    g: &Generator,
    n: u64,
    rng: &mut SeededRng,
    eps_floor: f64,
) -> Result<(f64, u64)> {
    let mut counts_all = Vec::with_capacity(prep.bases.len());
    for (probs, &m) in prep.probs.iter().zip(&prep.allocations) {
        counts_all.push(sample_counts(probs, m, rng));
    }
    let mut clamps = 0u64;
    let estimate = match &prep.kind {
        PreparedKind::Frequency { basis_index, alpha } => {
            classical_estimate(&counts_all[*basis_index], &prep.bases[*basis_index], *alpha)?
        }
        PreparedKind::Tomography { alpha, eps_est } => {
            let (est, c) = pauli_tomography_estimate(&counts_all, rho.dim(), *alpha, *eps_est)?;
            clamps += c;
            est
        }
    };
    let div = bregman_divergence(rho, &estimate, g, eps_floor)?;
    let value = match div {
        Divergence::Finite(v) => v,
        Divergence::Infinite => {
            // Rank-deficient estimate with truth mass outside its support:
            // floor the estimate so the risk stays finite, and count it.
            let eps_est = 1.0 / (2.0 * n as f64);
            let (floored, _) = floor_density(&estimate, eps_est);
            clamps += 1;
            bregman_divergence(rho, &floored, g, eps_floor)?
                .finite()
                .expect("floored estimate has full support")
        }
    };
    Ok((value, clamps))
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let t = values.len();
    let mean = values.iter().sum::<f64>() / t as f64;
    if t < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1) as f64;
    (mean, (var / t as f64).sqrt())
}

/// Per-trial divergences for one strategy. Trial t draws from stream
/// `stream_base + t`; trials run in parallel and are reduced in trial order.
pub fn risk_trials(
    rho: &DensityOperator,
    strategy: &Strategy,
    g: &Generator,
    n: u64,
    trials: usize,
    seed: u64,
    stream_base: u64,
    eps_floor: f64,
) -> Result<(Vec<f64>, u64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    let prep = prepare(strategy, rho, n)?;
    let results: Result<Vec<(f64, u64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::new(seed, stream_base + t as u64);
            run_trial(&prep, rho, g, n, &mut rng, eps_floor)
        })
        .collect();
    let results = results?;
    let values: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
    let clamps: u64 = results.iter().map(|(_, c)| *c).sum();
    Ok((values, clamps))
}

/// Monte Carlo estimate of the expected properness gap (the tomography risk)
/// of a strategy on `trials` independent n-copy experiments.
pub fn estimate_risk(
    rho: &DensityOperator,
    strategy: &Strategy,
    g: &Generator,
    n: u64,
    trials: usize,
    seed: u64,
    stream_base: u64,
    eps_floor: f64,
) -> Result<RiskReport> {
    let (values, clamps) = risk_trials(rho, strategy, g, n, trials, seed, stream_base, eps_floor)?;
    let (mean, stderr) = mean_stderr(&values);
    Ok(RiskReport {
        risk_mean: mean,
        risk_stderr: stderr,
        n,
        trials,
        strategy: strategy.label(),
        generator: g.name().to_string(),
        clamp_events: clamps,
    })
}

/// Paired classical-vs-quantum risk comparison on common trial streams.
pub fn forecasting_gap(
    rho: &DensityOperator,
    g: &Generator,
    n: u64,
    trials: usize,
    seed: u64,
    stream_base: u64,
    classical: &Strategy,
    quantum: &Strategy,
    eps_floor: f64,
) -> Result<GapReport> {
    let (cl_values, cl_clamps) =
        risk_trials(rho, classical, g, n, trials, seed, stream_base, eps_floor)?;
    let (q_values, q_clamps) =
        risk_trials(rho, quantum, g, n, trials, seed, stream_base, eps_floor)?;
    let (cl_mean, cl_se) = mean_stderr(&cl_values);
    let (q_mean, q_se) = mean_stderr(&q_values);
    let diffs: Vec<f64> = cl_values
        .iter()
        .zip(&q_values)
        .map(|(c, q)| c - q)
        .collect();
    let (_, paired_se) = mean_stderr(&diffs);

    let classical_basis = match classical {
        Strategy::ClassicalFixedBasis { basis, .. } => basis.clone(),
        _ => MeasurementBasis::computational(rho.dim()),
    };
    let c = coherence(rho, &classical_basis)?;

    let classical_report = RiskReport {
        risk_mean: cl_mean,
        risk_stderr: cl_se,
        n,
        trials,
        strategy: classical.label(),
        generator: g.name().to_string(),
        clamp_events: cl_clamps,
    };
    let quantum_report = RiskReport {
        risk_mean: q_mean,
        risk_stderr: q_se,
        n,
        trials,
        strategy: quantum.label(),
        generator: g.name().to_string(),
        clamp_events: q_clamps,
    };
    Ok(GapReport {
        gap_mean: cl_mean - q_mean,
        gap_stderr: paired_se,
        gap_stderr_unpaired: (cl_se * cl_se + q_se * q_se).sqrt(),
        coherence: c,
        predicted_gap: c / n as f64,
        n,
        trials,
        classical: classical_report,
        quantum: quantum_report,
    })
}

/// Default trial counts: heavier sampling where qubit cells are cheap.
pub fn default_trials(dim: usize) -> usize {
    if dim == 2 {
        2000
    } else {
        500
    }
}

/// Scaling grid over dimensions and copy counts at the maximally coherent
/// Fourier state of each dimension (worst-case misalignment with the
/// computational basis). The bound column is the spectrum-estimation bound
/// at the state's floored eigenvalue distribution, (d−1)/(2n) for the log
/// rule.
pub fn scaling_study(
    dims: &[usize],
    ns: &[u64],
    g: &Generator,
    trials: Option<usize>,
    seed: u64,
    eps_floor: f64,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for (di, &d) in dims.iter().enumerate() {
        if !(2..=6).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "scaling dimensions must lie in 2..=6, got {d}"
            )));
        }
        let rho = DensityOperator::fourier_state(d);
        let classical = Strategy::classical(MeasurementBasis::computational(d), DEFAULT_ALPHA)?;
        let quantum = Strategy::oracle(DEFAULT_ALPHA)?;
        let t = trials.unwrap_or_else(|| default_trials(d));

        let fam = ParametrizedFamily::spectrum(d);
        let (floored, _) = crate::estimation::floor_state(&rho, eps_floor);
        let theta: Vec<f64> = floored.eigenvalues()[..d - 1].to_vec();

        for (ni, &n) in ns.iter().enumerate() {
            let cell = (di * ns.len() + ni) as u64;
            let stream_base = cell << 32;
            let gap = forecasting_gap(
                &rho,
                g,
                n,
                t,
                seed,
                stream_base,
                &classical,
                &quantum,
                eps_floor,
            )?;
            let bound = crmc_bound(&fam, &theta, g, n, eps_floor)?;
            rows.push(ScalingRow {
                d,
                n,
                generator: g.name().to_string(),
                classical_risk: gap.classical.risk_mean,
                classical_stderr: gap.classical.risk_stderr,
                quantum_risk: gap.quantum.risk_mean,
                quantum_stderr: gap.quantum.risk_stderr,
                gap: gap.gap_mean,
                gap_stderr: gap.gap_stderr,
                coherence: gap.coherence,
                predicted_gap: gap.predicted_gap,
                crmc_bound: bound.value,
                clamp_events: gap.classical.clamp_events + gap.quantum.clamp_events,
                seed,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = crate::calculus::DEFAULT_EPS_FLOOR;

    #[test]
    fn sample_outcomes_deterministic_state() {
        let plus = DensityOperator::plus_state();
        let x = MeasurementBasis::hadamard();
        let mut rng = SeededRng::new(1, 0);
        let counts = sample_outcomes(&plus, &x, 100, &mut rng).unwrap();
        assert_eq!(counts, vec![100, 0]);
    }

    #[test]
    fn sample_outcomes_zero_shots() {
        let mixed = DensityOperator::maximally_mixed(2);
        let z = MeasurementBasis::computational(2);
        let mut rng = SeededRng::new(1, 0);
        let counts = sample_outcomes(&mixed, &z, 0, &mut rng).unwrap();
        assert_eq!(counts, vec![0, 0]);
    }

    #[test]
    fn sample_outcomes_binomial_statistics() {
        let plus = DensityOperator::plus_state();
        let z = MeasurementBasis::computational(2);
        let mut rng = SeededRng::new(99, 0);
        let shots = 100_000;
        let counts = sample_outcomes(&plus, &z, shots, &mut rng).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((counts[0] as f64 - 50_000.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn classical_estimate_add_half() {
        let z = MeasurementBasis::computational(2);
        let rho = classical_estimate(&[50, 50], &z, 0.5).unwrap();
        assert!((rho.matrix().get(0, 0).re - 0.5).abs() < 1e-15);

        let rho = classical_estimate(&[100, 0], &z, 0.5).unwrap();
        assert!((rho.matrix().get(0, 0).re - 100.5 / 101.0).abs() < 1e-15);
        assert!((rho.matrix().get(1, 1).re - 0.5 / 101.0).abs() < 1e-15);

        assert!(classical_estimate(&[0, 0], &z, 0.5).is_err());
    }

    #[test]
    fn bloch_projection_rule() {
        let ((x, y, z), clipped) = project_bloch((1.2, 0.0, 0.0), 1e-6);
        assert!(clipped);
        let norm = (x * x + y * y + z * z).sqrt();
        assert!((norm - (1.0 - 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn pauli_estimate_recovers_plus_direction() {
        // All-(+) in X, balanced in Y and Z.
        let counts = vec![vec![100, 0], vec![50, 50], vec![50, 50]];
        let (rho, _) = pauli_tomography_estimate(&counts, 2, 0.0, 1e-6).unwrap();
        let r = crate::states::density_to_bloch(&rho).unwrap();
        assert!(r.x > 0.99);
        assert!(r.y.abs() < 1e-9 && r.z.abs() < 1e-9);
    }

    #[test]
    fn pauli_estimate_rejects_empty_allocation() {
        let counts = vec![vec![10, 0], vec![0, 0], vec![5, 5]];
        assert!(pauli_tomography_estimate(&counts, 2, 0.5, 1e-3).is_err());
    }

    #[test]
    fn tomography_allocations_sum_to_n() {
        for n in [1u64, 7, 64, 1000] {
            for b in [3usize, 13] {
                let alloc = tomography_allocations(n, b);
                assert_eq!(alloc.iter().sum::<u64>(), n);
            }
        }
    }

    #[test]
    fn tomography_bases_complete_and_unitary() {
        for d in [2usize, 3, 4] {
            let bases = tomography_bases(d);
            let expected = if d == 2 { 3 } else { 1 + d * (d - 1) };
            assert_eq!(bases.len(), expected);
            for b in &bases {
                assert!(b.matrix().unitarity_deviation() < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_estimate_recovers_states_in_expectation_above_d2() {
        // Feed exact Born probabilities as (scaled) counts: linear inversion
        // should reproduce the state up to the flooring projection.
        let mut rng = SeededRng::new(61, 0);
        for d in [3usize, 4, 5] {
            for rho in [
                DensityOperator::fourier_state(d),
                crate::random::random_mixed(d, &mut rng),
            ] {
                let bases = tomography_bases(d);
                let shots = 1_000_000u64;
                let counts: Vec<Vec<u64>> = bases
                    .iter()
                    .map(|b| {
                        basis_diagonal(&rho, b)
                            .unwrap()
                            .iter()
                            .map(|&p| (p.max(0.0) * shots as f64).round() as u64)
                            .collect()
                    })
                    .collect();
                let (est, _) = pauli_tomography_estimate(&counts, d, 0.0, 1e-9).unwrap();
                assert!(
                    est.matrix().sub(rho.matrix()).unwrap().max_abs() < 1e-3,
                    "inversion residual too large at d={d}"
                );
            }
        }
    }

    #[test]
    fn risk_reproducible_across_thread_counts() {
        let rho = DensityOperator::plus_state();
        let strategy = Strategy::classical(MeasurementBasis::computational(2), 0.5).unwrap();
        let g = Generator::log();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate_risk(&rho, &strategy, &g, 64, 200, 7, 0, EPS).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.risk_mean.to_bits(), b.risk_mean.to_bits());
        assert_eq!(a.risk_stderr.to_bits(), b.risk_stderr.to_bits());
    }

    #[test]
    fn classical_risk_on_maximally_mixed_state_vanishes() {
        // Frequency estimation of I/2 is unbiased; the quadratic risk is
        // pure multinomial variance and decays like 1/n.
        let rho = DensityOperator::maximally_mixed(2);
        let strategy = Strategy::classical(MeasurementBasis::computational(2), 0.5).unwrap();
        let g = Generator::quadratic();
        let r128 = estimate_risk(&rho, &strategy, &g, 128, 1000, 2, 0, EPS).unwrap();
        let r1024 = estimate_risk(&rho, &strategy, &g, 1024, 1000, 2, 1 << 32, EPS).unwrap();
        assert!(r128.risk_mean < 0.01);
        let ratio = r128.risk_mean / r1024.risk_mean;
        assert!(
            (4.0..16.0).contains(&ratio),
            "risk failed to decay like 1/n: ratio {ratio}"
        );
    }

    #[test]
    fn classical_risk_on_plus_state_hits_the_bias_floor() {
        let rho = DensityOperator::plus_state();
        let strategy = Strategy::classical(MeasurementBasis::computational(2), 0.5).unwrap();
        let g = Generator::log();
        let report = estimate_risk(&rho, &strategy, &g, 256, 400, 11, 0, EPS).unwrap();
        assert!((report.risk_mean - std::f64::consts::LN_2).abs() < 0.05);
    }

    #[test]
    fn oracle_risk_on_plus_state_is_small() {
        let rho = DensityOperator::plus_state();
        let strategy = Strategy::oracle(0.5).unwrap();
        let g = Generator::log();
        let report = estimate_risk(&rho, &strategy, &g, 256, 200, 11, 0, EPS).unwrap();
        assert!(report.risk_mean < 0.01, "risk {}", report.risk_mean);
    }

    #[test]
    fn incoherent_state_has_zero_paired_gap() {
        let z = MeasurementBasis::computational(2);
        let rho = DensityOperator::from_basis_probs(&z, &[0.3, 0.7]).unwrap();
        let g = Generator::log();
        let classical = Strategy::classical(z, 0.5).unwrap();
        let quantum = Strategy::oracle(0.5).unwrap();
        let gap = forecasting_gap(&rho, &g, 32, 200, 5, 0, &classical, &quantum, EPS).unwrap();
        assert!(gap.gap_mean.abs() < 1e-12);
        assert!(gap.gap_stderr <= gap.gap_stderr_unpaired + 1e-15);
    }

    #[test]
    fn per_trial_divergences_are_nonnegative() {
        let mut rng = SeededRng::new(3, 0);
        let rho = crate::random::random_mixed(2, &mut rng);
        let g = Generator::log();
        for strategy in [
            Strategy::classical(MeasurementBasis::computational(2), 0.5).unwrap(),
            Strategy::oracle(0.5).unwrap(),
            Strategy::pauli_tomography(0.5, None).unwrap(),
        ] {
            let (values, _) = risk_trials(&rho, &strategy, &g, 48, 100, 21, 0, EPS).unwrap();
            for v in values {
                assert!(v >= -1e-9);
            }
        }
    }

    #[test]
    fn scaling_study_first_cell_matches_direct_gap_call() {
        // Cell 0 uses stream base 0, so it must reproduce the standalone
        // paired-gap estimate with the same strategies and seed.
        let g = Generator::log();
        let rows = scaling_study(&[2], &[16], &g, Some(150), 77, EPS).unwrap();
        let rho = DensityOperator::fourier_state(2);
        let classical =
            Strategy::classical(MeasurementBasis::computational(2), DEFAULT_ALPHA).unwrap();
        let quantum = Strategy::oracle(DEFAULT_ALPHA).unwrap();
        let gap = forecasting_gap(&rho, &g, 16, 150, 77, 0, &classical, &quantum, EPS).unwrap();
        assert_eq!(rows[0].gap.to_bits(), gap.gap_mean.to_bits());
        assert_eq!(
            rows[0].classical_risk.to_bits(),
            gap.classical.risk_mean.to_bits()
        );
    }

    #[test]
    fn scaling_study_shape_and_bound_column() {
        let g = Generator::log();
        let rows = scaling_study(&[2, 3], &[16, 32], &g, Some(50), 9, EPS).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            let expect = (row.d - 1) as f64 / (2.0 * row.n as f64);
            assert!(
                (row.crmc_bound - expect).abs() < 1e-9,
                "bound {} vs {}",
                row.crmc_bound,
                expect
            );
        }
        // n doubled within a dimension halves the bound exactly.
        assert_eq!(rows[1].crmc_bound, 0.5 * rows[0].crmc_bound);
    }
}
