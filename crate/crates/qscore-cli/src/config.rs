//! Experiment configuration: the strict-parsed record that both the flag
//! surface and JSON config files resolve into, plus the object parsers for
//! states, generators, bases, and families.

use serde::{Deserialize, Serialize};

use qscore::estimation::{BoundMode, ParametrizedFamily};
use qscore::scoring::Generator;
use qscore::simulator::{default_trials, Strategy, DEFAULT_ALPHA};
use qscore::states::{bloch_to_density, BlochVector, DensityOperator, MeasurementBasis};
use qscore::ComplexMatrix;

use crate::CliError;

/// One experiment, fully resolved. Unknown keys in config files are
/// rejected; every field that affects the computation is echoed into the
/// output so a run can be replayed from its own record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<u64>>,
    /// Output path. Accepted from config files but never echoed: it does not
    /// affect the numeric payload, and identical experiments must produce
    /// identical bytes regardless of where they are written.
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_est: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_mode: Option<String>,
}

impl ExperimentConfig {
    pub fn empty(command: &str) -> Self {
        Self {
            command: command.to_string(),
            state: None,
            report: None,
            generator: None,
            basis: None,
            family: None,
            theta: None,
            strategy: None,
            n: None,
            trials: None,
            seed: None,
            dims: None,
            ns: None,
            out: None,
            eps_floor: None,
            eps_est: None,
            alpha: None,
            bound_mode: None,
        }
    }

    /// Fills the defaults that the command actually consumes, so the echoed
    /// config replays identically.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        match self.command.as_str() {
            "score" | "divergence" => {
                require(&self.state, "state")?;
                require(&self.report, "report")?;
                self.generator.get_or_insert_with(|| "log".into());
                self.eps_floor.get_or_insert(qscore::DEFAULT_EPS_FLOOR);
            }
            "coherence" => {
                require(&self.state, "state")?;
                self.basis.get_or_insert_with(|| "Z".into());
            }
            "qfi" => {
                self.family.get_or_insert_with(|| "bloch-rotation".into());
                self.theta.get_or_insert_with(|| vec![0.0]);
                self.eps_floor.get_or_insert(qscore::DEFAULT_EPS_FLOOR);
            }
            "bound" => {
                self.family.get_or_insert_with(|| "bloch-rotation".into());
                self.theta.get_or_insert_with(|| vec![0.0]);
                self.generator.get_or_insert_with(|| "log".into());
                self.n.get_or_insert(1);
                self.bound_mode.get_or_insert_with(|| "hessian".into());
                self.eps_floor.get_or_insert(qscore::DEFAULT_EPS_FLOOR);
            }
            "simulate" => {
                require(&self.state, "state")?;
                self.strategy.get_or_insert_with(|| "classical".into());
                self.basis.get_or_insert_with(|| "Z".into());
                self.generator.get_or_insert_with(|| "log".into());
                self.n.get_or_insert(1);
                self.seed.get_or_insert(0);
                self.alpha.get_or_insert(DEFAULT_ALPHA);
                self.eps_floor.get_or_insert(qscore::DEFAULT_EPS_FLOOR);
                if self.trials.is_none() {
                    let dim = parse_state(self.state.as_deref().unwrap())?.dim();
                    self.trials = Some(default_trials(dim));
                }
            }
            "advantage" => {
                self.dims.get_or_insert_with(|| vec![2]);
                self.ns.get_or_insert_with(|| vec![256]);
                self.generator.get_or_insert_with(|| "log".into());
                self.seed.get_or_insert(0);
                self.eps_floor.get_or_insert(qscore::DEFAULT_EPS_FLOOR);
            }
            other => {
                return Err(CliError::Config(format!("unknown command '{other}'")));
            }
        }
        Ok(self)
    }
}

fn require(field: &Option<String>, name: &str) -> Result<(), CliError> {
    if field.is_none() {
        return Err(CliError::Config(format!("missing required field '{name}'")));
    }
    Ok(())
}

/// State specs: named presets ("plus", "mixed", "mixed(p)", "fourier(d)"),
/// Bloch triples ("bloch:x,y,z" or "x,y,z"), or a JSON matrix literal with
/// entries either real numbers or [re, im] pairs.
pub fn parse_state(spec: &str) -> Result<DensityOperator, CliError> {
    let spec = spec.trim();
    if spec == "plus" {
        return Ok(DensityOperator::plus_state());
    }
    if spec == "mixed" {
        return Ok(DensityOperator::maximally_mixed(2));
    }
    if let Some(arg) = call_arg(spec, "mixed") {
        let p: f64 = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad mixing weight in '{spec}'")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Config(format!(
                "mixing weight {p} outside [0, 1]"
            )));
        }
        let plus = DensityOperator::plus_state();
        let center = DensityOperator::maximally_mixed(2);
        return plus.mix(&center, p).map_err(CliError::from);
    }
    if let Some(arg) = call_arg(spec, "fourier") {
        let d: usize = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad dimension in '{spec}'")))?;
        if !(2..=16).contains(&d) {
            return Err(CliError::Config(format!(
                "fourier dimension {d} out of range"
            )));
        }
        return Ok(DensityOperator::fourier_state(d));
    }
    if spec.starts_with('[') {
        return parse_matrix_state(spec);
    }
    let triple = spec.strip_prefix("bloch:").unwrap_or(spec);
    let parts: Vec<&str> = triple.split(',').collect();
    if parts.len() == 3 {
        let mut r = [0.0f64; 3];
        for (slot, part) in r.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad Bloch component in '{spec}'")))?;
        }
        let bloch = BlochVector::new(r[0], r[1], r[2])?;
        return Ok(bloch_to_density(&bloch)?);
    }
    Err(CliError::Config(format!(
        "unrecognized state spec '{spec}'"
    )))
}

fn parse_matrix_state(spec: &str) -> Result<DensityOperator, CliError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Real(f64),
        Complex([f64; 2]),
    }
    let rows: Vec<Vec<Entry>> = serde_json::from_str(spec)
        .map_err(|e| CliError::Config(format!("bad matrix literal: {e}")))?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::Config("matrix literal must be square".into()));
    }
    let mut entries = Vec::with_capacity(d * d);
    for row in rows {
        for e in row {
            entries.push(match e {
                Entry::Real(x) => num_complex::Complex64::new(x, 0.0),
                Entry::Complex([re, im]) => num_complex::Complex64::new(re, im),
            });
        }
    }
    let m = ComplexMatrix::from_entries(d, entries)?;
    Ok(DensityOperator::new(m)?)
}

fn call_arg<'a>(spec: &'a str, name: &str) -> Option<&'a str> {
    spec.strip_prefix(name)?
        .strip_prefix('(')?
        .strip_suffix(')')
}

pub fn parse_generator(name: &str) -> Result<Generator, CliError> {
    Ok(Generator::from_name(name)?)
}

pub fn parse_basis(name: &str, dim: usize) -> Result<MeasurementBasis, CliError> {
    Ok(MeasurementBasis::from_name(name, dim)?)
}

/// Family presets: "bloch-rotation" (one-parameter equatorial rotation of
/// |+⟩⟨+|), "bloch-circle(r)", "diagonal" (diag(θ, 1−θ)), "bloch-full"
/// (three-parameter qubit), "spectrum(d)".
pub fn parse_family(name: &str) -> Result<ParametrizedFamily, CliError> {
    if name == "bloch-rotation" {
        return Ok(ParametrizedFamily::bloch_rotation());
    }
    if name == "diagonal" {
        return Ok(ParametrizedFamily::diagonal_qubit());
    }
    if name == "bloch-full" {
        return Ok(ParametrizedFamily::qubit_bloch_full());
    }
    if let Some(arg) = call_arg(name, "bloch-circle") {
        let r: f64 = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad radius in '{name}'")))?;
        if !(0.0..=1.0).contains(&r) {
            return Err(CliError::Config(format!("radius {r} outside [0, 1]")));
        }
        return Ok(ParametrizedFamily::bloch_circle(r));
    }
    if let Some(arg) = call_arg(name, "spectrum") {
        let d: usize = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad dimension in '{name}'")))?;
        if !(2..=16).contains(&d) {
            return Err(CliError::Config(format!(
                "spectrum dimension {d} out of range"
            )));
        }
        return Ok(ParametrizedFamily::spectrum(d));
    }
    Err(CliError::Config(format!("unknown family '{name}'")))
}

pub fn parse_bound_mode(name: &str) -> Result<BoundMode, CliError> {
    match name {
        "hessian" => Ok(BoundMode::Hessian),
        "f2diag" => Ok(BoundMode::F2Diag),
        other => Err(CliError::Config(format!(
            "unknown bound mode '{other}' (expected hessian or f2diag)"
        ))),
    }
}

/// Strategy specs for `simulate`: "classical" (with the configured basis),
/// "oracle", "pauli".
pub fn parse_strategy(
    name: &str,
    basis: &MeasurementBasis,
    alpha: f64,
    eps_est: Option<f64>,
) -> Result<Strategy, CliError> {
    match name {
        "classical" => Ok(Strategy::classical(basis.clone(), alpha)?),
        "oracle" => Ok(Strategy::oracle(alpha)?),
        "pauli" => Ok(Strategy::pauli_tomography(alpha, eps_est)?),
        other => Err(CliError::Config(format!(
            "unknown strategy '{other}' (expected classical, oracle, or pauli)"
        ))),
    }
}
