//! Command execution and the result-record formats.
//!
//! Scalar commands emit a single JSON object with the resolved config echo,
//! the library version, and a flat string map of results. `advantage` emits
//! CSV with the version and config echo in leading `#` comment lines. Every
//! number is written with 17 significant digits (`{:.16e}`), or the literal
//! token `inf`, so records parse back to the exact same doubles and replay
//! can compare byte-for-byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qscore::estimation::{crmc_bound, fisher_report, Povm, RealMatrix};
use qscore::scoring::{score_report, Divergence};
use qscore::simulator::{estimate_risk, scaling_study};
use qscore::states::{coherence, dephase, von_neumann_entropy};

use crate::config::{
    parse_basis, parse_bound_mode, parse_family, parse_generator, parse_state, parse_strategy,
    ExperimentConfig,
};
use crate::CliError;

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trip-safe decimal rendering: 17 significant digits, or `inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    debug_assert!(!x.is_nan(), "reports must not contain NaN");
    format!("{x:.16e}")
}

fn fmt_divergence(d: Divergence) -> String {
    match d {
        Divergence::Finite(v) => fmt_f64(v),
        Divergence::Infinite => "inf".into(),
    }
}

/// Flat record for scalar commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub results: BTreeMap<String, String>,
}

/// What a command produces.
pub enum Output {
    Json(ResultRecord),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(record) => {
                let mut text = serde_json::to_string_pretty(record).expect("record serializes");
                text.push('\n');
                text
            }
            Output::Csv(text) => text.clone(),
        }
    }
}

/// Runs a resolved config and produces its output record.
pub fn execute(config: &ExperimentConfig) -> Result<Output, CliError> {
    match config.command.as_str() {
        "score" => run_score(config, true),
        "divergence" => run_score(config, false),
        "coherence" => run_coherence(config),
        "qfi" => run_qfi(config),
        "bound" => run_bound(config),
        "simulate" => run_simulate(config),
        "advantage" => run_advantage(config),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}

fn record(config: &ExperimentConfig, results: BTreeMap<String, String>) -> Output {
    Output::Json(ResultRecord {
        config: config.clone(),
        library_version: LIBRARY_VERSION.to_string(),
        results,
    })
}

fn run_score(config: &ExperimentConfig, full: bool) -> Result<Output, CliError> {
    let rho = parse_state(config.state.as_deref().unwrap())?;
    let sigma = parse_state(config.report.as_deref().unwrap())?;
    let g = parse_generator(config.generator.as_deref().unwrap())?;
    let eps = config.eps_floor.unwrap();
    let report = score_report(&rho, &sigma, &g, eps)?;
    let mut results = BTreeMap::new();
    if full {
        results.insert("expected_self".into(), fmt_f64(report.expected_self));
        results.insert("expected_report".into(), fmt_f64(report.expected_report));
        results.insert("gap".into(), fmt_f64(report.gap));
    }
    results.insert(
        "divergence_bregman".into(),
        fmt_divergence(report.divergence_bregman),
    );
    results.insert(
        "divergence_petz".into(),
        fmt_divergence(report.divergence_petz),
    );
    Ok(record(config, results))
}

fn run_coherence(config: &ExperimentConfig) -> Result<Output, CliError> {
    let rho = parse_state(config.state.as_deref().unwrap())?;
    let basis = parse_basis(config.basis.as_deref().unwrap(), rho.dim())?;
    let mut results = BTreeMap::new();
    results.insert("coherence".into(), fmt_f64(coherence(&rho, &basis)?));
    results.insert("entropy".into(), fmt_f64(von_neumann_entropy(&rho)));
    results.insert(
        "entropy_dephased".into(),
        fmt_f64(von_neumann_entropy(&dephase(&rho, &basis)?)),
    );
    Ok(record(config, results))
}

fn insert_matrix(results: &mut BTreeMap<String, String>, name: &str, m: &RealMatrix) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            results.insert(format!("{name}_{i}{j}"), fmt_f64(m.get(i, j)));
        }
    }
}

fn run_qfi(config: &ExperimentConfig) -> Result<Output, CliError> {
    let family = parse_family(config.family.as_deref().unwrap())?;
    let theta = config.theta.clone().unwrap();
    let eps = config.eps_floor.unwrap();
    let povm = match &config.basis {
        Some(name) => Some(Povm::from_basis(&parse_basis(name, family.dim())?)),
        None => None,
    };
    let report = fisher_report(&family, &theta, povm.as_ref(), eps)?;
    let mut results = BTreeMap::new();
    insert_matrix(&mut results, "qfi", &report.qfi);
    if let Some(cfi) = &report.cfi {
        insert_matrix(&mut results, "cfi", cfi);
    }
    results.insert("floored".into(), u64::from(report.floored).to_string());
    Ok(record(config, results))
}

fn run_bound(config: &ExperimentConfig) -> Result<Output, CliError> {
    let family = parse_family(config.family.as_deref().unwrap())?;
    let theta = config.theta.clone().unwrap();
    let g = parse_generator(config.generator.as_deref().unwrap())?;
    let n = config.n.unwrap();
    let mode = parse_bound_mode(config.bound_mode.as_deref().unwrap())?;
    let eps = config.eps_floor.unwrap();
    let bound = crmc_bound(&family, &theta, &g, n, eps)?;
    let mut results = BTreeMap::new();
    results.insert("bound".into(), fmt_f64(bound.value_for(mode)));
    results.insert("bound_hessian".into(), fmt_f64(bound.value));
    results.insert("bound_f2diag".into(), fmt_f64(bound.f2diag_value));
    results.insert("floored".into(), u64::from(bound.floored).to_string());
    insert_matrix(&mut results, "qfi", &bound.qfi);
    insert_matrix(&mut results, "hessian", &bound.hessian);
    Ok(record(config, results))
}

fn run_simulate(config: &ExperimentConfig) -> Result<Output, CliError> {
    let rho = parse_state(config.state.as_deref().unwrap())?;
    let g = parse_generator(config.generator.as_deref().unwrap())?;
    let basis = parse_basis(config.basis.as_deref().unwrap(), rho.dim())?;
    let strategy = parse_strategy(
        config.strategy.as_deref().unwrap(),
        &basis,
        config.alpha.unwrap(),
        config.eps_est,
    )?;
    let report = estimate_risk(
        &rho,
        &strategy,
        &g,
        config.n.unwrap(),
        config.trials.unwrap(),
        config.seed.unwrap(),
        0,
        config.eps_floor.unwrap(),
    )?;
    let mut results = BTreeMap::new();
    results.insert("risk_mean".into(), fmt_f64(report.risk_mean));
    results.insert("risk_stderr".into(), fmt_f64(report.risk_stderr));
    results.insert("n".into(), report.n.to_string());
    results.insert("trials".into(), report.trials.to_string());
    results.insert("strategy".into(), report.strategy.clone());
    results.insert("generator".into(), report.generator.clone());
    results.insert("clamp_events".into(), report.clamp_events.to_string());
    Ok(record(config, results))
}

pub const ADVANTAGE_COLUMNS: &str = "d,n,generator,classical_risk,classical_stderr,quantum_risk,\
quantum_stderr,gap,gap_stderr,coherence,predicted_gap,crmc_bound,clamp_events,seed";

fn run_advantage(config: &ExperimentConfig) -> Result<Output, CliError> {
    let dims = config.dims.clone().unwrap();
    let ns = config.ns.clone().unwrap();
    let g = parse_generator(config.generator.as_deref().unwrap())?;
    let rows = scaling_study(
        &dims,
        &ns,
        &g,
        config.trials,
        config.seed.unwrap(),
        config.eps_floor.unwrap(),
    )?;
    let mut text = String::new();
    text.push_str(&format!("# version: {LIBRARY_VERSION}\n"));
    text.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    ));
    text.push_str(ADVANTAGE_COLUMNS);
    text.push('\n');
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.d,
            row.n,
            row.generator,
            fmt_f64(row.classical_risk),
            fmt_f64(row.classical_stderr),
            fmt_f64(row.quantum_risk),
            fmt_f64(row.quantum_stderr),
            fmt_f64(row.gap),
            fmt_f64(row.gap_stderr),
            fmt_f64(row.coherence),
            fmt_f64(row.predicted_gap),
            fmt_f64(row.crmc_bound),
            row.clamp_events,
            row.seed
        ));
    }
    Ok(Output::Csv(text))
}

/// Re-executes the config echoed in a results file and compares the numeric
/// payload bitwise. A library-version mismatch warns and proceeds. Returns
/// `Ok(None)` on a byte-identical payload, `Ok(Some(description))` on the
/// first divergence.
pub fn replay(content: &str) -> Result<Option<String>, CliError> {
    if content.trim_start().starts_with('{') {
        let old: ResultRecord = serde_json::from_str(content)
            .map_err(|e| CliError::Config(format!("malformed results file: {e}")))?;
        if old.library_version != LIBRARY_VERSION {
            eprintln!(
                "warning: results were produced by version {}, replaying under {}",
                old.library_version, LIBRARY_VERSION
            );
        }
        let fresh = match execute(&old.config)? {
            Output::Json(r) => r,
            Output::Csv(_) => {
                return Err(CliError::Config(
                    "config in a JSON record resolved to a CSV command".into(),
                ))
            }
        };
        for (key, value) in &old.results {
            match fresh.results.get(key) {
                None => return Ok(Some(format!("key '{key}' missing on replay"))),
                Some(new) if new != value => {
                    return Ok(Some(format!(
                        "key '{key}' diverged: recorded {value}, replayed {new}"
                    )));
                }
                Some(_) => {}
            }
        }
        for key in fresh.results.keys() {
            if !old.results.contains_key(key) {
                return Ok(Some(format!("replay produced extra key '{key}'")));
            }
        }
        return Ok(None);
    }

    if content.starts_with("# version:") {
        let mut lines = content.lines();
        let version_line = lines.next().unwrap_or_default();
        let recorded_version = version_line.trim_start_matches("# version:").trim();
        if recorded_version != LIBRARY_VERSION {
            eprintln!(
                "warning: results were produced by version {recorded_version}, replaying under {LIBRARY_VERSION}"
            );
        }
        let config_line = lines
            .next()
            .ok_or_else(|| CliError::Config("missing config line in CSV record".into()))?;
        let config_json = config_line
            .strip_prefix("# config:")
            .ok_or_else(|| CliError::Config("missing config echo in CSV record".into()))?;
        let config: ExperimentConfig = serde_json::from_str(config_json.trim())
            .map_err(|e| CliError::Config(format!("malformed config echo: {e}")))?;
        let fresh = match execute(&config)? {
            Output::Csv(text) => text,
            Output::Json(_) => {
                return Err(CliError::Config(
                    "config in a CSV record resolved to a scalar command".into(),
                ))
            }
        };
        // Compare everything below the version line.
        let old_body: Vec<&str> = content.lines().skip(1).collect();
        let new_body: Vec<&str> = fresh.lines().skip(1).collect();
        for (i, (o, n)) in old_body.iter().zip(&new_body).enumerate() {
            if o != n {
                let (cell, col) = first_diff_cell(o, n);
                return Ok(Some(format!(
                    "line {} column '{}' diverged: recorded cell '{}', replayed '{}'",
                    i + 2,
                    col,
                    cell.0,
                    cell.1
                )));
            }
        }
        if old_body.len() != new_body.len() {
            return Ok(Some(format!(
                "row count diverged: recorded {}, replayed {}",
                old_body.len(),
                new_body.len()
            )));
        }
        return Ok(None);
    }

    Err(CliError::Config(
        "unrecognized results file (expected a JSON record or a CSV with a version header)".into(),
    ))
}

fn first_diff_cell<'a>(old: &'a str, new: &'a str) -> ((&'a str, &'a str), String) {
    let headers: Vec<&str> = ADVANTAGE_COLUMNS.split(',').collect();
    let old_cells: Vec<&str> = old.split(',').collect();
    let new_cells: Vec<&str> = new.split(',').collect();
    for (k, (o, n)) in old_cells.iter().zip(&new_cells).enumerate() {
        if o != n {
            let name = headers.get(k).copied().unwrap_or("?").to_string();
            return ((o, n), name);
        }
    }
    (("<line>", "<line>"), "?".into())
}
