//! Command-line front end: proper-scoring evaluations, Fisher information,
//! risk bounds, and Monte Carlo forecasting experiments over quantum states.
//!
//! One command per invocation; flags override config-file fields. Scalar
//! commands print a JSON record, `advantage` prints CSV; both embed the
//! resolved config so `replay` can verify any results file bit-for-bit.
//!
//! Exit codes: 0 success, 1 replay mismatch, 2 configuration or validation
//! error, 3 I/O error.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use run::{execute, replay, Output};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(err) => write!(f, "{err}"),
        }
    }
}

impl From<qscore::Error> for CliError {
    fn from(err: qscore::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qscore",
    version,
    about = "Proper scoring rules, Fisher information, and forecasting-risk experiments for quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// State spec: plus | mixed | mixed(p) | fourier(d) | x,y,z Bloch | JSON matrix.
    #[arg(long)]
    state: Option<String>,
    /// Reported state spec (same forms as --state).
    #[arg(long)]
    report: Option<String>,
    /// Generator name: log | quadratic.
    #[arg(long)]
    generator: Option<String>,
    /// Basis name: Z | X | Y | fourier.
    #[arg(long)]
    basis: Option<String>,
    /// Family preset: bloch-rotation | bloch-circle(r) | diagonal | bloch-full | spectrum(d).
    #[arg(long)]
    family: Option<String>,
    /// Family parameters, comma-separated.
    #[arg(long, value_parser = parse_theta)]
    theta: Option<std::vec::Vec<f64>>,
    /// Strategy for simulate: classical | oracle | pauli.
    #[arg(long)]
    strategy: Option<String>,
    /// Copies per trial.
    #[arg(long)]
    n: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Dimensions for advantage, comma-separated.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<std::vec::Vec<usize>>,
    /// Copy counts for advantage, comma-separated.
    #[arg(long, value_parser = parse_ns)]
    ns: Option<std::vec::Vec<u64>>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Eigenvalue floor for singular generators.
    #[arg(long = "eps-floor")]
    eps_floor: Option<f64>,
    /// Estimator eigenvalue floor (default 1/(2n)).
    #[arg(long = "eps-est")]
    eps_est: Option<f64>,
    /// Add-α smoothing for count estimates.
    #[arg(long)]
    alpha: Option<f64>,
    /// Bound mode: hessian | f2diag.
    #[arg(long = "bound-mode")]
    bound_mode: Option<String>,
}

fn parse_theta(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_ns(s: &str) -> Result<Vec<u64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| e.to_string()))
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Expected scores and divergences for a (truth, report) pair.
    Score(CommonArgs),
    /// Bregman and Petz divergences only.
    Divergence(CommonArgs),
    /// Relative entropy of coherence in a basis.
    Coherence(CommonArgs),
    /// Quantum (and optionally classical) Fisher information of a family.
    Qfi(CommonArgs),
    /// Curvature/Fisher minimax risk bound.
    Bound(CommonArgs),
    /// Monte Carlo risk of one strategy.
    Simulate(CommonArgs),
    /// Classical-vs-quantum scaling grid (CSV).
    Advantage(CommonArgs),
    /// Re-run the config echoed in a results file and verify the payload.
    Replay {
        /// Results file produced by a previous run.
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    let (name, args) = match cli.command {
        Command::Score(a) => ("score", a),
        Command::Divergence(a) => ("divergence", a),
        Command::Coherence(a) => ("coherence", a),
        Command::Qfi(a) => ("qfi", a),
        Command::Bound(a) => ("bound", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Advantage(a) => ("advantage", a),
        Command::Replay { file } => {
            let content = std::fs::read_to_string(&file)?;
            return match replay(&content)? {
                None => {
                    println!("replay ok: payload is bitwise identical");
                    Ok(ExitCode::SUCCESS)
                }
                Some(diff) => {
                    println!("replay mismatch: {diff}");
                    Ok(ExitCode::from(1))
                }
            };
        }
    };

    let config = build_config(name, args.clone())?.resolve()?;
    let output = execute(&config)?;
    let rendered = output.render();
    match &args.out {
        Some(path) => std::fs::write(path, rendered.as_bytes())?,
        None => print!("{rendered}"),
    }
    if let Output::Json(record) = &output {
        debug_assert!(record.config == config);
    }
    Ok(ExitCode::SUCCESS)
}

/// Loads the config file (when given) and overrides with explicit flags.
fn build_config(command: &str, args: CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let parsed: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config file: {e}")))?;
            if parsed.command != command {
                return Err(CliError::Config(format!(
                    "config file is for command '{}', invoked as '{command}'",
                    parsed.command
                )));
            }
            parsed
        }
        None => ExperimentConfig::empty(command),
    };
    if args.state.is_some() {
        config.state = args.state;
    }
    if args.report.is_some() {
        config.report = args.report;
    }
    if args.generator.is_some() {
        config.generator = args.generator;
    }
    if args.basis.is_some() {
        config.basis = args.basis;
    }
    if args.family.is_some() {
        config.family = args.family;
    }
    if args.theta.is_some() {
        config.theta = args.theta;
    }
    if args.strategy.is_some() {
        config.strategy = args.strategy;
    }
    if args.n.is_some() {
        config.n = args.n;
    }
    if args.trials.is_some() {
        config.trials = args.trials;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.dims.is_some() {
        config.dims = args.dims;
    }
    if args.ns.is_some() {
        config.ns = args.ns;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.display().to_string());
    }
    if args.eps_floor.is_some() {
        config.eps_floor = args.eps_floor;
    }
    if args.eps_est.is_some() {
        config.eps_est = args.eps_est;
    }
    if args.alpha.is_some() {
        config.alpha = args.alpha;
    }
    if args.bound_mode.is_some() {
        config.bound_mode = args.bound_mode;
    }
    Ok(config)
}
