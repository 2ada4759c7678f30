//! `qresource`: runs the named experiments of the toolkit and writes their
//! results as CSV or JSON.

mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qresource::bell::BellKind;
use qresource::io::validate_file;
use qresource::{Error, Tolerances};
use serde::Serialize;
use serde_json::json;

use output::{emit, RunRecord};

#[derive(Parser, Debug)]
#[command(name = "qresource", version, about = "Quantum resource experiments: Bell tests under superselection, discord, quantumness of channels")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a state file or channel-spec file against its invariants.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct ValidateArgs {
    path: PathBuf,

    /// Tolerance for the Hermiticity, trace, positivity and norm checks.
    #[arg(long)]
    tol: Option<f64>,

    #[arg(long)]
    tol_supp: Option<f64>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Optimizer restarts; each experiment has its own default.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    restarts: Option<u64>,

    /// Eigenvalue cutoff for supports in relative entropies.
    #[arg(long)]
    tol_supp: Option<f64>,

    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// A state keyword (w, dicke, ghz-dualrail) or a state file.
    #[arg(long)]
    state: Option<String>,

    /// A channel-spec file.
    #[arg(long)]
    channel: Option<PathBuf>,

    #[arg(long, value_delimiter = ',')]
    parties: Vec<usize>,

    #[arg(long)]
    excitations: Option<usize>,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=2))]
    copies: Option<u64>,

    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu: Vec<f64>,

    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gamma: Vec<f64>,

    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sigma: Vec<f64>,

    /// Bell functional: chsh, svetlichny, bbgl, mabk or zb.
    #[arg(long)]
    functional: Option<BellKind>,

    /// Leave out wall-clock columns so repeated runs are byte-identical.
    #[arg(long)]
    omit_timing: bool,

    /// Worker threads for parallel restarts (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Experiment {
    #[value(name = "table5_2")]
    #[serde(rename = "table5_2")]
    Table5_2,
    #[value(name = "table5_3")]
    #[serde(rename = "table5_3")]
    Table5_3,
    #[value(name = "table5_1_check")]
    #[serde(rename = "table5_1_check")]
    Table5_1Check,
    #[value(name = "fig4_4")]
    #[serde(rename = "fig4_4")]
    Fig4_4,
    #[value(name = "fig6_2")]
    #[serde(rename = "fig6_2")]
    Fig6_2,
    #[value(name = "fig6_5")]
    #[serde(rename = "fig6_5")]
    Fig6_5,
    #[value(name = "quality_factors")]
    #[serde(rename = "quality_factors")]
    QualityFactors,
    #[value(name = "discord")]
    #[serde(rename = "discord")]
    Discord,
    #[value(name = "bell_optimize")]
    #[serde(rename = "bell_optimize")]
    BellOptimize,
    #[value(name = "quantumness")]
    #[serde(rename = "quantumness")]
    Quantumness,
    #[value(name = "nogo_check")]
    #[serde(rename = "nogo_check")]
    NogoCheck,
}

impl Experiment {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateArg {
    W,
    Dicke,
    GhzDualRail,
}

/// A validated run configuration, echoed into JSON output.
#[derive(Debug, Serialize)]
pub struct Config {
    pub experiment: Experiment,
    pub seed: u64,
    pub restarts: Option<usize>,
    pub tol_supp: Option<f64>,
    pub state: Option<String>,
    pub channel: Option<PathBuf>,
    pub parties: Vec<usize>,
    pub excitations: Option<usize>,
    pub copies: Option<usize>,
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sigma: Vec<f64>,
    pub functional: Option<BellKind>,
}

impl Config {
    fn state_keyword(&self) -> Option<StateArg> {
        match self.state.as_deref()? {
            "w" => Some(StateArg::W),
            "dicke" => Some(StateArg::Dicke),
            "ghz-dualrail" => Some(StateArg::GhzDualRail),
            _ => None,
        }
    }

    /// The built-in state family, if `--state` names one.
    pub fn state_kind(&self) -> Result<Option<StateArg>, Error> {
        match (&self.state, self.state_keyword()) {
            (None, _) => Ok(None),
            (Some(_), Some(k)) => Ok(Some(k)),
            (Some(s), None) => Err(Error::Parameter(format!("expected --state w, dicke or ghz-dualrail, got {s:?}"))),
        }
    }

    /// The state file, if `--state` is a path.
    pub fn state_path(&self) -> Result<Option<&Path>, Error> {
        match (&self.state, self.state_keyword()) {
            (None, _) => Ok(None),
            (Some(s), None) => Ok(Some(Path::new(s))),
            (Some(s), Some(_)) => Err(Error::Parameter(format!("this experiment reads a state file, got keyword {s:?}"))),
        }
    }
}

/// Failure classes, mapped to exit codes 1 and 2.
enum Failure {
    Validation(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Internal(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn check_inputs(args: &RunArgs) -> Result<(), Failure> {
    for (flag, values) in [("--mu", &args.mu), ("--gamma", &args.gamma), ("--sigma", &args.sigma)] {
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(Failure::Validation(format!("{flag} value {bad} is not finite")));
        }
    }
    if let Some(t) = args.tol_supp {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::Validation(format!("--tol-supp must be a nonnegative number, got {t}")));
        }
    }
    if let Some(p) = &args.channel {
        if !p.is_file() {
            return Err(Failure::Validation(format!("channel file {} does not exist", p.display())));
        }
    }
    Ok(())
}

fn run_experiment(args: RunArgs) -> Result<(), Failure> {
    let Some(experiment) = args.experiment else {
        return Err(Failure::Validation("missing --experiment (or use the validate subcommand)".into()));
    };
    check_inputs(&args)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
    }
    let cfg = Config {
        experiment,
        seed: args.seed,
        restarts: args.restarts.map(|r| r as usize),
        tol_supp: args.tol_supp,
        state: args.state,
        channel: args.channel,
        parties: args.parties,
        excitations: args.excitations,
        copies: args.copies.map(|c| c as usize),
        mu: args.mu,
        gamma: args.gamma,
        sigma: args.sigma,
        functional: args.functional,
    };
    if let Some(path) = cfg.state_path().ok().flatten() {
        if !path.is_file() {
            return Err(Failure::Validation(format!("state file {} does not exist", path.display())));
        }
    }

    let start = Instant::now();
    let mut outcome = experiments::run(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    if args.omit_timing {
        outcome.table.drop_column("wall_time_s");
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let name = experiment.name();
    let bytes = match args.format {
        Format::Csv => outcome.table.to_csv().map_err(|e| Failure::Internal(format!("csv: {e}")))?,
        Format::Json => {
            let mut record = RunRecord::new(&name, &cfg, &outcome.table, &outcome.warnings);
            record.summary = outcome.summary;
            if !args.omit_timing {
                record.wall_time_s = Some(wall);
            }
            let mut s = serde_json::to_string_pretty(&record).map_err(|e| Failure::Internal(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(&bytes, args.out.as_deref()).map_err(|e| Failure::Internal(format!("writing output: {e}")))
}

fn run_validate(args: ValidateArgs) -> Result<(), Failure> {
    let mut tol = Tolerances::default();
    if let Some(t) = args.tol {
        (tol.herm, tol.trace, tol.psd, tol.norm) = (t, t, t, t);
    }
    if let Some(t) = args.tol_supp {
        tol.supp = t;
    }
    tol.validate()?;
    let report = validate_file(&args.path, &tol).map_err(|e| Failure::Validation(format!("{}: {e}", args.path.display())))?;
    let mut table = output::Table::new(&["check", "passed", "detail"]);
    for c in &report.checks {
        table.push(vec![c.name.clone().into(), c.passed.to_string().into(), c.detail.clone().into()]);
    }
    let bytes = match args.format {
        Format::Csv => table.to_csv().map_err(|e| Failure::Internal(format!("csv: {e}")))?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "path": args.path,
                "kind": report.kind,
                "passed": report.passed(),
                "checks": report.checks,
            }))
            .map_err(|e| Failure::Internal(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(&bytes, args.out.as_deref()).map_err(|e| Failure::Internal(format!("writing output: {e}")))?;
    match report.checks.iter().find(|c| !c.passed) {
        Some(c) => Err(Failure::Validation(format!("{} invariant failed: {}", c.name, c.detail))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = std::panic::catch_unwind(move || match cli.command {
        Some(Command::Validate(v)) => run_validate(v),
        None => run_experiment(cli.run),
    })
    .unwrap_or_else(|_| Err(Failure::Internal("the run panicked".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
