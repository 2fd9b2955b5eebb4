//! Batch front end for `diffrate`: scenario JSON in, JSON reports and CSV
//! trajectories out.
//!
//! Exit codes: 0 success, 2 usage/parse/validation, 3 model or numerical
//! failure, 4 calibration did not converge (report still written).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod scenario;

use std::collections::HashSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use commands::{run, trajectory_csv, Command, Outcome};
pub use error::{CliError, ErrorKind};
pub use scenario::{Overrides, Scenario};

#[derive(Debug, Parser)]
#[command(name = "diffrate", version, about = "Calibrate branch differentiation rates of price dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Dominant eigenpair of A and the maximum profit rate
    Spectral(RunArgs),
    /// Steady-state (production) prices
    Steady(RunArgs),
    /// Integrate prices at fixed rates; writes the trajectory CSV
    Simulate(RunArgs),
    /// Solve for the rates that carry P0 to p_star at the horizon
    Calibrate(RunArgs),
    /// Compare RK4 with the closed-form solution
    Verify(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario files; several run as a batch
    #[arg(required = true)]
    pub scenarios: Vec<PathBuf>,
    /// Directory for `<name>.<command>.json` and `<name>.trajectory.csv`
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub no_damping: bool,
    /// Rates for simulate/verify, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rates: Option<Vec<f64>>,
    /// Scenarios run concurrently in batch mode
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

impl Cmd {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            Cmd::Spectral(a) => (Command::Spectral, a),
            Cmd::Steady(a) => (Command::Steady, a),
            Cmd::Simulate(a) => (Command::Simulate, a),
            Cmd::Calibrate(a) => (Command::Calibrate, a),
            Cmd::Verify(a) => (Command::Verify, a),
        }
    }
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            steps: self.steps,
            tol: self.tol,
            stride: self.stride,
            no_damping: self.no_damping,
            rates: self.rates.clone(),
        }
    }
}

/// Loads, validates and runs one scenario file.
pub fn run_file(command: Command, path: &Path, overrides: &Overrides) -> Result<Outcome, CliError> {
    let mut scenario = Scenario::load(path)?;
    scenario.apply(overrides)?;
    run(command, &scenario)
}

/// Writes the report (and trajectory, if any) under `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::new(ErrorKind::Io, format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let report = dir.join(format!("{}.{}.json", outcome.scenario, outcome.command.as_str()));
    std::fs::write(report, format!("{}\n", outcome.report)).map_err(io)?;
    if let Some(csv) = &outcome.trajectory_csv {
        std::fs::write(dir.join(format!("{}.trajectory.csv", outcome.scenario)), csv).map_err(io)?;
    }
    Ok(())
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let err = CliError::new(ErrorKind::Usage, e.to_string().trim_end().to_string());
            let _ = writeln!(stderr, "{}", err.to_json(None));
            return err.exit_code();
        }
    };
    let (command, args) = cli.command.split();
    let overrides = args.overrides();

    let run_one = |path: &PathBuf| -> Result<Outcome, CliError> {
        let outcome = run_file(command, path, &overrides)?;
        if let Some(dir) = &args.out {
            write_outputs(&outcome, dir)?;
        }
        Ok(outcome)
    };

    if args.jobs == 0 {
        let err = CliError::validation("--jobs", "must be at least 1");
        let _ = writeln!(stderr, "{}", err.to_json(None));
        return err.exit_code();
    }
    let unique: HashSet<&PathBuf> = args.scenarios.iter().collect();
    if unique.len() != args.scenarios.len() {
        let err = CliError::validation("scenarios", "scenario file listed twice");
        let _ = writeln!(stderr, "{}", err.to_json(None));
        return err.exit_code();
    }

    let results: Vec<Result<Outcome, CliError>> = if args.scenarios.len() == 1 {
        vec![run_one(&args.scenarios[0])]
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build() {
            Ok(pool) => pool.install(|| args.scenarios.par_iter().map(run_one).collect()),
            Err(e) => {
                let err = CliError::new(ErrorKind::Usage, format!("thread pool: {e}"));
                let _ = writeln!(stderr, "{}", err.to_json(None));
                return err.exit_code();
            }
        }
    };

    let batch = args.scenarios.len() > 1;
    let mut code = 0;
    let mut reports = Vec::new();
    for (path, result) in args.scenarios.iter().zip(results) {
        let label = path.display().to_string();
        match result {
            Ok(outcome) => {
                if let Some(err) = &outcome.failure {
                    let _ = writeln!(stderr, "{}", err.to_json(Some(&outcome.scenario)));
                }
                code = code.max(outcome.exit_code());
                reports.push(outcome.report);
            }
            Err(err) => {
                let _ = writeln!(stderr, "{}", err.to_json(Some(&label)));
                code = code.max(err.exit_code());
            }
        }
    }
    if batch {
        let _ = writeln!(stdout, "[\n{}\n]", reports.join(",\n"));
    } else if let Some(report) = reports.first() {
        let _ = writeln!(stdout, "{report}");
    }
    code
}
