use std::fmt::Write as _;

use diffrate::{
    diagnose_existence_scalar, perron_eigenpair, shoot_system, solve_production_prices, validate,
    Diagnosis, EconomyModel, FailureReason, Forcing, PerronOptions, PriceSystem, Reference,
    ScalarVariant, Trajectory, Variant, Vector,
};
use serde::Serialize;

use crate::error::{CliError, ErrorKind};
use crate::scenario::{Scenario, TargetSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectral,
    Steady,
    Simulate,
    Calibrate,
    Verify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectral => "spectral",
            Command::Steady => "steady",
            Command::Simulate => "simulate",
            Command::Calibrate => "calibrate",
            Command::Verify => "verify",
        }
    }
}

/// Result of one command on one scenario.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: Command,
    pub scenario: String,
    /// Pretty-printed JSON report.
    pub report: String,
    pub trajectory_csv: Option<String>,
    /// Set when a report was produced but the run still failed (solver
    /// non-convergence).
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}

#[derive(Serialize)]
struct Envelope<'a, B: Serialize> {
    command: Command,
    scenario: &'a str,
    warnings: Vec<String>,
    #[serde(flatten)]
    body: B,
}

fn render<B: Serialize>(command: Command, scenario: &Scenario, warnings: Vec<String>, body: B) -> String {
    let env = Envelope {
        command,
        scenario: &scenario.name,
        warnings,
        body,
    };
    serde_json::to_string_pretty(&env).expect("reports serialize")
}

/// CSV with header `t,P_1,…,P_n`, one row per recorded step.
pub fn trajectory_csv(traj: &Trajectory<f64>, n: usize) -> String {
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",P_{i}").unwrap();
    }
    out.push('\n');
    for (t, p) in traj.iter() {
        write!(out, "{t:.16e}").unwrap();
        for x in p.iter() {
            write!(out, ",{x:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn run(command: Command, scenario: &Scenario) -> Result<Outcome, CliError> {
    let model = scenario.model()?;
    let warnings: Vec<String> = validate(&model)
        .violations
        .iter()
        .map(|v| v.message.clone())
        .collect();
    match command {
        Command::Spectral => spectral(scenario, &model, warnings),
        Command::Steady => steady(scenario, &model, warnings),
        Command::Simulate => simulate(scenario, &model, warnings),
        Command::Calibrate => calibrate(scenario, &model, warnings),
        Command::Verify => verify(scenario, &model, warnings),
    }
}

fn done(command: Command, scenario: &Scenario, report: String, csv: Option<String>) -> Outcome {
    Outcome {
        command,
        scenario: scenario.name.clone(),
        report,
        trajectory_csv: csv,
        failure: None,
    }
}

#[derive(Serialize)]
struct SpectralReport {
    rho: f64,
    perron_vector: Vec<f64>,
    irreducible: bool,
    positive: bool,
    max_profit_rate: Option<f64>,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<&'static str>,
}

fn spectral(s: &Scenario, model: &EconomyModel<f64>, warnings: Vec<String>) -> Result<Outcome, CliError> {
    let opts = PerronOptions {
        allow_reducible: true,
        ..PerronOptions::default()
    };
    let r = perron_eigenpair(model.inputs(), &opts).map_err(CliError::model)?;
    let body = SpectralReport {
        rho: r.rho,
        perron_vector: r.perron_vector.into_vec(),
        irreducible: r.irreducible,
        positive: r.positive,
        max_profit_rate: r.max_profit_rate,
        iterations: r.iterations,
        warning: (!r.irreducible)
            .then_some("A is reducible: the dominant vector may have zero entries and need not be unique"),
    };
    Ok(done(Command::Spectral, s, render(Command::Spectral, s, warnings, body), None))
}

#[derive(Serialize)]
struct SteadyReport {
    p_star: Vec<f64>,
    wage_used: f64,
    normalization_residual: f64,
    positive: bool,
}

fn steady(s: &Scenario, model: &EconomyModel<f64>, warnings: Vec<String>) -> Result<Outcome, CliError> {
    let st = solve_production_prices(model).map_err(CliError::model)?;
    let body = SteadyReport {
        p_star: st.p_star.into_vec(),
        wage_used: st.wage_used,
        normalization_residual: st.normalization_residual,
        positive: st.positive,
    };
    Ok(done(Command::Steady, s, render(Command::Steady, s, warnings, body), None))
}

/// Target prices: given, or the steady state with the wage left free.
fn target(s: &Scenario, model: &EconomyModel<f64>) -> Result<Option<Vector<f64>>, CliError> {
    match &s.p_star {
        None => Ok(None),
        Some(TargetSpec::Prices(p)) => Ok(Some(Vector::from_vec(p.clone()))),
        Some(TargetSpec::Auto(_)) => {
            let st = solve_production_prices(&model.clone().with_wage(None)).map_err(|e| {
                CliError::new(ErrorKind::Model, format!("p_star \"auto\": {e}"))
            })?;
            Ok(Some(st.p_star))
        }
    }
}

fn system(s: &Scenario, model: &EconomyModel<f64>) -> Result<PriceSystem<f64>, CliError> {
    PriceSystem::new(model, s.forcing()?).map_err(CliError::model)
}

#[derive(Serialize)]
struct SimulateReport {
    rates: Vec<f64>,
    steps: usize,
    stride: usize,
    rows: usize,
    #[serde(rename = "P_at_T")]
    p_at_t: Vec<f64>,
    p_star: Option<Vec<f64>>,
    distance_to_p_star: Option<f64>,
}

fn simulate(s: &Scenario, model: &EconomyModel<f64>, warnings: Vec<String>) -> Result<Outcome, CliError> {
    let sys = system(s, model)?;
    let rates = s.run_rates();
    let steps = s.solver.steps.unwrap_or_else(|| sys.default_steps(&rates));
    let (state, traj) = sys
        .integrate(&rates, &s.p0, steps, s.solver.stride)
        .map_err(CliError::model)?;
    let p_star = target(s, model)?;
    let body = SimulateReport {
        distance_to_p_star: p_star.as_ref().map(|p| p.distance_inf(&state.prices)),
        rates: rates.into_vec(),
        steps,
        stride: s.solver.stride,
        rows: traj.len(),
        p_at_t: state.prices.into_vec(),
        p_star: p_star.map(Vector::into_vec),
    };
    let csv = trajectory_csv(&traj, s.order());
    Ok(done(Command::Simulate, s, render(Command::Simulate, s, warnings, body), Some(csv)))
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
enum DiagnosisReport {
    SolvableViable { v: f64 },
    SolvableNonviable { v: f64 },
    NoSolution,
    Indeterminate,
}

/// Closed-form existence check, available for one-sector scenarios whose
/// dynamics reduce to `dP/dt = v a P` or `dP/dt = (a − v) P` with `a > 0`.
fn scalar_diagnosis(
    s: &Scenario,
    model: &EconomyModel<f64>,
    forcing: &Forcing<f64>,
    p_star: f64,
) -> Option<DiagnosisReport> {
    if model.order() != 1 || forcing.as_constant().is_none_or(|f| f[0] != 0.0) {
        return None;
    }
    let (variant, a) = match model.variant() {
        Variant::Gravitation => (ScalarVariant::Gravitation, model.gravitation_matrix()[(0, 0)]),
        Variant::WagePrice => {
            let unpaid = model.wage() == Some(0.0) || model.labor()[0] == 0.0;
            if !unpaid {
                return None;
            }
            (ScalarVariant::WagePrice, model.markup_matrix()[(0, 0)])
        }
    };
    let d = diagnose_existence_scalar(variant, a, model.horizon(), s.p0[0], p_star).ok()?;
    Some(match d {
        Diagnosis::SolvableViable { v } => DiagnosisReport::SolvableViable { v },
        Diagnosis::SolvableNonviable { v } => DiagnosisReport::SolvableNonviable { v },
        Diagnosis::NoSolution => DiagnosisReport::NoSolution,
        Diagnosis::Indeterminate => DiagnosisReport::Indeterminate,
    })
}

#[derive(Serialize)]
struct CalibrateReport {
    v_solution: Vec<f64>,
    converged: bool,
    viable: bool,
    failure_reason: &'static str,
    iterations: usize,
    residual_history: Vec<f64>,
    step_lengths: Vec<f64>,
    steps: usize,
    tol: f64,
    damping: bool,
    p_star: Vec<f64>,
    final_prices: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnosis: Option<DiagnosisReport>,
}

fn calibrate(s: &Scenario, model: &EconomyModel<f64>, warnings: Vec<String>) -> Result<Outcome, CliError> {
    let p_star = target(s, model)?
        .ok_or_else(|| CliError::validation("p_star", "required for calibrate"))?;
    let sys = system(s, model)?;
    let opts = s.shoot_options();
    let r = shoot_system(&sys, &s.p0, &p_star, &s.initial_rates(), &opts).map_err(CliError::model)?;
    let diagnosis = scalar_diagnosis(s, model, sys.forcing(), p_star[0]);
    let failure = (!r.converged).then(|| {
        CliError::new(
            ErrorKind::Solver,
            format!(
                "shooting did not converge: {} after {} iterations, residual {:e}",
                r.failure_reason.as_str(),
                r.iterations,
                r.residual_history.last().copied().unwrap_or(f64::NAN)
            ),
        )
    });
    let csv = trajectory_csv(&r.final_trajectory, s.order());
    let body = CalibrateReport {
        v_solution: r.v_solution.into_vector().into_vec(),
        converged: r.converged,
        viable: r.viable,
        failure_reason: r.failure_reason.as_str(),
        iterations: r.iterations,
        residual_history: r.residual_history,
        step_lengths: r.step_lengths,
        steps: r.steps,
        tol: opts.tol,
        damping: opts.damping,
        p_star: p_star.into_vec(),
        final_prices: r.final_prices.map(Vector::into_vec),
        diagnosis,
    };
    debug_assert!(failure.is_some() == (r.failure_reason != FailureReason::None));
    Ok(Outcome {
        failure,
        ..done(Command::Calibrate, s, render(Command::Calibrate, s, warnings, body), Some(csv))
    })
}

#[derive(Serialize)]
struct VerifyReport {
    rates: Vec<f64>,
    reference: &'static str,
    steps: usize,
    discrepancy: f64,
    coarse_steps: usize,
    order_estimate: Option<f64>,
    growth_rate: Option<f64>,
    reference_prices: Vec<f64>,
    rk4_prices: Vec<f64>,
}

fn verify(s: &Scenario, model: &EconomyModel<f64>, warnings: Vec<String>) -> Result<Outcome, CliError> {
    let sys = system(s, model)?;
    if sys.forcing().as_constant().is_none() {
        return Err(CliError::new(
            ErrorKind::Model,
            "verify needs a constant forcing: no closed-form reference for sampled forcing",
        ));
    }
    let rates = s.run_rates();
    let steps = s.solver.steps.unwrap_or_else(|| sys.default_steps(&rates));
    let c = sys.closed_form_check(&rates, &s.p0, steps).map_err(CliError::model)?;
    let body = VerifyReport {
        growth_rate: sys.growth_rate(&rates).ok(),
        rates: rates.into_vec(),
        reference: match c.reference {
            Reference::ClosedForm => "closed_form",
            Reference::FineRk4 => "fine_rk4",
        },
        steps: c.steps,
        discrepancy: c.discrepancy,
        coarse_steps: c.coarse_steps,
        order_estimate: c.order_estimate,
        reference_prices: c.reference_prices.into_vec(),
        rk4_prices: c.rk4_prices.into_vec(),
    };
    Ok(done(Command::Verify, s, render(Command::Verify, s, warnings, body), None))
}
