//! Shooting for the differentiation rates: find `V` with
//! `G(V) = P(T, V) − P* = 0` by Newton–Kantorovich iteration, where the
//! Jacobian `H(V) = ∂P(T)/∂V` is the terminal sensitivity matrix.

use std::fmt;

use crate::dynamics::{Forcing, PriceSystem, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{gauss_solve, Matrix, Vector};
use crate::model::EconomyModel;
use crate::scalar::Scalar;

/// Per-branch differentiation rates `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector<T>(Vector<T>);

impl<T: Scalar> RateVector<T> {
    pub fn new(rates: Vector<T>) -> Result<Self> {
        if !rates.is_finite() {
            return Err(Error::NonFinite("rates"));
        }
        Ok(Self(rates))
    }

    /// All-ones rates, the default starting point.
    pub fn ones(n: usize) -> Self {
        Self(Vector::ones(n))
    }

    /// Every rate strictly positive.
    pub fn is_viable(&self) -> bool {
        self.0.iter().all(|&v| v > T::zero())
    }

    pub fn as_vector(&self) -> &Vector<T> {
        &self.0
    }

    pub fn into_vector(self) -> Vector<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T> std::ops::Deref for RateVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Why a shooting run stopped without converging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    None,
    MaxIter,
    SingularJacobian,
    /// Residual grew past `divergence_factor` times its initial value.
    Diverged,
    NonFinite,
    /// Backtracking found no step with sufficient decrease.
    Stalled,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::None => "NONE",
            FailureReason::MaxIter => "MAX_ITER",
            FailureReason::SingularJacobian => "SINGULAR_JACOBIAN",
            FailureReason::Diverged => "DIVERGED",
            FailureReason::NonFinite => "NONFINITE",
            FailureReason::Stalled => "STALLED",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions<T> {
    /// RK4 steps; `None` picks the system default at the initial rates and
    /// keeps it fixed for the whole run.
    pub steps: Option<usize>,
    /// Target for `‖G‖∞`.
    pub tol: T,
    pub max_iter: usize,
    /// Backtracking on `‖G‖∞`; off reproduces the pure Newton step.
    pub damping: bool,
    pub stride: usize,
    pub max_halvings: usize,
    pub divergence_factor: T,
}

impl<T: Scalar> Default for ShootOptions<T> {
    fn default() -> Self {
        Self {
            steps: None,
            tol: T::lit(1e-10).max(T::lit(1e3) * T::epsilon()),
            max_iter: 50,
            damping: true,
            stride: 1,
            max_halvings: 30,
            divergence_factor: T::lit(1e6),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult<T> {
    pub v_solution: RateVector<T>,
    pub converged: bool,
    /// `‖G(v_k)‖∞` for every accepted iterate, starting with `v_0`.
    pub residual_history: Vec<T>,
    pub iterations: usize,
    /// Accepted iterates `v_0, v_1, …`.
    pub iterates: Vec<Vector<T>>,
    /// Damping factor applied to each accepted Newton direction.
    pub step_lengths: Vec<T>,
    pub final_trajectory: Trajectory<T>,
    /// `P(T)` at `v_solution`, when the last integration succeeded.
    pub final_prices: Option<Vector<T>>,
    pub viable: bool,
    pub failure_reason: FailureReason,
    pub steps: usize,
}

struct Evaluation<T> {
    residual: Vector<T>,
    norm: T,
    jacobian: Matrix<T>,
    prices: Vector<T>,
    trajectory: Trajectory<T>,
}

fn evaluate<T: Scalar>(
    system: &PriceSystem<T>,
    rates: &[T],
    p0: &[T],
    p_star: &[T],
    steps: usize,
    stride: usize,
) -> Result<Option<Evaluation<T>>> {
    match system.integrate(rates, p0, steps, stride) {
        Ok((state, trajectory)) => {
            let residual: Vector<T> = state
                .prices
                .iter()
                .zip(p_star)
                .map(|(&p, &q)| p - q)
                .collect();
            let norm = residual.norm_inf();
            Ok(Some(Evaluation {
                residual,
                norm,
                jacobian: state.sensitivities,
                prices: state.prices,
                trajectory,
            }))
        }
        Err(Error::NonFiniteState { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Solves `P(T, V) = p_star` for `V` starting from `v0`.
///
/// Input errors (dimensions, options, model construction) are returned as
/// `Err`; solver failures are reported through
/// [`ShootingResult::failure_reason`].
pub fn shoot<T: Scalar>(
    model: &EconomyModel<T>,
    p0: &[T],
    p_star: &[T],
    forcing: &Forcing<T>,
    v0: &RateVector<T>,
    opts: &ShootOptions<T>,
) -> Result<ShootingResult<T>> {
    let system = PriceSystem::new(model, forcing.clone())?;
    shoot_system(&system, p0, p_star, v0, opts)
}

/// [`shoot`] on an already assembled [`PriceSystem`].
pub fn shoot_system<T: Scalar>(
    system: &PriceSystem<T>,
    p0: &[T],
    p_star: &[T],
    v0: &RateVector<T>,
    opts: &ShootOptions<T>,
) -> Result<ShootingResult<T>> {
    let n = system.order();
    for len in [p0.len(), p_star.len(), v0.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidParams("tol must be positive".into()));
    }
    if opts.stride == 0 {
        return Err(Error::InvalidParams("stride must be at least 1".into()));
    }
    if !p_star.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("target prices"));
    }
    let steps = opts.steps.unwrap_or_else(|| system.default_steps(v0));
    if steps == 0 {
        return Err(Error::InvalidParams("steps must be at least 1".into()));
    }

    let mut rates = v0.as_vector().clone();
    let mut result = ShootingResult {
        v_solution: v0.clone(),
        converged: false,
        residual_history: Vec::new(),
        iterations: 0,
        iterates: vec![rates.clone()],
        step_lengths: Vec::new(),
        final_trajectory: Trajectory::default(),
        final_prices: None,
        viable: v0.is_viable(),
        failure_reason: FailureReason::None,
        steps,
    };

    let Some(mut current) = evaluate(system, &rates, p0, p_star, steps, opts.stride)? else {
        result.residual_history.push(T::infinity());
        result.failure_reason = FailureReason::NonFinite;
        return Ok(result);
    };
    result.residual_history.push(current.norm);
    let initial_norm = current.norm;

    let failure = loop {
        if current.norm <= opts.tol {
            break FailureReason::None;
        }
        if result.iterations >= opts.max_iter {
            break FailureReason::MaxIter;
        }
        let rhs = -&current.residual;
        let direction = match gauss_solve(&current.jacobian, &rhs) {
            Ok(d) => d,
            Err(Error::SingularMatrix { .. }) | Err(Error::NonFinite(_)) => {
                break FailureReason::SingularJacobian
            }
            Err(e) => return Err(e),
        };

        let mut alpha = T::one();
        let mut accepted = None;
        let mut saw_nonfinite = false;
        let halvings = if opts.damping { opts.max_halvings } else { 0 };
        for _ in 0..=halvings {
            let trial: Vector<T> = rates
                .iter()
                .zip(direction.iter())
                .map(|(&v, &d)| v + alpha * d)
                .collect();
            match evaluate(system, &trial, p0, p_star, steps, opts.stride)? {
                Some(eval) => {
                    let sufficient = eval.norm
                        <= (T::one() - T::lit(1e-4) * alpha) * current.norm;
                    if !opts.damping || sufficient {
                        accepted = Some((trial, eval));
                        break;
                    }
                }
                None => saw_nonfinite = true,
            }
            alpha = alpha * T::lit(0.5);
        }

        let Some((trial, eval)) = accepted else {
            break if saw_nonfinite && !opts.damping {
                FailureReason::NonFinite
            } else {
                FailureReason::Stalled
            };
        };

        rates = trial;
        current = eval;
        result.iterations += 1;
        result.residual_history.push(current.norm);
        result.iterates.push(rates.clone());
        result.step_lengths.push(alpha);

        if !current.norm.is_finite() {
            break FailureReason::NonFinite;
        }
        if current.norm > opts.divergence_factor * initial_norm {
            break FailureReason::Diverged;
        }
    };

    result.converged = failure == FailureReason::None;
    result.failure_reason = failure;
    result.viable = rates.iter().all(|&v| v > T::zero());
    result.v_solution = RateVector(rates);
    result.final_prices = Some(current.prices);
    result.final_trajectory = current.trajectory;
    Ok(result)
}

/// Terminal sensitivity matrix `H(V) = [∂P_i(T)/∂v_j]` with default steps.
pub fn sensitivity_report<T: Scalar>(
    model: &EconomyModel<T>,
    rates: &RateVector<T>,
    p0: &[T],
    forcing: &Forcing<T>,
) -> Result<Matrix<T>> {
    let system = PriceSystem::new(model, forcing.clone())?;
    let steps = system.default_steps(rates);
    let (state, _) = system.integrate(rates, p0, steps, usize::MAX)?;
    Ok(state.sensitivities)
}

/// Scalar model used for the existence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarVariant {
    /// `dP/dt = v a P`.
    Gravitation,
    /// `dP/dt = (a − v) P`.
    WagePrice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnosis<T> {
    SolvableViable { v: T },
    SolvableNonviable { v: T },
    /// `P(0)` and `P*` of opposite sign, or exactly one of them zero.
    NoSolution,
    /// `P(0) = P* = 0`: every rate is a solution.
    Indeterminate,
}

/// Closed-form solvability of the scalar problem `P(T) = p_star`.
pub fn diagnose_existence_scalar<T: Scalar>(
    variant: ScalarVariant,
    a: T,
    horizon: T,
    p0: T,
    p_star: T,
) -> Result<Diagnosis<T>> {
    if !(a > T::zero()) || !(horizon > T::zero()) {
        return Err(Error::InvalidParams("need a > 0 and T > 0".into()));
    }
    if !p0.is_finite() || !p_star.is_finite() {
        return Err(Error::NonFinite("scalar prices"));
    }
    if p0 == T::zero() && p_star == T::zero() {
        return Ok(Diagnosis::Indeterminate);
    }
    if p0 * p_star <= T::zero() {
        return Ok(Diagnosis::NoSolution);
    }
    let log_ratio = (p_star / p0).ln();
    let v = match variant {
        ScalarVariant::Gravitation => log_ratio / (horizon * a),
        ScalarVariant::WagePrice => a - log_ratio / horizon,
    };
    Ok(if v > T::zero() {
        Diagnosis::SolvableViable { v }
    } else {
        Diagnosis::SolvableNonviable { v }
    })
}
