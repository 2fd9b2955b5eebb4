//! Economy description, hypothesis validation and the steady-state
//! (production-price) solvers.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{gauss_solve, Matrix, Vector};
use crate::scalar::Scalar;
use crate::spectral::{is_irreducible, max_profit_rate, perron_eigenpair, PerronOptions};

/// Which price dynamics the economy follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `dP/dt = D M P + f(t)` with `M = B − (1+i)A`.
    Gravitation,
    /// `dP/dt = (1+r) A P + w L − D P`.
    WagePrice,
}

/// Fixed economic data of an n-branch input–output system.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyModel<T> {
    variant: Variant,
    inputs: Matrix<T>,
    /// `None` is the identity output matrix.
    outputs: Option<Matrix<T>>,
    labor: Vector<T>,
    profit_rate: T,
    wage: Option<T>,
    horizon: T,
}

impl<T: Scalar> EconomyModel<T> {
    /// Wage–price spiral economy (output matrix is the identity).
    pub fn wage_price(
        inputs: Matrix<T>,
        labor: Vector<T>,
        profit_rate: T,
        wage: Option<T>,
        horizon: T,
    ) -> Result<Self> {
        Self::new(Variant::WagePrice, inputs, None, labor, profit_rate, wage, horizon)
    }

    /// Gravitation economy with output matrix `outputs` (identity if `None`).
    pub fn gravitation(
        inputs: Matrix<T>,
        outputs: Option<Matrix<T>>,
        labor: Vector<T>,
        interest_rate: T,
        wage: Option<T>,
        horizon: T,
    ) -> Result<Self> {
        Self::new(
            Variant::Gravitation,
            inputs,
            outputs,
            labor,
            interest_rate,
            wage,
            horizon,
        )
    }

    /// Checks shapes and finiteness only; economic hypotheses are reported by
    /// [`validate`].
    pub fn new(
        variant: Variant,
        inputs: Matrix<T>,
        outputs: Option<Matrix<T>>,
        labor: Vector<T>,
        profit_rate: T,
        wage: Option<T>,
        horizon: T,
    ) -> Result<Self> {
        let n = inputs.order();
        if n == 0 {
            return Err(Error::Empty);
        }
        if labor.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: labor.len(),
            });
        }
        if let Some(b) = &outputs {
            if b.order() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.order(),
                });
            }
            if !b.is_finite() {
                return Err(Error::NonFinite("output matrix"));
            }
        }
        if !inputs.is_finite() {
            return Err(Error::NonFinite("input matrix"));
        }
        if !labor.is_finite() {
            return Err(Error::NonFinite("labor vector"));
        }
        if !profit_rate.is_finite() || !horizon.is_finite() || wage.is_some_and(|w| !w.is_finite()) {
            return Err(Error::NonFinite("scalar parameter"));
        }
        Ok(Self {
            variant,
            inputs,
            outputs,
            labor,
            profit_rate,
            wage,
            horizon,
        })
    }

    pub fn order(&self) -> usize {
        self.inputs.order()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn inputs(&self) -> &Matrix<T> {
        &self.inputs
    }

    pub fn outputs(&self) -> Option<&Matrix<T>> {
        self.outputs.as_ref()
    }

    /// Output matrix with the identity materialised.
    pub fn output_matrix(&self) -> Matrix<T> {
        self.outputs
            .clone()
            .unwrap_or_else(|| Matrix::identity(self.order()))
    }

    pub fn labor(&self) -> &Vector<T> {
        &self.labor
    }

    /// r for the wage–price variant, i for the gravitation variant.
    pub fn profit_rate(&self) -> T {
        self.profit_rate
    }

    pub fn wage(&self) -> Option<T> {
        self.wage
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_wage(mut self, wage: Option<T>) -> Self {
        self.wage = wage;
        self
    }

    /// `M = B − (1+i)A`.
    pub fn gravitation_matrix(&self) -> Matrix<T> {
        &self.output_matrix() - &self.inputs.scale(T::one() + self.profit_rate)
    }

    /// `(1+r)A`.
    pub fn markup_matrix(&self) -> Matrix<T> {
        self.inputs.scale(T::one() + self.profit_rate)
    }
}

/// A standing hypothesis on the economy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    InputsNonnegative,
    LaborNonnegativeNonzero,
    InputsIrreducible,
    ProfitRateBelowMaximum,
    PositiveHorizon,
    IdentityOutputForWagePrice,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::InputsNonnegative => "A nonnegative",
            Hypothesis::LaborNonnegativeNonzero => "L nonnegative and not all zero",
            Hypothesis::InputsIrreducible => "A irreducible",
            Hypothesis::ProfitRateBelowMaximum => "profit rate below maximum",
            Hypothesis::PositiveHorizon => "horizon positive",
            Hypothesis::IdentityOutputForWagePrice => "B identity for wage-price variant",
        };
        f.write_str(s)
    }
}

/// A violated hypothesis with a human-readable reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub satisfied: Vec<Hypothesis>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, hypothesis: Hypothesis) -> bool {
        self.violations.iter().any(|v| v.hypothesis == hypothesis)
    }

    fn check(&mut self, hypothesis: Hypothesis, ok: bool, message: impl FnOnce() -> String) {
        if ok {
            self.satisfied.push(hypothesis);
        } else {
            self.violations.push(Violation {
                hypothesis,
                message: message(),
            });
        }
    }
}

/// Reports which standing hypotheses the economy satisfies. Never fails.
pub fn validate<T: Scalar>(model: &EconomyModel<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let a = model.inputs();
    let nonnegative = a.as_row_major().iter().all(|&x| x >= T::zero());
    report.check(Hypothesis::InputsNonnegative, nonnegative, || {
        "A has a negative entry".into()
    });

    let labor = model.labor();
    let labor_ok = labor.iter().all(|&l| l >= T::zero()) && labor.iter().any(|&l| l > T::zero());
    report.check(Hypothesis::LaborNonnegativeNonzero, labor_ok, || {
        "L must be nonnegative with a positive entry".into()
    });

    if nonnegative {
        let irreducible = is_irreducible(a).unwrap_or(false);
        report.check(Hypothesis::InputsIrreducible, irreducible, || "A reducible".into());

        if model.variant() == Variant::WagePrice {
            let below = match max_profit_rate(a) {
                Ok(rmax) => model.profit_rate() < rmax,
                // Reducible A: fall back to the radius of the reducible matrix.
                Err(_) => {
                    let opts = PerronOptions {
                        allow_reducible: true,
                        ..Default::default()
                    };
                    match perron_eigenpair(a, &opts) {
                        Ok(r) => (T::one() + model.profit_rate()) * r.rho < T::one(),
                        Err(_) => false,
                    }
                }
            };
            report.check(Hypothesis::ProfitRateBelowMaximum, below, || {
                "profit rate not below maximum".into()
            });
        }
    }

    report.check(Hypothesis::PositiveHorizon, model.horizon() > T::zero(), || {
        "horizon T must be positive".into()
    });

    if model.variant() == Variant::WagePrice {
        let identity = model.outputs().is_none_or(Matrix::is_identity);
        report.check(Hypothesis::IdentityOutputForWagePrice, identity, || {
            "wage-price variant requires B = I".into()
        });
    }
    report
}

/// Production prices and the wage that accompanies them.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T> {
    pub p_star: Vector<T>,
    pub wage_used: T,
    /// Distance from the variant's price normalisation (zero up to rounding
    /// when the wage was solved for).
    pub normalization_residual: T,
    /// All steady prices strictly positive.
    pub positive: bool,
}

fn first_nonpositive<T: Scalar>(p: &[T]) -> Option<usize> {
    p.iter().position(|&x| x <= T::zero())
}

/// Solves `P* = (1+r) A P* + w L` with `e·P* = 1` (all-ones `e`).
///
/// With no wage given, w is the extra unknown fixed by the normalisation;
/// with a wage given, prices follow from it and the normalisation residual
/// is reported without rescaling.
pub fn solve_production_prices_w<T: Scalar>(model: &EconomyModel<T>) -> Result<SteadyState<T>> {
    if model.variant() != Variant::WagePrice {
        return Err(Error::InvalidParams(
            "wage-price solver needs the wage-price variant".into(),
        ));
    }
    let n = model.order();
    let system = &Matrix::identity(n) - &model.markup_matrix();
    let q = gauss_solve(&system, model.labor())?;
    let state = scale_to_normalization(q, model.wage(), |p| p.iter().fold(T::zero(), |acc, &x| acc + x))?;
    if let Some(index) = first_nonpositive(&state.p_star) {
        return Err(Error::NonpositivePrices { index });
    }
    Ok(state)
}

/// Solves `B P* = (1+i) A P* + w L` with `e (B − A) P* = 1`.
///
/// Non-positive prices are not an error here; they are flagged through
/// [`SteadyState::positive`].
pub fn solve_production_prices_g<T: Scalar>(model: &EconomyModel<T>) -> Result<SteadyState<T>> {
    if model.variant() != Variant::Gravitation {
        return Err(Error::InvalidParams(
            "gravitation solver needs the gravitation variant".into(),
        ));
    }
    let q = gauss_solve(&model.gravitation_matrix(), model.labor())?;
    let net = &model.output_matrix() - model.inputs();
    scale_to_normalization(q, model.wage(), |p| net.mul_vec(p).sum())
}

/// Dispatches to the steady-state solver of the model's variant.
pub fn solve_production_prices<T: Scalar>(model: &EconomyModel<T>) -> Result<SteadyState<T>> {
    match model.variant() {
        Variant::WagePrice => solve_production_prices_w(model),
        Variant::Gravitation => solve_production_prices_g(model),
    }
}

fn scale_to_normalization<T: Scalar>(
    q: Vector<T>,
    wage: Option<T>,
    normal: impl Fn(&[T]) -> T,
) -> Result<SteadyState<T>> {
    let wage_used = match wage {
        Some(w) => w,
        None => {
            let denom = normal(&q);
            if denom == T::zero() || !denom.is_finite() {
                return Err(Error::InvalidParams(
                    "price normalisation is degenerate for this economy".into(),
                ));
            }
            T::one() / denom
        }
    };
    let p_star = q.scale(wage_used);
    let normalization_residual = (normal(&p_star) - T::one()).abs();
    let positive = first_nonpositive(&p_star).is_none();
    Ok(SteadyState {
        p_star,
        wage_used,
        normalization_residual,
        positive,
    })
}
