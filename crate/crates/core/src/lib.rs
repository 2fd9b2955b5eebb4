//! Calibration of per-branch differentiation rates for input–output price
//! dynamics.
//!
//! Given an economy (input matrix `A`, output matrix `B`, labor vector `L`,
//! profit rate, wage, horizon `T`), an initial price vector and a target
//! vector of production prices, [`calibrate::shoot`] finds the rates
//! `V = (v_1, …, v_n)` for which the price trajectory started at `P(0)`
//! reaches the target at `T`. The trajectory and its sensitivities to `V`
//! come from fixed-step RK4 ([`dynamics`]); the rates from damped Newton
//! iteration on the terminal mismatch.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod calibrate;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod spectral;

pub use calibrate::{
    diagnose_existence_scalar, sensitivity_report, shoot, shoot_system, Diagnosis, FailureReason, RateVector,
    ScalarVariant, ShootOptions, ShootingResult,
};
pub use dynamics::{
    integrate_rk4, AugmentedState, ClosedFormCheck, Forcing, PriceSystem, Reference, Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{affine_steady_solution, gauss_solve, mat_exp, Matrix, Vector};
pub use model::{
    solve_production_prices, solve_production_prices_g, solve_production_prices_w, validate,
    EconomyModel, SteadyState, ValidationReport, Variant,
};
pub use scalar::Scalar;
pub use spectral::{is_irreducible, max_profit_rate, perron_eigenpair, PerronOptions, SpectralResult};

pub type Vector64 = Vector<f64>;
pub type Matrix64 = Matrix<f64>;
pub type Economy64 = EconomyModel<f64>;
pub type Forcing64 = Forcing<f64>;
pub type PriceSystem64 = PriceSystem<f64>;
pub type Rates64 = RateVector<f64>;
pub type Shooting64 = ShootingResult<f64>;
pub type Spectral64 = SpectralResult<f64>;
pub type Steady64 = SteadyState<f64>;

pub type Vector32 = Vector<f32>;
pub type Matrix32 = Matrix<f32>;
pub type Economy32 = EconomyModel<f32>;
