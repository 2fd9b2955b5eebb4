//! Fixed-step classical RK4 for the price ODE, optionally augmented with
//! the n² forward sensitivities `S_ij = ∂P_i/∂v_j`.
//!
//! Both variants are linear in the prices:
//!
//! * gravitation: `dP_i/dt = v_i (M P)_i + f_i(t)`,
//!   `dS_ij/dt = δ_ij (M P)_i + v_i (M S)_ij`
//! * wage–price: `dP_i/dt = ((1+r) A P)_i + w l_i − v_i P_i + f_i(t)`,
//!   `dS_ij/dt = ((1+r) A S)_ij − δ_ij P_i − v_i S_ij`
//!
//! Sensitivities start at zero because `P(0)` does not depend on the rates.

use crate::error::{Error, Result};
use crate::linalg::{growth_rate_estimate, Matrix, Vector};
use crate::model::{solve_production_prices_w, EconomyModel, Variant};
use crate::scalar::Scalar;

/// Exogenous forcing `f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing<T> {
    Constant(Vector<T>),
    /// Knots with strictly increasing times; linear interpolation between
    /// them, clamped outside.
    Sampled { times: Vec<T>, values: Vec<Vector<T>> },
}

impl<T: Scalar> Forcing<T> {
    pub fn zero(n: usize) -> Self {
        Forcing::Constant(Vector::zeros(n))
    }

    pub fn sampled(times: Vec<T>, values: Vec<Vector<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidParams(
                "sampled forcing needs one value per knot".into(),
            ));
        }
        let n = values[0].len();
        if let Some(bad) = values.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(
                "sampled forcing times must be strictly increasing".into(),
            ));
        }
        if !times.iter().all(|t| t.is_finite()) || !values.iter().all(Vector::is_finite) {
            return Err(Error::NonFinite("forcing"));
        }
        Ok(Forcing::Sampled { times, values })
    }

    pub fn order(&self) -> usize {
        match self {
            Forcing::Constant(v) => v.len(),
            Forcing::Sampled { values, .. } => values[0].len(),
        }
    }

    pub fn as_constant(&self) -> Option<&Vector<T>> {
        match self {
            Forcing::Constant(v) => Some(v),
            Forcing::Sampled { .. } => None,
        }
    }

    pub fn covers(&self, horizon: T) -> bool {
        match self {
            Forcing::Constant(_) => true,
            Forcing::Sampled { times, .. } => {
                times[0] <= T::zero() && *times.last().expect("non-empty") >= horizon
            }
        }
    }

    /// Writes `f(t)` into `out`.
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        match self {
            Forcing::Constant(v) => out.copy_from_slice(v),
            Forcing::Sampled { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    out.copy_from_slice(&values[0]);
                } else if t >= times[last] {
                    out.copy_from_slice(&values[last]);
                } else {
                    let k = times.partition_point(|&s| s <= t) - 1;
                    let w = (t - times[k]) / (times[k + 1] - times[k]);
                    for (i, o) in out.iter_mut().enumerate() {
                        *o = values[k][i] + w * (values[k + 1][i] - values[k][i]);
                    }
                }
            }
        }
    }

    pub fn eval(&self, t: T) -> Vector<T> {
        let mut out = Vector::zeros(self.order());
        self.eval_into(t, &mut out);
        out
    }
}

/// Prices plus the full sensitivity matrix at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState<T> {
    pub prices: Vector<T>,
    /// `sensitivities[(i, j)] = ∂P_i/∂v_j`.
    pub sensitivities: Matrix<T>,
    pub time: T,
}

impl<T: Scalar> AugmentedState<T> {
    /// State at t = 0: sensitivities are exactly zero.
    pub fn initial(p0: Vector<T>) -> Self {
        let n = p0.len();
        Self {
            prices: p0,
            sensitivities: Matrix::zeros(n),
            time: T::zero(),
        }
    }

    fn flatten(&self) -> Vec<T> {
        let mut y = self.prices.to_vec();
        y.extend_from_slice(self.sensitivities.as_row_major());
        y
    }
}

/// Time derivative of an [`AugmentedState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative<T> {
    pub prices: Vector<T>,
    pub sensitivities: Matrix<T>,
}

/// Recorded `(time, prices)` snapshots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub prices: Vec<Vector<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, &Vector<T>)> {
        self.times.iter().copied().zip(&self.prices)
    }

    fn push(&mut self, t: T, p: &[T]) {
        self.times.push(t);
        self.prices.push(Vector::from_vec(p.to_vec()));
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Gravitation right-hand side at one state.
pub fn rhs_model_g<T: Scalar>(
    m: &Matrix<T>,
    rates: &[T],
    state: &AugmentedState<T>,
    forcing_now: &[T],
) -> Result<StateDerivative<T>> {
    let n = m.order();
    check_len(n, rates.len())?;
    check_len(n, state.prices.len())?;
    check_len(n, forcing_now.len())?;
    let y = state.flatten();
    let mut dy = vec![T::zero(); y.len()];
    let mut work = vec![T::zero(); n];
    gravitation_rhs(m, rates, forcing_now, &y, &mut dy, &mut work, true);
    unflatten(n, dy)
}

/// Wage–price right-hand side at one state; `drive` is `w L` plus any
/// additional forcing at this instant.
pub fn rhs_model_w<T: Scalar>(
    markup: &Matrix<T>,
    drive: &[T],
    rates: &[T],
    state: &AugmentedState<T>,
) -> Result<StateDerivative<T>> {
    let n = markup.order();
    check_len(n, rates.len())?;
    check_len(n, state.prices.len())?;
    check_len(n, drive.len())?;
    let y = state.flatten();
    let mut dy = vec![T::zero(); y.len()];
    let mut work = vec![T::zero(); n];
    wage_price_rhs(markup, rates, drive, &y, &mut dy, &mut work, true);
    unflatten(n, dy)
}

fn unflatten<T: Scalar>(n: usize, dy: Vec<T>) -> Result<StateDerivative<T>> {
    let prices = Vector::from_vec(dy[..n].to_vec());
    let sensitivities = Matrix::from_row_major(n, dy[n..].to_vec())?;
    Ok(StateDerivative {
        prices,
        sensitivities,
    })
}

// Flat layout: y[..n] = P, y[n + i*n + j] = S_ij.

fn gravitation_rhs<T: Scalar>(
    m: &Matrix<T>,
    v: &[T],
    f: &[T],
    y: &[T],
    dy: &mut [T],
    mp: &mut [T],
    with_sens: bool,
) {
    let n = v.len();
    m.mul_vec_into(&y[..n], mp);
    for i in 0..n {
        dy[i] = v[i] * mp[i] + f[i];
    }
    if !with_sens {
        return;
    }
    let s = &y[n..];
    for i in 0..n {
        let row = m.row(i);
        for j in 0..n {
            let ms = (0..n).fold(T::zero(), |acc, k| acc + row[k] * s[k * n + j]);
            let direct = if i == j { mp[i] } else { T::zero() };
            dy[n + i * n + j] = direct + v[i] * ms;
        }
    }
}

fn wage_price_rhs<T: Scalar>(
    markup: &Matrix<T>,
    v: &[T],
    drive: &[T],
    y: &[T],
    dy: &mut [T],
    ap: &mut [T],
    with_sens: bool,
) {
    let n = v.len();
    markup.mul_vec_into(&y[..n], ap);
    for i in 0..n {
        dy[i] = ap[i] + drive[i] - v[i] * y[i];
    }
    if !with_sens {
        return;
    }
    let s = &y[n..];
    for i in 0..n {
        let row = markup.row(i);
        for j in 0..n {
            let as_ij = (0..n).fold(T::zero(), |acc, k| acc + row[k] * s[k * n + j]);
            let direct = if i == j { y[i] } else { T::zero() };
            dy[n + i * n + j] = as_ij - direct - v[i] * s[i * n + j];
        }
    }
}

/// A model with its forcing resolved into the linear system integrated by
/// RK4.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSystem<T> {
    variant: Variant,
    /// `M` (gravitation) or `(1+r)A` (wage–price).
    base: Matrix<T>,
    /// Constant inhomogeneity: zero (gravitation) or `w L` (wage–price).
    drive: Vector<T>,
    forcing: Forcing<T>,
    horizon: T,
}

impl<T: Scalar> PriceSystem<T> {
    /// Builds the system for `model`. For the wage–price variant with no
    /// wage set, the wage comes from the normalised steady state; `forcing`
    /// is added on top of `w L`.
    pub fn new(model: &EconomyModel<T>, forcing: Forcing<T>) -> Result<Self> {
        let n = model.order();
        check_len(n, forcing.order())?;
        if !(model.horizon() > T::zero()) {
            return Err(Error::InvalidParams("horizon T must be positive".into()));
        }
        if !forcing.covers(model.horizon()) {
            return Err(Error::InvalidParams(
                "sampled forcing must cover [0, T]".into(),
            ));
        }
        let (base, drive) = match model.variant() {
            Variant::Gravitation => (model.gravitation_matrix(), Vector::zeros(n)),
            Variant::WagePrice => {
                let wage = match model.wage() {
                    Some(w) => w,
                    None => solve_production_prices_w(model)?.wage_used,
                };
                (model.markup_matrix(), model.labor().scale(wage))
            }
        };
        Ok(Self {
            variant: model.variant(),
            base,
            drive,
            forcing,
            horizon: model.horizon(),
        })
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn base(&self) -> &Matrix<T> {
        &self.base
    }

    pub fn forcing(&self) -> &Forcing<T> {
        &self.forcing
    }

    /// System matrix `K(V)` of `dP/dt = K P + g(t)`: `D M` or `(1+r)A − D`.
    pub fn system_matrix(&self, rates: &[T]) -> Matrix<T> {
        match self.variant {
            Variant::Gravitation => self.base.scale_rows(rates),
            Variant::WagePrice => &self.base - &Matrix::from_diagonal(rates),
        }
    }

    /// `g` when the inhomogeneity is time-independent.
    pub fn constant_inhomogeneity(&self) -> Option<Vector<T>> {
        self.forcing.as_constant().map(|f| &self.drive + f)
    }

    /// Default step count `max(200, ⌈50·T·‖K(V)‖∞⌉)`.
    pub fn default_steps(&self, rates: &[T]) -> usize {
        let scaled = T::lit(50.0) * self.horizon * self.system_matrix(rates).norm_inf();
        let steps = scaled.ceil().to_usize().unwrap_or(usize::MAX);
        steps.max(200)
    }

    /// Estimated spectral abscissa of `K(V)`; negative means the price
    /// block is asymptotically stable.
    pub fn growth_rate(&self, rates: &[T]) -> Result<T> {
        growth_rate_estimate(&self.system_matrix(rates))
    }

    fn check_inputs(&self, rates: &[T], p0: &[T], steps: usize) -> Result<()> {
        let n = self.order();
        check_len(n, rates.len())?;
        check_len(n, p0.len())?;
        if steps == 0 {
            return Err(Error::InvalidParams("steps must be at least 1".into()));
        }
        if !rates.iter().chain(p0).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("rates or initial prices"));
        }
        Ok(())
    }

    /// Integrates prices and sensitivities from `t = 0` to `t = T` with
    /// `steps` RK4 steps, recording prices every `stride` steps (row count
    /// `⌊steps/stride⌋ + 1`, starting at t = 0).
    pub fn integrate(
        &self,
        rates: &[T],
        p0: &[T],
        steps: usize,
        stride: usize,
    ) -> Result<(AugmentedState<T>, Trajectory<T>)> {
        self.check_inputs(rates, p0, steps)?;
        if stride == 0 {
            return Err(Error::InvalidParams("stride must be at least 1".into()));
        }
        let n = self.order();
        let mut y = vec![T::zero(); n + n * n];
        y[..n].copy_from_slice(p0);
        let mut trajectory = Trajectory::default();
        self.run(rates, &mut y, steps, true, |k, t, y| {
            if k % stride == 0 {
                trajectory.push(t, &y[..n]);
            }
        })?;
        let state = AugmentedState {
            prices: Vector::from_vec(y[..n].to_vec()),
            sensitivities: Matrix::from_row_major(n, y[n..].to_vec())?,
            time: self.horizon,
        };
        Ok((state, trajectory))
    }

    /// Prices only at `t = T`; bit-identical to the price block of
    /// [`integrate`](Self::integrate).
    pub fn integrate_prices(&self, rates: &[T], p0: &[T], steps: usize) -> Result<Vector<T>> {
        self.check_inputs(rates, p0, steps)?;
        let mut y = p0.to_vec();
        self.run(rates, &mut y, steps, false, |_, _, _| {})?;
        Ok(Vector::from_vec(y))
    }

    fn run(
        &self,
        v: &[T],
        y: &mut [T],
        steps: usize,
        with_sens: bool,
        mut record: impl FnMut(usize, T, &[T]),
    ) -> Result<()> {
        let n = self.order();
        let len = y.len();
        let h = self.horizon / T::from_count(steps);
        let half = h * T::lit(0.5);
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);

        let mut k1 = vec![T::zero(); len];
        let mut k2 = vec![T::zero(); len];
        let mut k3 = vec![T::zero(); len];
        let mut k4 = vec![T::zero(); len];
        let mut stage = vec![T::zero(); len];
        let mut f = vec![T::zero(); n];
        let mut work = vec![T::zero(); n];

        let eval = |t: T, y: &[T], dy: &mut [T], f: &mut [T], work: &mut [T]| {
            self.forcing.eval_into(t, f);
            match self.variant {
                Variant::Gravitation => gravitation_rhs(&self.base, v, f, y, dy, work, with_sens),
                Variant::WagePrice => {
                    for (fi, di) in f.iter_mut().zip(self.drive.iter()) {
                        *fi = *fi + *di;
                    }
                    wage_price_rhs(&self.base, v, f, y, dy, work, with_sens)
                }
            }
        };

        record(0, T::zero(), y);
        for step in 0..steps {
            let t = h * T::from_count(step);
            eval(t, y, &mut k1, &mut f, &mut work);
            for i in 0..len {
                stage[i] = y[i] + half * k1[i];
            }
            eval(t + half, &stage, &mut k2, &mut f, &mut work);
            for i in 0..len {
                stage[i] = y[i] + half * k2[i];
            }
            eval(t + half, &stage, &mut k3, &mut f, &mut work);
            for i in 0..len {
                stage[i] = y[i] + h * k3[i];
            }
            eval(t + h, &stage, &mut k4, &mut f, &mut work);
            for i in 0..len {
                y[i] = y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
            }
            if !y.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteState { step: step + 1 });
            }
            let done = step + 1;
            let t_next = if done == steps {
                self.horizon
            } else {
                h * T::from_count(done)
            };
            record(done, t_next, y);
        }
        Ok(())
    }
}

/// Where the reference solution of a [`ClosedFormCheck`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `e^{TK} P0 + K⁻¹ (e^{TK} − I) g`.
    ClosedForm,
    /// `K` singular: RK4 with 16× the step count.
    FineRk4,
}

/// RK4 against the exact solution of the constant-forcing price ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck<T> {
    pub reference: Reference,
    pub reference_prices: Vector<T>,
    pub rk4_prices: Vector<T>,
    pub steps: usize,
    /// `‖RK4(T) − reference(T)‖∞` at `steps`.
    pub discrepancy: T,
    /// Step count of the coarser run in the order estimate.
    pub coarse_steps: usize,
    /// `log2(err(h) / err(h/2))` at `coarse_steps`; `None` when either error
    /// is at rounding level.
    pub order_estimate: Option<T>,
}

impl<T: Scalar> PriceSystem<T> {
    /// Compares RK4 at `steps` with the closed-form solution and estimates
    /// the observed order of accuracy.
    ///
    /// The order is measured on a coarse pair `(N, 2N)` with
    /// `N = max(16, ⌈8·T·‖K‖∞⌉)` so that both errors sit well above rounding.
    pub fn closed_form_check(&self, rates: &[T], p0: &[T], steps: usize) -> Result<ClosedFormCheck<T>> {
        self.check_inputs(rates, p0, steps)?;
        let g = self.constant_inhomogeneity().ok_or_else(|| {
            Error::InvalidParams("closed form needs a constant forcing".into())
        })?;
        let k = self.system_matrix(rates);
        let (reference, reference_prices) =
            match crate::linalg::affine_steady_solution(&k, &g, p0, self.horizon) {
                Ok(p) => (Reference::ClosedForm, p),
                Err(Error::SingularMatrix { .. }) => {
                    (Reference::FineRk4, self.integrate_prices(rates, p0, 16 * steps)?)
                }
                Err(e) => return Err(e),
            };
        let rk4_prices = self.integrate_prices(rates, p0, steps)?;
        let discrepancy = rk4_prices.distance_inf(&reference_prices);

        let coarse = (T::lit(8.0) * self.horizon * k.norm_inf())
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX)
            .max(16);
        let coarse_err = self.integrate_prices(rates, p0, coarse)?.distance_inf(&reference_prices);
        let fine_err = self
            .integrate_prices(rates, p0, 2 * coarse)?
            .distance_inf(&reference_prices);
        let floor = T::lit(1e4) * T::epsilon() * (T::one() + reference_prices.norm_inf());
        let order_estimate = (fine_err > floor && coarse_err > floor)
            .then(|| (coarse_err / fine_err).log2());

        Ok(ClosedFormCheck {
            reference,
            reference_prices,
            rk4_prices,
            steps,
            discrepancy,
            coarse_steps: coarse,
            order_estimate,
        })
    }
}

/// Integrates `model` at rates `rates` from `p0` with `steps` RK4 steps,
/// recording every step.
pub fn integrate_rk4<T: Scalar>(
    model: &EconomyModel<T>,
    rates: &[T],
    p0: &[T],
    forcing: &Forcing<T>,
    steps: usize,
) -> Result<(AugmentedState<T>, Trajectory<T>)> {
    PriceSystem::new(model, forcing.clone())?.integrate(rates, p0, steps, 1)
}
