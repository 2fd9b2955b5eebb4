//! Scenario files: one JSON document describing an economy, initial and
//! target prices, forcing and solver settings.

use std::path::Path;

use diffrate::{EconomyModel, Forcing, Matrix, RateVector, ShootOptions, Variant, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ErrorKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub variant: VariantName,
    pub economy: EconomySpec,
    #[serde(rename = "P0")]
    pub p0: Vec<f64>,
    #[serde(default)]
    pub p_star: Option<TargetSpec>,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    #[serde(default)]
    pub v0: Option<RatesSpec>,
    /// Rates used by `simulate` and `verify`; defaults to `v0`.
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    WagePrice,
    Gravitation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    /// Profit rate `r`, or interest rate `i` for the gravitation variant.
    #[serde(default, alias = "interest_rate")]
    pub profit_rate: f64,
    /// `null` or absent: solved for from the price normalisation.
    #[serde(default)]
    pub wage: Option<f64>,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Auto(AutoTag),
    Prices(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatesSpec {
    Ones(OnesTag),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnesTag {
    Ones,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    Constant(Vec<f64>),
    Sampled { times: Vec<f64>, values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    /// `None`: chosen from the rates, see `PriceSystem::default_steps`.
    pub steps: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: bool,
    pub stride: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = ShootOptions::<f64>::default();
        Self {
            steps: None,
            tol: d.tol,
            max_iter: d.max_iter,
            damping: d.damping,
            stride: d.stride,
        }
    }
}

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub stride: Option<usize>,
    pub no_damping: bool,
    pub rates: Option<Vec<f64>>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.check()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(ErrorKind::Io, format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn order(&self) -> usize {
        self.economy.a.len()
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(steps) = o.steps {
            self.solver.steps = Some(steps);
        }
        if let Some(tol) = o.tol {
            self.solver.tol = tol;
        }
        if let Some(stride) = o.stride {
            self.solver.stride = stride;
        }
        if o.no_damping {
            self.solver.damping = false;
        }
        if let Some(rates) = &o.rates {
            self.rates = Some(rates.clone());
        }
        self.check()
    }

    /// Structural checks: shapes, finiteness, signs of `A` and the horizon,
    /// solver settings. Economic hypotheses are reported, not enforced.
    pub fn check(&self) -> Result<(), CliError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return Err(CliError::validation("name", "must be nonempty [A-Za-z0-9_.-]"));
        }
        let n = self.order();
        if n == 0 {
            return Err(CliError::validation("economy.A", "empty matrix"));
        }
        square(&self.economy.a, n, "economy.A")?;
        for (i, row) in self.economy.a.iter().enumerate() {
            if let Some(j) = row.iter().position(|&x| x < 0.0) {
                return Err(CliError::validation(
                    &format!("economy.A[{i}][{j}]"),
                    "input coefficients must be nonnegative",
                ));
            }
        }
        if let Some(b) = &self.economy.b {
            square(b, n, "economy.B")?;
            if self.variant == VariantName::WagePrice {
                let identity = b
                    .iter()
                    .enumerate()
                    .all(|(i, row)| row.iter().enumerate().all(|(j, &x)| x == (i == j) as u8 as f64));
                if !identity {
                    return Err(CliError::validation(
                        "economy.B",
                        "wage_price variant takes no output matrix other than the identity",
                    ));
                }
            }
        }
        vector(&self.economy.l, n, "economy.L")?;
        scalar(self.economy.profit_rate, "economy.profit_rate")?;
        if let Some(w) = self.economy.wage {
            scalar(w, "economy.wage")?;
        }
        scalar(self.economy.horizon, "economy.horizon")?;
        if !(self.economy.horizon > 0.0) {
            return Err(CliError::validation("economy.horizon", "must be positive"));
        }
        vector(&self.p0, n, "P0")?;
        if let Some(TargetSpec::Prices(p)) = &self.p_star {
            vector(p, n, "p_star")?;
        }
        if let Some(RatesSpec::Values(v)) = &self.v0 {
            vector(v, n, "v0")?;
        }
        if let Some(v) = &self.rates {
            vector(v, n, "rates")?;
        }
        match &self.forcing {
            None => {}
            Some(ForcingSpec::Constant(f)) => vector(f, n, "forcing.constant")?,
            Some(ForcingSpec::Sampled { times, values }) => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(CliError::validation(
                        "forcing.sampled",
                        "times and values must be nonempty and of equal length",
                    ));
                }
                for (k, v) in values.iter().enumerate() {
                    vector(v, n, &format!("forcing.sampled.values[{k}]"))?;
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) || !times.iter().all(|t| t.is_finite()) {
                    return Err(CliError::validation(
                        "forcing.sampled.times",
                        "must be finite and strictly increasing",
                    ));
                }
                if times[0] > 0.0 || times[times.len() - 1] < self.economy.horizon {
                    return Err(CliError::validation(
                        "forcing.sampled.times",
                        "must cover [0, horizon]",
                    ));
                }
            }
        }
        let s = &self.solver;
        if s.steps == Some(0) {
            return Err(CliError::validation("solver.steps", "must be at least 1"));
        }
        if !(s.tol > 0.0) || !s.tol.is_finite() {
            return Err(CliError::validation("solver.tol", "must be positive and finite"));
        }
        if s.stride == 0 {
            return Err(CliError::validation("solver.stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<EconomyModel<f64>, CliError> {
        let a = Matrix::from_rows(&self.economy.a).map_err(|e| validation_err("economy.A", e))?;
        let b = match &self.economy.b {
            Some(b) => Some(Matrix::from_rows(b).map_err(|e| validation_err("economy.B", e))?),
            None => None,
        };
        let variant = match self.variant {
            VariantName::WagePrice => Variant::WagePrice,
            VariantName::Gravitation => Variant::Gravitation,
        };
        let b = if variant == Variant::WagePrice { None } else { b };
        EconomyModel::new(
            variant,
            a,
            b,
            Vector::from_vec(self.economy.l.clone()),
            self.economy.profit_rate,
            self.economy.wage,
            self.economy.horizon,
        )
        .map_err(|e| validation_err("economy", e))
    }

    pub fn forcing(&self) -> Result<Forcing<f64>, CliError> {
        match &self.forcing {
            None => Ok(Forcing::zero(self.order())),
            Some(ForcingSpec::Constant(f)) => Ok(Forcing::Constant(Vector::from_vec(f.clone()))),
            Some(ForcingSpec::Sampled { times, values }) => Forcing::sampled(
                times.clone(),
                values.iter().cloned().map(Vector::from_vec).collect(),
            )
            .map_err(|e| validation_err("forcing.sampled", e)),
        }
    }

    pub fn initial_rates(&self) -> RateVector<f64> {
        match &self.v0 {
            Some(RatesSpec::Values(v)) => RateVector::new(Vector::from_vec(v.clone()))
                .expect("checked finite"),
            _ => RateVector::ones(self.order()),
        }
    }

    /// Rates for `simulate` and `verify`: `rates`, else `v0`, else all ones.
    pub fn run_rates(&self) -> Vector<f64> {
        match &self.rates {
            Some(v) => Vector::from_vec(v.clone()),
            None => self.initial_rates().into_vector(),
        }
    }

    pub fn shoot_options(&self) -> ShootOptions<f64> {
        ShootOptions {
            steps: self.solver.steps,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            damping: self.solver.damping,
            stride: self.solver.stride,
            ..ShootOptions::default()
        }
    }
}

fn validation_err(field: &str, err: diffrate::Error) -> CliError {
    CliError::validation(field, err.to_string())
}

fn scalar(x: f64, field: &str) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::validation(field, "must be finite"))
    }
}

fn vector(v: &[f64], n: usize, field: &str) -> Result<(), CliError> {
    if v.len() != n {
        return Err(CliError::validation(
            field,
            format!("expected {n} entries, found {}", v.len()),
        ));
    }
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(CliError::validation(&format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn square(m: &[Vec<f64>], n: usize, field: &str) -> Result<(), CliError> {
    if m.len() != n {
        return Err(CliError::validation(field, format!("expected {n} rows, found {}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        vector(row, n, &format!("{field}[{i}]"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "m",
        "variant": "gravitation",
        "economy": {"A": [[0.5]], "L": [1.0], "interest_rate": 0.1, "horizon": 2.0},
        "P0": [1.0],
        "p_star": "auto",
        "v0": "ones"
    }"#;

    #[test]
    fn keywords_and_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.p_star, Some(TargetSpec::Auto(AutoTag::Auto)));
        assert_eq!(s.v0, Some(RatesSpec::Ones(OnesTag::Ones)));
        assert_eq!(s.economy.profit_rate, 0.1);
        assert_eq!(s.solver, SolverSpec::default());
        assert_eq!(s.run_rates().as_slice(), &[1.0]);
        assert_eq!(s.model().unwrap().output_matrix(), Matrix::identity(1));
    }

    #[test]
    fn unknown_keyword_rejected() {
        let bad = MINIMAL.replace("\"auto\"", "\"automatic\"");
        assert_eq!(Scenario::from_json(&bad).unwrap_err().kind, ErrorKind::Parse);
        let extra = MINIMAL.replace("\"v0\"", "\"typo\": 1, \"v0\"");
        assert_eq!(Scenario::from_json(&extra).unwrap_err().kind, ErrorKind::Parse);
    }

    #[test]
    fn overrides_take_precedence() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.apply(&Overrides {
            steps: Some(17),
            tol: Some(1e-6),
            stride: Some(3),
            no_damping: true,
            rates: Some(vec![0.25]),
        })
        .unwrap();
        let o = s.shoot_options();
        assert_eq!((o.steps, o.tol, o.stride, o.damping), (Some(17), 1e-6, 3, false));
        assert_eq!(s.run_rates().as_slice(), &[0.25]);
        let wrong = Overrides {
            rates: Some(vec![1.0, 2.0]),
            ..Overrides::default()
        };
        assert_eq!(s.apply(&wrong).unwrap_err().field.as_deref(), Some("rates"));
    }

    #[test]
    fn sampled_forcing_must_cover_horizon() {
        let s = MINIMAL.replace(
            "\"v0\"",
            r#""forcing": {"sampled": {"times": [0.0, 1.0], "values": [[0.0], [1.0]]}}, "v0""#,
        );
        let err = Scenario::from_json(&s).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("forcing.sampled.times"));
    }

    #[test]
    fn wage_price_rejects_general_output_matrix() {
        let s = MINIMAL
            .replace("gravitation", "wage_price")
            .replace("\"A\"", "\"B\": [[2.0]], \"A\"");
        let err = Scenario::from_json(&s).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("economy.B"));
    }
}
