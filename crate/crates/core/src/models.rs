//! Least-squares fits of the seven complexity families, leave-one-out model
//! selection, and the significance test against an intercept-only model.
//!
//! Each family is a one-predictor linear model `value = b0 + b1 * g(size)`.
//! A Gaussian GLM with identity link is exactly ordinary least squares, so
//! the fits here are plain closed-form OLS on the centred predictor.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::family::ComplexityFamily;

pub const DEFAULT_ALPHA: f64 = 0.005;

/// Leverages within this distance of 1 are treated as a point that fully
/// determines its own fit.
const LEVERAGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Resource {
    Time,
    Memory,
}

impl Resource {
    pub fn label(self) -> &'static str {
        match self {
            Resource::Time => "TIME",
            Resource::Memory => "MEMORY",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Resource::Time => "seconds",
            Resource::Memory => "bytes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub size: usize,
    pub value: f64,
}

/// Measured resource usage, one row per target invocation. Replicates stay
/// as separate rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSeries {
    resource: Resource,
    rows: Vec<Observation>,
}

impl MeasurementSeries {
    pub fn new(resource: Resource, rows: Vec<Observation>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.size == 0) {
            return Err(Error::Precondition(format!(
                "sample sizes must be positive, got {}",
                bad.size
            )));
        }
        if let Some(bad) = rows.iter().find(|r| !r.value.is_finite()) {
            return Err(Error::Precondition(format!(
                "measured values must be finite, got {} at size {}",
                bad.value, bad.size
            )));
        }
        Ok(Self { resource, rows })
    }

    pub fn from_pairs(resource: Resource, pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            resource,
            pairs
                .iter()
                .map(|&(size, value)| Observation { size, value })
                .collect(),
        )
    }

    pub fn resource(&self) -> Resource {
        self.resource
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.size)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.value)
    }

    /// Distinct sizes in ascending order.
    pub fn distinct_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.sizes().collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }

    /// Same rows with every value mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.resource,
            self.rows
                .iter()
                .map(|r| Observation {
                    size: r.size,
                    value: f(r.value),
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub family: ComplexityFamily,
    pub intercept: f64,
    pub slope: f64,
    pub loo_mse: f64,
    pub residuals: Vec<f64>,
}

impl FittedModel {
    /// Unclamped model value at a real-valued size.
    pub fn evaluate(&self, n: f64) -> f64 {
        self.intercept + self.slope * self.family.transform_real(n)
    }
}

/// Centred design quantities for one family on one series.
struct Design {
    x: Vec<f64>,
    x_mean: f64,
    sxx: f64,
}

impl Design {
    fn new(family: ComplexityFamily, series: &MeasurementSeries) -> Result<Self> {
        let x = series
            .sizes()
            .map(|n| family.transform(n))
            .collect::<Result<Vec<_>>>()?;
        let count = x.len() as f64;
        let x_mean = x.iter().sum::<f64>() / count;
        let sxx = x.iter().map(|v| (v - x_mean).powi(2)).sum();
        Ok(Self { x, x_mean, sxx })
    }

    fn is_degenerate(&self) -> bool {
        self.x.windows(2).all(|w| w[0] == w[1]) || self.sxx <= 0.0
    }

    /// Hat-matrix diagonal for the intercept + slope design.
    fn leverages(&self) -> impl Iterator<Item = f64> + '_ {
        let count = self.x.len() as f64;
        self.x
            .iter()
            .map(move |v| 1.0 / count + (v - self.x_mean).powi(2) / self.sxx)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Ordinary least squares of value on `g(size)`, plus the model's LOO-MSE.
pub fn fit_family(family: ComplexityFamily, series: &MeasurementSeries) -> Result<FittedModel> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "fitting needs at least 2 rows, got {}",
            series.len()
        )));
    }
    let y_mean = mean(series.values());

    let (intercept, slope, residuals) = if family == ComplexityFamily::Constant {
        let residuals = series.values().map(|y| y - y_mean).collect();
        (y_mean, 0.0, residuals)
    } else {
        let design = Design::new(family, series)?;
        if design.is_degenerate() {
            return Err(Error::FitDegenerate(family));
        }
        let sxy: f64 = design
            .x
            .iter()
            .zip(series.values())
            .map(|(x, y)| (x - design.x_mean) * (y - y_mean))
            .sum();
        let slope = sxy / design.sxx;
        let intercept = y_mean - slope * design.x_mean;
        let residuals = design
            .x
            .iter()
            .zip(series.values())
            .map(|(x, y)| (y - y_mean) - slope * (x - design.x_mean))
            .collect();
        (intercept, slope, residuals)
    };

    let mut model = FittedModel {
        family,
        intercept,
        slope,
        loo_mse: 0.0,
        residuals,
    };
    model.loo_mse = loo_mse(&model, series)?;
    Ok(model)
}

/// Leave-one-out mean squared error in closed form: the deleted residual of
/// row `i` is `e_i / (1 - h_ii)`. A row with leverage 1 makes the whole
/// family's score `+inf`.
pub fn loo_mse(model: &FittedModel, series: &MeasurementSeries) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "leave-one-out needs at least 2 rows, got {n}"
        )));
    }
    if model.residuals.len() != n {
        return Err(Error::Precondition(format!(
            "model has {} residuals but the series has {n} rows",
            model.residuals.len()
        )));
    }

    let leverages: Vec<f64> = if model.family == ComplexityFamily::Constant {
        vec![1.0 / n as f64; n]
    } else {
        let design = Design::new(model.family, series)?;
        if design.is_degenerate() {
            return Err(Error::FitDegenerate(model.family));
        }
        design.leverages().collect()
    };

    let mut total = 0.0;
    for (e, h) in model.residuals.iter().zip(&leverages) {
        let denom = 1.0 - h;
        if denom <= LEVERAGE_EPS {
            return Ok(f64::INFINITY);
        }
        total += (e / denom).powi(2);
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// F-test of the one-predictor model against the intercept-only model on the
/// same rows. With a single predictor this is the two-sided t-test on the
/// slope. A CONSTANT winner has nothing to test and yields no p-value.
pub fn significance_test(
    best: &FittedModel,
    series: &MeasurementSeries,
    alpha: f64,
) -> Result<Significance> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if best.family == ComplexityFamily::Constant {
        return Ok(Significance {
            p_value: None,
            significant: false,
        });
    }
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "the significance test needs at least 3 rows, got {n}"
        )));
    }
    let df_resid = (n - 2) as f64;
    let y_mean = mean(series.values());
    let ss_null: f64 = series.values().map(|y| (y - y_mean).powi(2)).sum();
    let ss_model: f64 = best.residuals.iter().map(|e| e * e).sum();

    let p_value = if ss_model == 0.0 {
        0.0
    } else {
        let f_stat = ((ss_null - ss_model) / (ss_model / df_resid)).max(0.0);
        // Upper tail of F(1, df) via the regularized incomplete beta function,
        // which stays accurate far into the tail.
        beta_reg(df_resid / 2.0, 0.5, df_resid / (df_resid + f_stat))
    };
    Ok(Significance {
        p_value: Some(p_value),
        significant: p_value < alpha,
    })
}

/// Extrapolated cost at `n_full`; negative extrapolations clamp to zero.
pub fn predict_at(model: &FittedModel, n_full: usize) -> Result<f64> {
    let g = model.family.transform(n_full)?;
    Ok((model.intercept + model.slope * g).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub resource: Resource,
    /// One fit per non-degenerate family, in family order.
    pub fits: Vec<FittedModel>,
    /// Families whose design was degenerate on this series.
    pub excluded: Vec<ComplexityFamily>,
    pub best: ComplexityFamily,
    pub p_value: Option<f64>,
    pub significant: bool,
}

impl BenchmarkResult {
    pub fn fit(&self, family: ComplexityFamily) -> Option<&FittedModel> {
        self.fits.iter().find(|m| m.family == family)
    }

    pub fn best_model(&self) -> &FittedModel {
        self.fit(self.best)
            .expect("the selected family is always among the fits")
    }
}

pub fn fit_all(series: &MeasurementSeries) -> Result<BenchmarkResult> {
    fit_all_with_alpha(series, DEFAULT_ALPHA)
}

/// Fits every family, ranks by LOO-MSE (exact ties go to the lower-order
/// family) and tests the winner at `alpha`.
pub fn fit_all_with_alpha(series: &MeasurementSeries, alpha: f64) -> Result<BenchmarkResult> {
    if series.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 measurements to fit, got {}",
            series.len()
        )));
    }
    let mut fits = Vec::with_capacity(ComplexityFamily::ALL.len());
    let mut excluded = Vec::new();
    for family in ComplexityFamily::ALL {
        match fit_family(family, series) {
            Ok(model) => fits.push(model),
            Err(Error::FitDegenerate(f)) => excluded.push(f),
            Err(e) => return Err(e),
        }
    }

    // ALL is in parsimony order and min_by keeps the first of equal elements.
    let best = fits
        .iter()
        .min_by(|a, b| a.loo_mse.total_cmp(&b.loo_mse))
        .expect("CONSTANT never has a degenerate design");
    let significance = significance_test(best, series, alpha)?;

    Ok(BenchmarkResult {
        resource: series.resource(),
        best: best.family,
        p_value: significance.p_value,
        significant: significance.significant,
        fits,
        excluded,
    })
}
