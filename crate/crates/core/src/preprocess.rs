//! Detrending, rescaling, and n-day log returns.
//!
//! Trend removal follows the usual two-step recipe: fit a low-degree
//! polynomial q(t) over the trading-day index, subtract it, then rescale
//! the residual by mean(p)/q(t) so early and late fluctuations are
//! comparable. Returns are natural-log differences at horizon n, with
//! population mean and standard deviation cached on the series.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ingest::PriceSeries;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("underdetermined fit: degree {degree} needs more than {len} observations")]
    Underdetermined { degree: usize, len: usize },
    #[error("least-squares solve failed: {0}")]
    FitFailed(&'static str),
    #[error("trend value is zero at index {index}; cannot rescale")]
    SingularTrend { index: usize },
    #[error("insufficient data: horizon {horizon} needs a series longer than {len}")]
    InsufficientData { horizon: usize, len: usize },
    #[error("return horizon must be at least 1")]
    ZeroHorizon,
}

/// Polynomial trend q(t) over the trading-day index t = 0..T-1.
/// Coefficients are stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendModel {
    degree: usize,
    coefficients: Vec<f64>,
}

impl TrendModel {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluates q(t) by Horner's rule.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * t + c)
    }
}

/// n-day log returns r(t, n) = ln p(t+n) - ln p(t) with cached
/// population mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    horizon_n: usize,
    values: Vec<f64>,
    mean: f64,
    sigma: f64,
}

impl ReturnSeries {
    /// Wraps precomputed return values, caching mean and sigma.
    pub fn from_values(horizon_n: usize, values: Vec<f64>) -> Self {
        let (mean, sigma) = population_stats(&values);
        Self {
            horizon_n,
            values,
            mean,
            sigma,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon_n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Population mean and standard deviation (divisor = count).
pub(crate) fn population_stats(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, variance.sqrt())
}

/// Least-squares polynomial fit of the prices over t = 0..T-1.
///
/// Solved through an SVD of the Vandermonde matrix rather than the
/// normal equations, which lose half the working precision for
/// higher-degree fits on long series.
pub fn fit_polynomial_trend(
    series: &PriceSeries,
    degree: usize,
) -> Result<TrendModel, PreprocessError> {
    let len = series.len();
    if degree >= len {
        return Err(PreprocessError::Underdetermined { degree, len });
    }
    let vandermonde = DMatrix::from_fn(len, degree + 1, |i, j| (i as f64).powi(j as i32));
    let rhs = DVector::from_iterator(len, series.prices().iter().copied());
    let svd = vandermonde
        .try_svd(true, true, f64::EPSILON, 1000)
        .ok_or(PreprocessError::FitFailed("SVD did not converge"))?;
    let solution = svd.solve(&rhs, 0.0).map_err(PreprocessError::FitFailed)?;
    Ok(TrendModel {
        degree,
        coefficients: solution.iter().copied().collect(),
    })
}

/// Residual prices p(t) - q(t).
pub fn detrend(series: &PriceSeries, trend: &TrendModel) -> Vec<f64> {
    series
        .prices()
        .iter()
        .enumerate()
        .map(|(t, &p)| p - trend.evaluate(t as f64))
        .collect()
}

/// Rescaled residuals x(t) = (p(t) - q(t)) * mean(p) / q(t).
pub fn rescale(
    detrended: &[f64],
    series: &PriceSeries,
    trend: &TrendModel,
) -> Result<Vec<f64>, PreprocessError> {
    assert_eq!(detrended.len(), series.len(), "detrended/series length mismatch");
    let mean_price = series.prices().iter().sum::<f64>() / series.len() as f64;
    detrended
        .iter()
        .enumerate()
        .map(|(t, &residual)| {
            let q = trend.evaluate(t as f64);
            if q == 0.0 {
                Err(PreprocessError::SingularTrend { index: t })
            } else {
                Ok(residual * mean_price / q)
            }
        })
        .collect()
}

/// n-day log returns of the series, natural logarithm.
pub fn log_returns(series: &PriceSeries, n: usize) -> Result<ReturnSeries, PreprocessError> {
    if n == 0 {
        return Err(PreprocessError::ZeroHorizon);
    }
    if n >= series.len() {
        return Err(PreprocessError::InsufficientData {
            horizon: n,
            len: series.len(),
        });
    }
    let prices = series.prices();
    let values = (0..series.len() - n)
        .map(|t| prices[t + n].ln() - prices[t].ln())
        .collect();
    Ok(ReturnSeries::from_values(n, values))
}
