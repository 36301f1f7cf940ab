//! Stationarity and stylized-fact diagnostics: sliding-window
//! volatility, the n-day return maximum delta(n), absolute-moment
//! scaling S_q(n) with its power-law exponent chi(q), and return
//! autocorrelations.
//!
//! The correlation curves are computed uncentered (raw product means),
//! with a centered, variance-normalized companion for readability. The
//! chi(q) exponent is the slope of log S_q(n) against log n over a
//! configurable fit range.

use serde::Serialize;
use thiserror::Error;

use crate::ingest::PriceSeries;
use crate::preprocess::{population_stats, ReturnSeries};

#[derive(Debug, Error)]
pub enum StylizedError {
    #[error("window {window} needs at least {window} returns, got {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("window must cover at least 2 returns, got {window}")]
    WindowTooSmall { window: usize },
    #[error("horizon n_max {n_max} must stay below the series length {len}")]
    HorizonTooLarge { n_max: usize, len: usize },
    #[error("lag t_max {t_max} must stay below the return count {len}")]
    LagTooLarge { t_max: usize, len: usize },
    #[error("moment fit range holds fewer than 3 usable points ({points})")]
    FitRangeTooSmall { points: usize },
    #[error("log of non-positive moment S_q(n) at {offenders:?}")]
    UndefinedLog { offenders: Vec<(f64, usize)> },
}

/// Population standard deviation over each trailing window of returns;
/// entry i describes the window ending at return index window - 1 + i.
pub fn sliding_volatility(
    returns: &ReturnSeries,
    window: usize,
) -> Result<Vec<f64>, StylizedError> {
    if window < 2 {
        return Err(StylizedError::WindowTooSmall { window });
    }
    if returns.len() < window {
        return Err(StylizedError::WindowTooLarge {
            window,
            len: returns.len(),
        });
    }
    Ok(returns
        .values()
        .windows(window)
        .map(|w| population_stats(w).1)
        .collect())
}

/// Prefix sums of a sliding-volatility series.
pub fn accumulated_volatility(sliding: &[f64]) -> Vec<f64> {
    sliding
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// delta(n) = max over t of r(t, n), for n = 1..=n_max.
pub fn max_return(
    series: &PriceSeries,
    n_max: usize,
) -> Result<Vec<(usize, f64)>, StylizedError> {
    if n_max >= series.len() {
        return Err(StylizedError::HorizonTooLarge {
            n_max,
            len: series.len(),
        });
    }
    let log_prices: Vec<f64> = series.prices().iter().map(|p| p.ln()).collect();
    Ok((1..=n_max)
        .map(|n| {
            let best = (0..log_prices.len() - n)
                .map(|t| log_prices[t + n] - log_prices[t])
                .fold(f64::NEG_INFINITY, f64::max);
            (n, best)
        })
        .collect())
}

/// Grid of absolute-moment values S_q(n) = mean over t of |r(t, n)|^q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub q_values: Vec<f64>,
    pub n_values: Vec<usize>,
    /// values[qi][ni] = S_{q_values[qi]}(n_values[ni])
    pub values: Vec<Vec<f64>>,
}

/// Computes the moment grid for every (q, n) pair.
pub fn moments(
    series: &PriceSeries,
    q_values: &[f64],
    n_values: &[usize],
) -> Result<MomentTable, StylizedError> {
    if let Some(&n_max) = n_values.iter().max() {
        if n_max >= series.len() {
            return Err(StylizedError::HorizonTooLarge {
                n_max,
                len: series.len(),
            });
        }
    }
    let log_prices: Vec<f64> = series.prices().iter().map(|p| p.ln()).collect();
    let mut values = vec![Vec::with_capacity(n_values.len()); q_values.len()];
    for &n in n_values {
        let count = (log_prices.len() - n) as f64;
        let mut sums = vec![0.0f64; q_values.len()];
        for t in 0..log_prices.len() - n {
            let abs_return = (log_prices[t + n] - log_prices[t]).abs();
            for (qi, &q) in q_values.iter().enumerate() {
                sums[qi] += abs_return.powf(q);
            }
        }
        for (qi, sum) in sums.into_iter().enumerate() {
            values[qi].push(sum / count);
        }
    }
    Ok(MomentTable {
        q_values: q_values.to_vec(),
        n_values: n_values.to_vec(),
        values,
    })
}

/// The scaling exponent of one moment order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiPoint {
    pub q: f64,
    pub chi: f64,
    /// L2 norm of the log-log regression residuals.
    pub residual_norm: f64,
}

/// chi(q) = least-squares slope of log S_q(n) against log n over the
/// inclusive fit range [fit_min_n, fit_max_n].
pub fn scaling_exponent(
    table: &MomentTable,
    fit_min_n: usize,
    fit_max_n: usize,
) -> Result<Vec<ChiPoint>, StylizedError> {
    let in_range: Vec<usize> = table
        .n_values
        .iter()
        .enumerate()
        .filter(|&(_, &n)| n >= fit_min_n && n <= fit_max_n)
        .map(|(i, _)| i)
        .collect();
    if in_range.len() < 3 {
        return Err(StylizedError::FitRangeTooSmall {
            points: in_range.len(),
        });
    }
    let offenders: Vec<(f64, usize)> = table
        .q_values
        .iter()
        .enumerate()
        .flat_map(|(qi, &q)| {
            in_range
                .iter()
                .filter(move |&&ni| table.values[qi][ni] <= 0.0)
                .map(move |&ni| (q, table.n_values[ni]))
                .collect::<Vec<_>>()
        })
        .collect();
    if !offenders.is_empty() {
        return Err(StylizedError::UndefinedLog { offenders });
    }

    Ok(table
        .q_values
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let points: Vec<(f64, f64)> = in_range
                .iter()
                .map(|&ni| {
                    (
                        (table.n_values[ni] as f64).ln(),
                        table.values[qi][ni].ln(),
                    )
                })
                .collect();
            let (slope, intercept) = linear_fit(&points);
            let residual_norm = points
                .iter()
                .map(|&(x, y)| (y - slope * x - intercept).powi(2))
                .sum::<f64>()
                .sqrt();
            ChiPoint {
                q,
                chi: slope,
                residual_norm,
            }
        })
        .collect())
}

fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

/// Raw (uncentered) correlation curve: C(T) = mean over t of
/// r(t+T) * r(t), or of the absolute values when `use_absolute` is set.
/// Entry T of the result covers lags 0..=t_max.
pub fn autocorrelation(
    returns: &ReturnSeries,
    t_max: usize,
    use_absolute: bool,
) -> Result<Vec<f64>, StylizedError> {
    if t_max >= returns.len() {
        return Err(StylizedError::LagTooLarge {
            t_max,
            len: returns.len(),
        });
    }
    let values = returns.values();
    Ok((0..=t_max)
        .map(|lag| {
            let count = (values.len() - lag) as f64;
            let sum: f64 = (0..values.len() - lag)
                .map(|t| {
                    if use_absolute {
                        values[t + lag].abs() * values[t].abs()
                    } else {
                        values[t + lag] * values[t]
                    }
                })
                .sum();
            sum / count
        })
        .collect())
}

/// Centered autocorrelation normalized by the variance, the usual
/// readability companion to the raw curves.
pub fn normalized_autocorrelation(
    returns: &ReturnSeries,
    t_max: usize,
) -> Result<Vec<f64>, StylizedError> {
    if t_max >= returns.len() {
        return Err(StylizedError::LagTooLarge {
            t_max,
            len: returns.len(),
        });
    }
    let values = returns.values();
    let mean = returns.mean();
    let variance = returns.sigma() * returns.sigma();
    Ok((0..=t_max)
        .map(|lag| {
            if variance == 0.0 {
                return 0.0;
            }
            let count = (values.len() - lag) as f64;
            let sum: f64 = (0..values.len() - lag)
                .map(|t| (values[t + lag] - mean) * (values[t] - mean))
                .sum();
            sum / count / variance
        })
        .collect())
}

/// Parameters of the full diagnostic suite.
#[derive(Debug, Clone, Serialize)]
pub struct StylizedParams {
    pub window: usize,
    pub delta_n_max: usize,
    pub q_values: Vec<f64>,
    pub moment_n_values: Vec<usize>,
    pub fit_min_n: usize,
    pub fit_max_n: usize,
    pub lag_max: usize,
}

impl StylizedParams {
    /// Defaults sized for a series of the given length: 10-day window,
    /// horizons up to 1000, q = 1..8, chi fit over n in [1, 100],
    /// correlation lags to 100.
    pub fn for_series_len(len: usize) -> Self {
        let n_cap = len.saturating_sub(2).max(1);
        let delta_n_max = n_cap.min(1000);
        Self {
            window: 10,
            delta_n_max,
            q_values: (1..=8).map(|q| q as f64).collect(),
            moment_n_values: (1..=delta_n_max).collect(),
            fit_min_n: 1,
            fit_max_n: 100,
            lag_max: n_cap.min(100),
        }
    }
}

/// All curves of the diagnostic suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurves {
    pub raw: Vec<f64>,
    pub absolute: Vec<f64>,
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StylizedReport {
    /// (return index of window end, sigma over the trailing window)
    pub sliding_volatility: Vec<(usize, f64)>,
    pub accumulated_volatility: Vec<f64>,
    pub delta_curve: Vec<(usize, f64)>,
    pub moment_table: MomentTable,
    pub chi_curve: Vec<ChiPoint>,
    pub correlation_curves: CorrelationCurves,
}

/// Runs every diagnostic on the 1-day returns of a series.
pub fn stylized_report(
    series: &PriceSeries,
    returns: &ReturnSeries,
    params: &StylizedParams,
) -> Result<StylizedReport, StylizedError> {
    let sliding = sliding_volatility(returns, params.window)?;
    let accumulated = accumulated_volatility(&sliding);
    let sliding_indexed = sliding
        .into_iter()
        .enumerate()
        .map(|(i, v)| (params.window - 1 + i, v))
        .collect();
    let delta_curve = max_return(series, params.delta_n_max)?;
    let moment_table = moments(series, &params.q_values, &params.moment_n_values)?;
    let chi_curve = scaling_exponent(&moment_table, params.fit_min_n, params.fit_max_n)?;
    let correlation_curves = CorrelationCurves {
        raw: autocorrelation(returns, params.lag_max, false)?,
        absolute: autocorrelation(returns, params.lag_max, true)?,
        normalized: normalized_autocorrelation(returns, params.lag_max)?,
    };
    Ok(StylizedReport {
        sliding_volatility: sliding_indexed,
        accumulated_volatility: accumulated,
        delta_curve,
        moment_table,
        chi_curve,
        correlation_curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::NaiveDate;
    use crate::ingest::PriceSeries;
    use crate::preprocess::log_returns;

    fn series_from_prices(prices: &[f64]) -> PriceSeries {
        let start = NaiveDate::from_ymd_opt(2016, 3, 1).unwrap();
        let dates = (0..prices.len() as u64)
            .map(|i| start.checked_add_days(chrono::Days::new(i)).unwrap())
            .collect();
        PriceSeries::new(dates, prices.to_vec(), "TEST").unwrap()
    }

    fn returns_from(values: &[f64]) -> ReturnSeries {
        ReturnSeries::from_values(1, values.to_vec())
    }

    #[test]
    fn constant_returns_have_zero_sliding_volatility() {
        let returns = returns_from(&[0.01; 12]);
        let vol = sliding_volatility(&returns, 10).unwrap();
        assert_eq!(vol.len(), 3);
        // Zero variance up to accumulation rounding.
        assert!(vol.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn pairwise_windows_match_hand_computed_sigma() {
        let c = 0.04;
        let returns = returns_from(&[0.0, 0.0, c, c]);
        let vol = sliding_volatility(&returns, 2).unwrap();
        assert_eq!(vol.len(), 3);
        assert_relative_eq!(vol[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(vol[1], c / 2.0, epsilon = 1e-15);
        assert_relative_eq!(vol[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn alternating_returns_have_constant_window_sigma() {
        let c = 0.02;
        let values: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { c } else { -c }).collect();
        let vol = sliding_volatility(&returns_from(&values), 2).unwrap();
        for v in vol {
            assert_relative_eq!(v, c, epsilon = 1e-15);
        }
    }

    #[test]
    fn window_bounds_are_enforced() {
        let returns = returns_from(&[0.01; 5]);
        assert!(matches!(
            sliding_volatility(&returns, 6),
            Err(StylizedError::WindowTooLarge { .. })
        ));
        assert!(matches!(
            sliding_volatility(&returns, 1),
            Err(StylizedError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn accumulated_volatility_is_a_prefix_sum() {
        assert_eq!(accumulated_volatility(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(accumulated_volatility(&[1.0, 2.0, 3.0]), vec![1.0, 3.0, 6.0]);
        let sliding = [0.3, 0.1, 0.7, 0.2];
        let acc = accumulated_volatility(&sliding);
        for pair in acc.windows(2) {
            assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn constant_prices_give_zero_delta() {
        let series = series_from_prices(&[42.0; 30]);
        for (_, d) in max_return(&series, 10).unwrap() {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn exponential_growth_gives_linear_delta() {
        let c = 0.003;
        let prices: Vec<f64> = (0..50).map(|t| (c * t as f64).exp()).collect();
        let series = series_from_prices(&prices);
        for (n, d) in max_return(&series, 20).unwrap() {
            assert_relative_eq!(d, c * n as f64, max_relative = 1e-9);
        }
    }

    #[test]
    fn delta_matches_brute_force_over_all_pairs() {
        let prices: Vec<f64> = (0..120)
            .map(|t| 100.0 * (0.01 * ((t as f64) * 0.9).sin() + 0.001 * t as f64).exp())
            .collect();
        let series = series_from_prices(&prices);
        let curve = max_return(&series, 60).unwrap();
        for &(n, d) in &curve {
            let brute = (0..prices.len() - n)
                .map(|t| (prices[t + n] / prices[t]).ln())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_relative_eq!(d, brute, epsilon = 1e-12);
        }
        // delta(n) >= max 1-day return whenever the maximizing window
        // nests it; check against the global max over all (t, n).
        let global = curve.iter().map(|&(_, d)| d).fold(f64::NEG_INFINITY, f64::max);
        assert!(global >= curve[0].1);
    }

    #[test]
    fn moments_of_constant_prices_vanish() {
        let series = series_from_prices(&[10.0; 20]);
        let table = moments(&series, &[1.0, 2.0], &[1, 2, 3]).unwrap();
        for row in &table.values {
            assert!(row.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn moments_of_exponential_growth_are_powers() {
        let c = 0.002;
        let prices: Vec<f64> = (0..40).map(|t| (c * t as f64).exp()).collect();
        let series = series_from_prices(&prices);
        let table = moments(&series, &[1.0, 2.0, 3.0], &[1, 2, 5]).unwrap();
        for (qi, &q) in table.q_values.iter().enumerate() {
            for (ni, &n) in table.n_values.iter().enumerate() {
                let expected = (c * n as f64).powf(q);
                assert_relative_eq!(table.values[qi][ni], expected, max_relative = 1e-9);
            }
            // Monotone in n for this monotone series.
            for pair in table.values[qi].windows(2) {
                assert!(pair[1] >= pair[0]);
            }
        }
    }

    #[test]
    fn jensen_inequality_holds_for_the_second_moment() {
        let prices: Vec<f64> = (0..80)
            .map(|t| 50.0 * (0.01 * ((t as f64) * 1.3).sin()).exp())
            .collect();
        let series = series_from_prices(&prices);
        let table = moments(&series, &[1.0, 2.0], &[1, 2, 4, 8]).unwrap();
        for ni in 0..table.n_values.len() {
            assert!(table.values[1][ni] >= table.values[0][ni].powi(2) - 1e-15);
        }
    }

    #[test]
    fn exact_power_law_recovers_chi_equals_q() {
        let c = 0.004;
        let prices: Vec<f64> = (0..200).map(|t| (c * t as f64).exp()).collect();
        let series = series_from_prices(&prices);
        let q_values: Vec<f64> = (1..=4).map(f64::from).collect();
        let n_values: Vec<usize> = (1..=50).collect();
        let table = moments(&series, &q_values, &n_values).unwrap();
        let chi = scaling_exponent(&table, 1, 50).unwrap();
        for point in chi {
            assert_relative_eq!(point.chi, point.q, max_relative = 1e-9);
            assert!(point.residual_norm < 1e-9);
        }
    }

    #[test]
    fn chi_is_monotone_for_a_synthetic_log_concave_family() {
        // S_q(n) = n^(q/2) * exp(-0.01 q^2): chi(q) = q/2, increasing.
        let q_values: Vec<f64> = (1..=8).map(f64::from).collect();
        let n_values: Vec<usize> = (1..=64).collect();
        let values: Vec<Vec<f64>> = q_values
            .iter()
            .map(|&q| {
                n_values
                    .iter()
                    .map(|&n| (n as f64).powf(q / 2.0) * (-0.01 * q * q).exp())
                    .collect()
            })
            .collect();
        let table = MomentTable {
            q_values,
            n_values,
            values,
        };
        let chi = scaling_exponent(&table, 1, 64).unwrap();
        for pair in chi.windows(2) {
            assert!(pair[1].chi > pair[0].chi);
        }
        assert_relative_eq!(chi[1].chi, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn non_positive_moments_in_range_are_reported() {
        let table = MomentTable {
            q_values: vec![1.0],
            n_values: vec![1, 2, 3, 4],
            values: vec![vec![0.5, 0.0, 0.25, 0.125]],
        };
        match scaling_exponent(&table, 1, 4) {
            Err(StylizedError::UndefinedLog { offenders }) => {
                assert_eq!(offenders, vec![(1.0, 2)]);
            }
            other => panic!("expected UndefinedLog, got {other:?}"),
        }
    }

    #[test]
    fn too_few_fit_points_is_an_error() {
        let table = MomentTable {
            q_values: vec![1.0],
            n_values: vec![1, 2, 50],
            values: vec![vec![0.5, 0.4, 0.3]],
        };
        assert!(matches!(
            scaling_exponent(&table, 1, 2),
            Err(StylizedError::FitRangeTooSmall { points: 2 })
        ));
    }

    #[test]
    fn constant_returns_have_constant_raw_correlation() {
        let c = 0.03;
        let returns = returns_from(&[c; 20]);
        let curve = autocorrelation(&returns, 5, false).unwrap();
        for v in curve {
            assert_relative_eq!(v, c * c, epsilon = 1e-15);
        }
    }

    #[test]
    fn alternating_returns_flip_sign_under_raw_correlation() {
        let c = 0.02;
        let values: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { c } else { -c }).collect();
        let returns = returns_from(&values);
        let raw = autocorrelation(&returns, 2, false).unwrap();
        assert_relative_eq!(raw[1], -c * c, epsilon = 1e-15);
        let absolute = autocorrelation(&returns, 2, true).unwrap();
        assert_relative_eq!(absolute[1], c * c, epsilon = 1e-15);
    }

    #[test]
    fn lag_zero_equals_variance_plus_squared_mean() {
        let values: Vec<f64> = (0..50).map(|i| ((i as f64) * 0.77).sin() * 0.02).collect();
        let returns = returns_from(&values);
        let raw = autocorrelation(&returns, 0, false).unwrap();
        let expected = returns.sigma().powi(2) + returns.mean().powi(2);
        assert_relative_eq!(raw[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn normalized_correlation_is_one_at_lag_zero() {
        let values: Vec<f64> = (0..60).map(|i| ((i as f64) * 1.3).sin() * 0.01).collect();
        let returns = returns_from(&values);
        let normalized = normalized_autocorrelation(&returns, 4).unwrap();
        assert_relative_eq!(normalized[0], 1.0, max_relative = 1e-12);
        for v in &normalized {
            assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn report_assembles_every_curve() {
        let prices: Vec<f64> = (0..220)
            .map(|t| {
                let t = t as f64;
                90.0 * (0.0004 * t + 0.012 * (t * 0.61).sin() + 0.008 * (t * 0.17).cos()).exp()
            })
            .collect();
        let series = series_from_prices(&prices);
        let returns = log_returns(&series, 1).unwrap();
        let mut params = StylizedParams::for_series_len(series.len());
        params.fit_max_n = 50;
        let report = stylized_report(&series, &returns, &params).unwrap();
        assert_eq!(report.sliding_volatility[0].0, params.window - 1);
        assert_eq!(
            report.accumulated_volatility.len(),
            report.sliding_volatility.len()
        );
        assert_eq!(report.delta_curve.len(), params.delta_n_max);
        assert_eq!(report.chi_curve.len(), 8);
        assert_eq!(report.correlation_curves.raw.len(), params.lag_max + 1);
        assert!(report
            .sliding_volatility
            .iter()
            .all(|&(_, v)| v >= 0.0));
    }
}
