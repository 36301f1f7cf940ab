//! The reconstruction protocol: split the coded series, estimate the
//! transition model on the training half, forecast the test half one
//! step ahead against a uniform random baseline, Monte Carlo the
//! comparison, and rebuild price paths from the forecast symbols.
//!
//! Forecasts condition on the true observed history (one-step-ahead,
//! not free-running): each prediction reads its context from the actual
//! test symbols, draws one uniform number, and samples the next symbol
//! by inverse CDF. The coding scheme is always fitted on the training
//! half only so the test half never leaks into the alphabet geometry.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coder::{self, CodingScheme, SymbolSequence};
use crate::ingest::PriceSeries;
use crate::markov::{self, MarkovError, TransitionModel};
use crate::preprocess::{self, PreprocessError};
use crate::seed;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("sequence of length {len} is too short to split (need >= 4)")]
    TooShortToSplit { len: usize },
    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot compare empty sequences")]
    Empty,
    #[error("need at least one simulation")]
    NoSimulations,
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Coder(#[from] crate::coder::CoderError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Splits a coded sequence at m = floor(len / 2): the first m symbols
/// train the model, the remainder is forecast.
pub fn split_sequence(
    s: &SymbolSequence,
) -> Result<(SymbolSequence, SymbolSequence), ForecastError> {
    if s.len() < 4 {
        return Err(ForecastError::TooShortToSplit { len: s.len() });
    }
    let m = s.len() / 2;
    let scheme = *s.scheme();
    let train = SymbolSequence::new(s.symbols()[..m].to_vec(), scheme)?;
    let test = SymbolSequence::new(s.symbols()[m..].to_vec(), scheme)?;
    Ok((train, test))
}

/// One-step-ahead forecast of a test sequence. The first symbol is
/// copied from the test data; every later symbol is sampled from the
/// conditional distribution of the true preceding context (truncated to
/// the available prefix while shorter than the model order).
pub fn one_step_forecast(
    model: &TransitionModel,
    test: &SymbolSequence,
    rng: &mut impl Rng,
) -> Result<SymbolSequence, ForecastError> {
    let symbols = test.symbols();
    let mut predicted = Vec::with_capacity(symbols.len());
    if symbols.is_empty() {
        return Ok(SymbolSequence::new(predicted, *test.scheme())?);
    }
    predicted.push(symbols[0]);
    for i in 0..symbols.len() - 1 {
        let context_len = model.order().min(i + 1);
        let context = &symbols[i + 1 - context_len..=i];
        let dist = model.conditional(context)?;
        let epsilon: f64 = rng.random();
        predicted.push(markov::sample_next(&dist, epsilon));
    }
    Ok(SymbolSequence::new(predicted, *test.scheme())?)
}

/// A sequence of i.i.d. symbols drawn uniformly from the alphabet.
pub fn random_baseline(
    scheme: &CodingScheme,
    length: usize,
    rng: &mut impl Rng,
) -> SymbolSequence {
    let beta = scheme.beta();
    let symbols = (0..length)
        .map(|_| rng.random_range(-beta..=beta))
        .collect();
    SymbolSequence::new(symbols, *scheme).expect("uniform draws stay in the alphabet")
}

/// Per-step root-mean-square error between two equal-length sequences:
/// sqrt(sum (s - s*)^2 / M).
pub fn rms_error(actual: &SymbolSequence, predicted: &SymbolSequence) -> Result<f64, ForecastError> {
    if actual.len() != predicted.len() {
        return Err(ForecastError::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(ForecastError::Empty);
    }
    let sum_sq: f64 = actual
        .symbols()
        .iter()
        .zip(predicted.symbols())
        .map(|(&a, &p)| {
            let d = (a - p) as f64;
            d * d
        })
        .sum();
    Ok((sum_sq / actual.len() as f64).sqrt())
}

/// Which half trains the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SplitDirection {
    /// Train on the first half, forecast the second (the past
    /// predicting the future).
    #[default]
    Forward,
    /// Train on the second half, forecast the first (the future
    /// predicting the past).
    Reverse,
}

/// Parameters of the reconstruction pipeline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForecastParams {
    pub alphabet_size: usize,
    pub order: usize,
    pub direction: SplitDirection,
}

impl ForecastParams {
    pub fn new(alphabet_size: usize, order: usize) -> Self {
        Self {
            alphabet_size,
            order,
            direction: SplitDirection::Forward,
        }
    }

    pub fn reversed(mut self) -> Self {
        self.direction = SplitDirection::Reverse;
        self
    }
}

/// The deterministic part of a reconstruction run: coded halves, the
/// fitted model, and the price window the forecast is compared against.
#[derive(Debug, Clone)]
pub struct PreparedForecast {
    pub scheme: CodingScheme,
    /// The whole series coded under the training-half scheme.
    pub coded: SymbolSequence,
    pub train: SymbolSequence,
    pub test: SymbolSequence,
    pub model: TransitionModel,
    /// Price at the start of the test window; reconstructed paths are
    /// anchored here.
    pub anchor_price: f64,
    /// Actual prices over the test window, length test.len() + 1.
    pub actual_prices: Vec<f64>,
    /// Index into the input series where the test price window begins.
    pub price_offset: usize,
}

/// Runs the deterministic pipeline stages: 1-day returns, scheme fitted
/// on the training half, coding, split, and model estimation.
pub fn prepare(
    series: &PriceSeries,
    params: &ForecastParams,
) -> Result<PreparedForecast, ForecastError> {
    let returns = preprocess::log_returns(series, 1)?;
    let m = returns.len() / 2;
    let train_slice = match params.direction {
        SplitDirection::Forward => &returns.values()[..m],
        SplitDirection::Reverse => &returns.values()[m..],
    };
    let scheme = CodingScheme::from_slice(params.alphabet_size, train_slice)?;
    let coded = coder::encode(&returns, &scheme);
    let (first, second) = split_sequence(&coded)?;
    let (train, test) = match params.direction {
        SplitDirection::Forward => (first, second),
        SplitDirection::Reverse => (second, first),
    };
    let model = markov::build_model(&train, params.order)?;
    let prices = series.prices();
    let (actual_prices, price_offset) = match params.direction {
        SplitDirection::Forward => (prices[m..].to_vec(), m),
        SplitDirection::Reverse => (prices[..=m].to_vec(), 0),
    };
    Ok(PreparedForecast {
        scheme,
        coded,
        train,
        test,
        model,
        anchor_price: actual_prices[0],
        actual_prices,
        price_offset,
    })
}

/// One seeded forecast/baseline pair with its errors.
#[derive(Debug, Clone)]
pub struct ForecastRun {
    pub forecast: SymbolSequence,
    pub baseline: SymbolSequence,
    pub markov_error: f64,
    pub baseline_error: f64,
    pub seed: u64,
}

/// Runs the stochastic stage once: forecast the test half, draw the
/// baseline, score both.
pub fn forecast_run(prepared: &PreparedForecast, seed_value: u64) -> ForecastRun {
    run_once(
        &prepared.model,
        &prepared.test,
        &prepared.scheme,
        seed_value,
    )
}

fn run_once(
    model: &TransitionModel,
    test: &SymbolSequence,
    scheme: &CodingScheme,
    seed_value: u64,
) -> ForecastRun {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed_value);
    let forecast = one_step_forecast(model, test, &mut rng)
        .expect("prepared model accepts test contexts");
    let baseline = random_baseline(scheme, test.len(), &mut rng);
    let markov_error = rms_error(test, &forecast).expect("equal lengths by construction");
    let baseline_error = rms_error(test, &baseline).expect("equal lengths by construction");
    ForecastRun {
        forecast,
        baseline,
        markov_error,
        baseline_error,
        seed: seed_value,
    }
}

/// Error summary of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub markov_error: f64,
    pub baseline_error: f64,
}

/// Per-time-step mean absolute deviation of the reconstructed price
/// paths from the actual prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceDeviationCurves {
    pub markov: Vec<f64>,
    pub baseline: Vec<f64>,
}

/// Aggregate of a seeded Monte Carlo comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    #[serde(rename = "per_run")]
    pub runs: Vec<RunSummary>,
    pub mean_markov_error: f64,
    pub mean_baseline_error: f64,
    pub price_deviation_curves: PriceDeviationCurves,
}

/// Runs the full pipeline `num_sims` times with per-run seeds derived
/// from the master seed, aggregating symbol-space errors and
/// price-space deviation curves.
pub fn monte_carlo(
    series: &PriceSeries,
    params: &ForecastParams,
    num_sims: usize,
    master_seed: u64,
) -> Result<MonteCarloReport, ForecastError> {
    if num_sims == 0 {
        return Err(ForecastError::NoSimulations);
    }
    let prepared = prepare(series, params)?;
    let runs: Vec<ForecastRun> = (0..num_sims)
        .into_par_iter()
        .map(|i| forecast_run(&prepared, seed::derive(master_seed, i as u64)))
        .collect();

    let steps = prepared.actual_prices.len();
    let mut markov_dev = vec![0.0f64; steps];
    let mut baseline_dev = vec![0.0f64; steps];
    let mut summaries = Vec::with_capacity(num_sims);
    for (index, run) in runs.iter().enumerate() {
        let markov_path = coder::reconstruct_prices(
            prepared.anchor_price,
            &coder::decode_sequence(&run.forecast),
        )?;
        let baseline_path = coder::reconstruct_prices(
            prepared.anchor_price,
            &coder::decode_sequence(&run.baseline),
        )?;
        for (t, &actual) in prepared.actual_prices.iter().enumerate() {
            markov_dev[t] += (markov_path[t] - actual).abs();
            baseline_dev[t] += (baseline_path[t] - actual).abs();
        }
        summaries.push(RunSummary {
            run: index,
            seed: run.seed,
            markov_error: run.markov_error,
            baseline_error: run.baseline_error,
        });
    }
    let n = num_sims as f64;
    for value in markov_dev.iter_mut().chain(baseline_dev.iter_mut()) {
        *value /= n;
    }
    let mean_markov_error = summaries.iter().map(|r| r.markov_error).sum::<f64>() / n;
    let mean_baseline_error = summaries.iter().map(|r| r.baseline_error).sum::<f64>() / n;
    Ok(MonteCarloReport {
        runs: summaries,
        mean_markov_error,
        mean_baseline_error,
        price_deviation_curves: PriceDeviationCurves {
            markov: markov_dev,
            baseline: baseline_dev,
        },
    })
}

/// Symbol-space evaluation of an existing coded sequence (no price
/// stage): split, estimate, forecast, score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolEvalReport {
    pub runs: Vec<RunSummary>,
    pub mean_markov_error: f64,
    pub mean_baseline_error: f64,
}

pub fn evaluate_symbols(
    symbols: &SymbolSequence,
    order: usize,
    num_sims: usize,
    master_seed: u64,
) -> Result<SymbolEvalReport, ForecastError> {
    if num_sims == 0 {
        return Err(ForecastError::NoSimulations);
    }
    let (train, test) = split_sequence(symbols)?;
    let model = markov::build_model(&train, order)?;
    let scheme = *symbols.scheme();
    let runs: Vec<RunSummary> = (0..num_sims)
        .into_par_iter()
        .map(|i| {
            let seed_value = seed::derive(master_seed, i as u64);
            let run = run_once(&model, &test, &scheme, seed_value);
            RunSummary {
                run: i,
                seed: seed_value,
                markov_error: run.markov_error,
                baseline_error: run.baseline_error,
            }
        })
        .collect();
    let n = num_sims as f64;
    Ok(SymbolEvalReport {
        mean_markov_error: runs.iter().map(|r| r.markov_error).sum::<f64>() / n,
        mean_baseline_error: runs.iter().map(|r| r.baseline_error).sum::<f64>() / n,
        runs,
    })
}

/// One row of the K-sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSweepRow {
    pub k: usize,
    pub mean_markov_error: f64,
    pub mean_baseline_error: f64,
}

/// Repeats the Monte Carlo comparison for each chain length K. Seeds
/// are shared across K values, so a single-element sweep reproduces the
/// plain Monte Carlo result for that K.
pub fn k_sweep(
    series: &PriceSeries,
    alphabet_size: usize,
    k_values: &[usize],
    sims_per_k: usize,
    master_seed: u64,
) -> Result<Vec<KSweepRow>, ForecastError> {
    k_values
        .iter()
        .map(|&k| {
            let params = ForecastParams::new(alphabet_size, k);
            let report = monte_carlo(series, &params, sims_per_k, master_seed)?;
            Ok(KSweepRow {
                k,
                mean_markov_error: report.mean_markov_error,
                mean_baseline_error: report.mean_baseline_error,
            })
        })
        .collect()
}
