//! Shared test fixtures: a realistic synthetic daily price CSV
//! (stochastic volatility, business-day dates) and symbol sources with
//! known ground-truth structure.

#![allow(dead_code)]

use chrono::Datelike;
use rand::Rng;
use rand_distr::StandardNormal;

/// Deterministic daily price history in the seven-column CSV layout:
/// drifting log price with log-AR(1) stochastic volatility, weekends
/// skipped. Innovations are i.i.d., so returns are uncorrelated while
/// volatility clusters.
pub fn synthetic_daily_csv(rows: usize, master_seed: u64) -> String {
    let mut rng = market_recon::seed::rng_for(master_seed, 0);
    let mut date = chrono::NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    let mut log_price = 100.0f64.ln();
    let base_vol = 0.012f64.ln();
    let mut log_vol = base_vol;
    let mut out = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    for _ in 0..rows {
        let vol_shock: f64 = rng.sample(StandardNormal);
        log_vol = base_vol + 0.97 * (log_vol - base_vol) + 0.12 * vol_shock;
        let z: f64 = rng.sample(StandardNormal);
        log_price += 0.0002 + log_vol.exp() * z;
        let price = log_price.exp();
        out.push_str(&format!(
            "{date},{price:.6},{price:.6},{price:.6},{price:.6},{price:.6},1000\n"
        ));
        date = date.succ_opt().unwrap();
        while matches!(date.weekday(), chrono::Weekday::Sat | chrono::Weekday::Sun) {
            date = date.succ_opt().unwrap();
        }
    }
    out
}

/// Ground-truth order-1 transition matrix used by the estimator-recovery
/// and forecast-quality checks. Columns (from-states -1, 0, 1) are
/// strongly non-uniform.
pub const TRUTH_COLUMNS: [[f64; 3]; 3] = [
    [0.6, 0.3, 0.1],
    [0.15, 0.7, 0.15],
    [0.1, 0.3, 0.6],
];

/// Inverse-CDF draw independent of the library's sampler.
pub fn draw_symbol(probs: &[f64; 3], u: f64) -> i32 {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as i32 - 1;
        }
    }
    1
}

/// Samples a symbol chain from [`TRUTH_COLUMNS`].
pub fn markov_source(len: usize, master_seed: u64) -> Vec<i32> {
    let mut rng = market_recon::seed::rng_for(master_seed, 1);
    let mut symbols = vec![0i32];
    while symbols.len() < len {
        let state = (symbols[symbols.len() - 1] + 1) as usize;
        let u: f64 = rng.random();
        symbols.push(draw_symbol(&TRUTH_COLUMNS[state], u));
    }
    symbols
}
