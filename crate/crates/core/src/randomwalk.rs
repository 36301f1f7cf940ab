//! Unit-step coin-toss walk: the fully random baseline process.
//!
//! Each step moves the price up or down by exactly one unit with equal
//! probability. The ensemble mean stays at the start value; the
//! ensemble standard deviation after t steps is sqrt(t) for unit steps.

use rand::Rng;
use rayon::prelude::*;

use crate::seed;

/// One realized walk. `values[i]` is the price after i + 1 steps; the
/// start price itself is kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    start_price: f64,
    values: Vec<f64>,
}

impl WalkPath {
    pub fn start_price(&self) -> f64 {
        self.start_price
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
}

/// Simulates a walk of the given number of +-1 steps.
pub fn simulate_walk(p0: f64, steps: usize, rng: &mut impl Rng) -> WalkPath {
    let mut values = Vec::with_capacity(steps);
    let mut current = p0;
    for _ in 0..steps {
        current += if rng.random::<bool>() { 1.0 } else { -1.0 };
        values.push(current);
    }
    WalkPath {
        start_price: p0,
        values,
    }
}

/// Ensemble mean and sample standard deviation per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStep {
    pub mean: f64,
    pub std_dev: f64,
}

/// Simulates `num_paths` independent walks (per-path seeds derived from
/// the master seed) and reduces them, ordered by path index, to
/// per-step mean and sample standard deviation. `stats[i]` describes
/// the ensemble after i + 1 steps.
pub fn ensemble_stats(
    p0: f64,
    steps: usize,
    num_paths: usize,
    master_seed: u64,
) -> Vec<EnsembleStep> {
    assert!(num_paths >= 2, "need at least two paths for a sample std");
    let paths: Vec<WalkPath> = (0..num_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng_for(master_seed, i as u64);
            simulate_walk(p0, steps, &mut rng)
        })
        .collect();
    (0..steps)
        .map(|t| {
            let n = num_paths as f64;
            let mean = paths.iter().map(|p| p.values()[t]).sum::<f64>() / n;
            let ss = paths
                .iter()
                .map(|p| (p.values()[t] - mean).powi(2))
                .sum::<f64>();
            EnsembleStep {
                mean,
                std_dev: (ss / (n - 1.0)).sqrt(),
            }
        })
        .collect()
}
