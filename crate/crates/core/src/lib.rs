//! Reconstruction of the stochastic process behind a daily price series.
//!
//! The pipeline: ingest an OHLCV-style CSV export ([`ingest`]), compute
//! n-day log returns ([`preprocess`]), code them into a symmetric
//! N-symbol alphabet ([`coder`]), estimate an order-K transition tensor
//! with context backoff ([`markov`]), and forecast the coded test half
//! one step ahead against a uniform random baseline ([`forecast`]),
//! optionally rebuilding price paths from the forecast symbols. The
//! [`stylized`] module provides the stationarity diagnostics (sliding
//! volatility, n-day return maxima, moment scaling, autocorrelations)
//! and [`randomwalk`] the unit-step coin-toss baseline.
//!
//! All randomness is drawn from ChaCha8 generators seeded through
//! [`seed::derive`], so every result is a pure function of its inputs
//! and a master seed.

pub mod coder;
pub mod forecast;
pub mod ingest;
pub mod markov;
pub mod preprocess;
pub mod randomwalk;
pub mod seed;
pub mod stylized;

pub use coder::{CodingScheme, SymbolSequence};
pub use ingest::PriceSeries;
pub use markov::{ConditionalDistribution, TransitionModel};
pub use preprocess::{ReturnSeries, TrendModel};
