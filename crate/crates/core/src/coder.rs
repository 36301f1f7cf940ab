//! Coding of returns into a symmetric N-symbol alphabet and back.
//!
//! The alphabet is {-beta, ..., beta} with N = 2*beta + 1 symbols. A
//! return r maps to a symbol by where the deviation d = r - mean falls
//! among uniform bin boundaries at multiples of sigma/beta: symbol 0
//! covers [-sigma/beta, sigma/beta], magnitude k covers
//! (k*sigma/beta, (k+1)*sigma/beta], and anything beyond +-sigma maps to
//! +-beta. Ties on a boundary go to the smaller-magnitude symbol.
//! Decoding maps symbol s back to mean + 2*sigma/(N-1) * s.

use thiserror::Error;

use crate::preprocess::{population_stats, ReturnSeries};

#[derive(Debug, Error)]
pub enum CoderError {
    #[error("alphabet size must be odd and >= 3, got {size}")]
    InvalidAlphabet { size: usize },
    #[error("degenerate coding scheme: sigma = {sigma} (constant returns cannot be coded)")]
    DegenerateScheme { sigma: f64 },
    #[error("symbol {symbol} outside the alphabet [-{beta}, {beta}]")]
    SymbolOutOfRange { symbol: i32, beta: i32 },
    #[error("price anchor must be positive and finite, got {p0}")]
    InvalidAnchor { p0: f64 },
    #[error("cannot parse symbol token {token:?}")]
    BadSymbolToken { token: String },
}

/// Alphabet geometry: size N, half-width beta, and the (mean, sigma)
/// that position the bin boundaries. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingScheme {
    alphabet_size: usize,
    beta: i32,
    mean: f64,
    sigma: f64,
}

impl CodingScheme {
    pub fn new(alphabet_size: usize, mean: f64, sigma: f64) -> Result<Self, CoderError> {
        if alphabet_size < 3 || alphabet_size.is_multiple_of(2) {
            return Err(CoderError::InvalidAlphabet {
                size: alphabet_size,
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(CoderError::DegenerateScheme { sigma });
        }
        Ok(Self {
            alphabet_size,
            beta: ((alphabet_size - 1) / 2) as i32,
            mean,
            sigma,
        })
    }

    /// Scheme whose (mean, sigma) are the cached statistics of a return
    /// series.
    pub fn from_returns(alphabet_size: usize, returns: &ReturnSeries) -> Result<Self, CoderError> {
        Self::new(alphabet_size, returns.mean(), returns.sigma())
    }

    /// Scheme fitted on a raw slice of returns, e.g. the training half
    /// of a split series.
    pub fn from_slice(alphabet_size: usize, returns: &[f64]) -> Result<Self, CoderError> {
        let (mean, sigma) = population_stats(returns);
        Self::new(alphabet_size, mean, sigma)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn beta(&self) -> i32 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Symbols in alphabet order, -beta..=beta.
    pub fn symbols(&self) -> impl Iterator<Item = i32> {
        -self.beta..=self.beta
    }

    /// Codes a single return.
    pub fn encode_value(&self, r: f64) -> i32 {
        let d = r - self.mean;
        let scaled = d.abs() * self.beta as f64;
        let mut magnitude = self.beta;
        for k in 0..self.beta {
            // Bin k covers (k, k+1] * sigma/beta; the closed upper end
            // keeps boundary ties on the smaller magnitude.
            if scaled <= (k + 1) as f64 * self.sigma {
                magnitude = k;
                break;
            }
        }
        if d < 0.0 {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Inverse coding: symbol s maps to mean + 2*sigma/(N-1) * s.
    pub fn decode_symbol(&self, symbol: i32) -> Result<f64, CoderError> {
        if symbol.abs() > self.beta {
            return Err(CoderError::SymbolOutOfRange {
                symbol,
                beta: self.beta,
            });
        }
        Ok(self.decode_unchecked(symbol))
    }

    fn decode_unchecked(&self, symbol: i32) -> f64 {
        self.mean + 2.0 * self.sigma / (self.alphabet_size as f64 - 1.0) * symbol as f64
    }
}

/// A coded sequence together with the scheme that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    symbols: Vec<i32>,
    scheme: CodingScheme,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<i32>, scheme: CodingScheme) -> Result<Self, CoderError> {
        if let Some(&bad) = symbols.iter().find(|s| s.abs() > scheme.beta()) {
            return Err(CoderError::SymbolOutOfRange {
                symbol: bad,
                beta: scheme.beta(),
            });
        }
        Ok(Self { symbols, scheme })
    }

    pub fn symbols(&self) -> &[i32] {
        &self.symbols
    }

    pub fn scheme(&self) -> &CodingScheme {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// One-line serialization: comma-separated signed integers.
    pub fn to_line(&self) -> String {
        format_symbol_line(&self.symbols)
    }
}

/// Codes every return of a series under the given scheme.
pub fn encode(returns: &ReturnSeries, scheme: &CodingScheme) -> SymbolSequence {
    let symbols = returns
        .values()
        .iter()
        .map(|&r| scheme.encode_value(r))
        .collect();
    SymbolSequence {
        symbols,
        scheme: *scheme,
    }
}

/// Decodes a whole sequence; the sequence invariant guarantees every
/// symbol is inside its own scheme's alphabet.
pub fn decode_sequence(sequence: &SymbolSequence) -> Vec<f64> {
    sequence
        .symbols()
        .iter()
        .map(|&s| sequence.scheme().decode_unchecked(s))
        .collect()
}

/// Rebuilds a price path from an anchor and a list of log returns:
/// p[0] = p0, p[i+1] = p[i] * exp(r[i]). Output has one more element
/// than the input.
pub fn reconstruct_prices(p0: f64, returns: &[f64]) -> Result<Vec<f64>, CoderError> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(CoderError::InvalidAnchor { p0 });
    }
    let mut prices = Vec::with_capacity(returns.len() + 1);
    prices.push(p0);
    let mut current = p0;
    for &r in returns {
        current *= r.exp();
        prices.push(current);
    }
    Ok(prices)
}

/// Formats symbols as a single comma-separated line.
pub fn format_symbol_line(symbols: &[i32]) -> String {
    symbols
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-separated line of signed integer symbols. The empty
/// line (or all whitespace) parses as the empty sequence.
pub fn parse_symbol_line(line: &str) -> Result<Vec<i32>, CoderError> {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|token| {
            token
                .trim()
                .parse::<i32>()
                .map_err(|_| CoderError::BadSymbolToken {
                    token: token.to_string(),
                })
        })
        .collect()
}
