//! Order-K transition tensor estimation by sequence counting, with
//! context backoff and inverse-CDF sampling.
//!
//! Counting follows the two-array scheme: every window of length z+1 in
//! the training sequence bumps the successor count of its length-z
//! context and that context's total. All context lengths 0..=K are
//! populated so an unseen full-order context can fall back to the
//! longest shorter context that was observed, ultimately the marginal
//! symbol distribution at z = 0. Contexts are stored sparsely and
//! oldest-to-newest; backoff drops the oldest symbol first.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::coder::SymbolSequence;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("insufficient data: order {order} needs at least {needed} symbols, got {got}")]
    InsufficientData {
        order: usize,
        needed: usize,
        got: usize,
    },
    #[error("context length {got} exceeds model order {order}")]
    ContextTooLong { got: usize, order: usize },
    #[error("context symbol {symbol} outside the alphabet [-{beta}, {beta}]")]
    SymbolOutOfRange { symbol: i32, beta: i32 },
    #[error("no transition data: the model was built from an empty sequence")]
    NoData,
    #[error("probabilities must be non-negative and sum to 1, got sum {sum}")]
    NotADistribution { sum: f64 },
}

/// Successor counts for one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    counts: Vec<u64>,
    total: u64,
}

impl CountRow {
    fn new(alphabet_size: usize) -> Self {
        Self {
            counts: vec![0; alphabet_size],
            total: 0,
        }
    }

    /// Successor counts indexed by symbol + beta.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Raw transition counts for every context length 0..=K.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCounts {
    order: usize,
    alphabet_size: usize,
    levels: Vec<BTreeMap<Vec<i32>, CountRow>>,
}

impl TransitionCounts {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn beta(&self) -> i32 {
        ((self.alphabet_size - 1) / 2) as i32
    }

    /// Observed contexts of one length, in lexicographic order.
    pub fn contexts(&self, length: usize) -> impl Iterator<Item = (&[i32], &CountRow)> {
        self.levels[length]
            .iter()
            .map(|(ctx, row)| (ctx.as_slice(), row))
    }

    /// Count row for a specific context, if it was ever observed.
    pub fn row(&self, context: &[i32]) -> Option<&CountRow> {
        self.levels.get(context.len())?.get(context)
    }
}

/// Counts every (context, successor) window of the training sequence at
/// all context lengths z = 0..=k. At length z there are len - z windows.
pub fn count_transitions(train: &SymbolSequence, k: usize) -> Result<TransitionCounts, MarkovError> {
    let symbols = train.symbols();
    if symbols.len() < k + 1 {
        return Err(MarkovError::InsufficientData {
            order: k,
            needed: k + 1,
            got: symbols.len(),
        });
    }
    let alphabet_size = train.scheme().alphabet_size();
    let beta = train.scheme().beta();
    let mut levels = Vec::with_capacity(k + 1);
    for z in 0..=k {
        let mut level: BTreeMap<Vec<i32>, CountRow> = BTreeMap::new();
        for window in symbols.windows(z + 1) {
            let (context, successor) = window.split_at(z);
            let row = level
                .entry(context.to_vec())
                .or_insert_with(|| CountRow::new(alphabet_size));
            row.counts[(successor[0] + beta) as usize] += 1;
            row.total += 1;
        }
        levels.push(level);
    }
    Ok(TransitionCounts {
        order: k,
        alphabet_size,
        levels,
    })
}

/// Conditional next-symbol distribution over the alphabet -beta..=beta.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalDistribution {
    probabilities: Vec<f64>,
    source_context_length: usize,
}

impl ConditionalDistribution {
    /// Builds a distribution from explicit probabilities; they must be
    /// non-negative and sum to 1 within 1e-12.
    pub fn new(
        probabilities: Vec<f64>,
        source_context_length: usize,
    ) -> Result<Self, MarkovError> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-12 {
            return Err(MarkovError::NotADistribution { sum });
        }
        Ok(Self {
            probabilities,
            source_context_length,
        })
    }

    /// Probabilities indexed by symbol + beta.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Context length actually used after backoff.
    pub fn source_context_length(&self) -> usize {
        self.source_context_length
    }

    pub fn probability_of(&self, symbol: i32) -> f64 {
        let beta = (self.probabilities.len() as i32 - 1) / 2;
        self.probabilities[(symbol + beta) as usize]
    }
}

/// Inverse-CDF selection: the smallest symbol x (in alphabet order)
/// with positive probability such that epsilon <= cumulative
/// probability up to and including x. epsilon = 1.0 selects the largest
/// symbol with positive probability.
pub fn sample_next(dist: &ConditionalDistribution, epsilon: f64) -> i32 {
    let probs = dist.probabilities();
    let beta = (probs.len() as i32 - 1) / 2;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (index, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cumulative += p;
            last_positive = index as i32 - beta;
            if epsilon <= cumulative {
                return last_positive;
            }
        }
    }
    // Floating-point undershoot of the final cumulative sum.
    last_positive
}

/// Estimated transition model: counts at every context length plus the
/// quotient rule count/total for conditional probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    counts: TransitionCounts,
}

/// One exported (context, successor) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionRow {
    pub context: Vec<i32>,
    pub successor: i32,
    pub count: u64,
    pub probability: f64,
}

/// Builds the transition model for a training sequence.
pub fn build_model(train: &SymbolSequence, k: usize) -> Result<TransitionModel, MarkovError> {
    Ok(TransitionModel {
        counts: count_transitions(train, k)?,
    })
}

impl TransitionModel {
    pub fn order(&self) -> usize {
        self.counts.order()
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.alphabet_size()
    }

    pub fn beta(&self) -> i32 {
        self.counts.beta()
    }

    pub fn counts(&self) -> &TransitionCounts {
        &self.counts
    }

    /// Conditional distribution for a context of length <= K, backing
    /// off by dropping the oldest symbol until an observed context is
    /// found; the empty context yields the training marginal.
    pub fn conditional(&self, context: &[i32]) -> Result<ConditionalDistribution, MarkovError> {
        if context.len() > self.order() {
            return Err(MarkovError::ContextTooLong {
                got: context.len(),
                order: self.order(),
            });
        }
        let beta = self.beta();
        if let Some(&bad) = context.iter().find(|s| s.abs() > beta) {
            return Err(MarkovError::SymbolOutOfRange { symbol: bad, beta });
        }
        let mut ctx = context;
        loop {
            if let Some(row) = self.counts.row(ctx) {
                if row.total() > 0 {
                    let probabilities = row
                        .counts()
                        .iter()
                        .map(|&c| c as f64 / row.total() as f64)
                        .collect();
                    return Ok(ConditionalDistribution {
                        probabilities,
                        source_context_length: ctx.len(),
                    });
                }
            }
            if ctx.is_empty() {
                return Err(MarkovError::NoData);
            }
            ctx = &ctx[1..];
        }
    }

    /// Every stored cell, level by level (z ascending), contexts in
    /// lexicographic order, successors in alphabet order.
    pub fn export_rows(&self) -> Vec<TransitionRow> {
        let beta = self.beta();
        let mut rows = Vec::new();
        for z in 0..=self.order() {
            for (context, row) in self.counts.contexts(z) {
                for (index, &count) in row.counts().iter().enumerate() {
                    rows.push(TransitionRow {
                        context: context.to_vec(),
                        successor: index as i32 - beta,
                        count,
                        probability: count as f64 / row.total() as f64,
                    });
                }
            }
        }
        rows
    }

    /// Text rendering of the full-order level: a matrix with one column
    /// per observed context and one row per successor symbol.
    pub fn render_full_order(&self) -> String {
        let beta = self.beta();
        let contexts: Vec<(&[i32], &CountRow)> = self.counts.contexts(self.order()).collect();
        let mut out = String::new();
        let ctx_label = |ctx: &[i32]| {
            if ctx.is_empty() {
                "()".to_string()
            } else {
                ctx.iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            }
        };
        let _ = write!(out, "{:>8}", "");
        for (ctx, _) in &contexts {
            let _ = write!(out, " {:>10}", ctx_label(ctx));
        }
        out.push('\n');
        for symbol in -beta..=beta {
            let _ = write!(out, "{symbol:>8}");
            for (_, row) in &contexts {
                let p = row.counts()[(symbol + beta) as usize] as f64 / row.total() as f64;
                let _ = write!(out, " {p:>10.4}");
            }
            out.push('\n');
        }
        out
    }
}
