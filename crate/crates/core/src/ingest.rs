//! Price history ingestion from daily-history CSV exports.
//!
//! The expected layout is the seven-column format
//! `Date,Open,High,Low,Close,Adj Close,Volume` with `YYYY-MM-DD` dates.
//! Only the date and the adjusted close are kept; rows whose adjusted
//! close is the literal token `null` (or empty) are skipped and counted.

use std::io::{Read, Write};

use chrono::NaiveDate;
use thiserror::Error;

/// Column names the parser requires, in order.
pub const EXPECTED_COLUMNS: [&str; 7] =
    ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(
        "malformed header {found:?}: expected columns `Date,Open,High,Low,Close,Adj Close,Volume`"
    )]
    MalformedHeader { found: String },
    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("insufficient data: {rows} usable row(s), need at least 2")]
    InsufficientData { rows: usize },
    #[error("duplicate date {date}")]
    DuplicateDate { date: NaiveDate },
    #[error("dates not strictly increasing at row {index}")]
    UnorderedDates { index: usize },
    #[error("row {index} ({date}): price {price} is not positive and finite")]
    InvalidPrice {
        index: usize,
        date: NaiveDate,
        price: f64,
    },
    #[error("dates and prices have different lengths ({dates} vs {prices})")]
    LengthMismatch { dates: usize, prices: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Dated, strictly positive adjusted-close observations, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
    symbol_label: String,
}

impl PriceSeries {
    /// Builds a series and checks every invariant: equal lengths, at
    /// least two rows, strictly increasing dates, positive finite prices.
    pub fn new(
        dates: Vec<NaiveDate>,
        prices: Vec<f64>,
        symbol_label: impl Into<String>,
    ) -> Result<Self, IngestError> {
        if dates.len() != prices.len() {
            return Err(IngestError::LengthMismatch {
                dates: dates.len(),
                prices: prices.len(),
            });
        }
        let series = Self {
            dates,
            prices,
            symbol_label: symbol_label.into(),
        };
        series.check_invariants()?;
        Ok(series)
    }

    fn check_invariants(&self) -> Result<(), IngestError> {
        if self.prices.len() < 2 {
            return Err(IngestError::InsufficientData {
                rows: self.prices.len(),
            });
        }
        for (index, pair) in self.dates.windows(2).enumerate() {
            if pair[1] == pair[0] {
                return Err(IngestError::DuplicateDate { date: pair[0] });
            }
            if pair[1] < pair[0] {
                return Err(IngestError::UnorderedDates { index: index + 1 });
            }
        }
        for (index, (&date, &price)) in self.dates.iter().zip(&self.prices).enumerate() {
            if !(price.is_finite() && price > 0.0) {
                return Err(IngestError::InvalidPrice { index, date, price });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn label(&self) -> &str {
        &self.symbol_label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.symbol_label = label.into();
        self
    }
}

/// Result of parsing a price CSV: the validated series plus how many
/// data rows were skipped for a missing adjusted close.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub series: PriceSeries,
    pub skipped_rows: usize,
}

/// Parses a seven-column daily-history CSV into a [`PriceSeries`].
///
/// Rows are re-sorted by date when the file is in descending order.
/// Rows with an empty or `null` adjusted close are skipped and counted
/// in [`ParsedCsv::skipped_rows`].
pub fn parse_price_csv(mut reader: impl Read) -> Result<ParsedCsv, IngestError> {
    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    // Some exports carry a UTF-8 BOM.
    let raw = raw.strip_prefix(b"\xef\xbb\xbf").unwrap_or(&raw);

    let mut csv_reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(raw);

    let header = csv_reader.headers()?.clone();
    if header.iter().ne(EXPECTED_COLUMNS) {
        return Err(IngestError::MalformedHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut skipped_rows = 0usize;
    for record in csv_reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != EXPECTED_COLUMNS.len() {
            return Err(IngestError::BadRow {
                line,
                reason: format!("expected 7 fields, found {}", record.len()),
            });
        }
        let adj_close = &record[5];
        if adj_close.is_empty() || adj_close == "null" {
            skipped_rows += 1;
            continue;
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            IngestError::BadRow {
                line,
                reason: format!("bad date {:?}: {e}", &record[0]),
            }
        })?;
        let price: f64 = adj_close.parse().map_err(|_| IngestError::BadRow {
            line,
            reason: format!("non-numeric adjusted close {adj_close:?}"),
        })?;
        rows.push((date, price));
    }

    if rows.len() < 2 {
        return Err(IngestError::InsufficientData { rows: rows.len() });
    }
    rows.sort_by_key(|&(date, _)| date);

    let (dates, prices) = rows.into_iter().unzip();
    let series = PriceSeries::new(dates, prices, "")?;
    Ok(ParsedCsv {
        series,
        skipped_rows,
    })
}

/// Returns the series unchanged after re-checking every invariant.
pub fn validate_series(series: PriceSeries) -> Result<PriceSeries, IngestError> {
    series.check_invariants()?;
    Ok(series)
}

/// Writes a series back out in the seven-column layout accepted by
/// [`parse_price_csv`]. The adjusted close fills all four price columns
/// and volume is written as 0.
pub fn write_price_csv(series: &PriceSeries, mut writer: impl Write) -> std::io::Result<()> {
    writeln!(writer, "{}", EXPECTED_COLUMNS.join(","))?;
    for (date, price) in series.dates().iter().zip(series.prices()) {
        writeln!(writer, "{date},{price},{price},{price},{price},{price},0")?;
    }
    Ok(())
}
