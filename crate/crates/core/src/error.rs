//! Error types for every stage of the pipeline.

use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

/// Failures while loading or slicing price data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("market_data: file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("market_data: i/o error reading {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("market_data: malformed header: {0}")]
    MalformedHeader(String),
    #[error("market_data: malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("market_data: series is empty")]
    EmptySeries,
    #[error("market_data: dates not strictly increasing at {date} (previous {previous})")]
    NonMonotoneDates { previous: NaiveDate, date: NaiveDate },
    #[error("market_data: invalid year range {start}..={end}")]
    InvalidRange { start: i32, end: i32 },
    #[error("market_data: csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndicatorError {
    #[error("indicators: series too short: {len} bars, need at least {required}")]
    SeriesTooShort { len: usize, required: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenomeError {
    #[error("genome: invalid genome: {0}")]
    InvalidGenome(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum BacktestError {
    #[error("backtest: degenerate price {price} at day {day}")]
    DegeneratePrice { day: usize, price: f64 },
    #[error("backtest: length mismatch: {what} has {got} rows, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("backtest: need at least 2 bars, got {0}")]
    TooFewBars(usize),
    #[error("backtest: invalid cost rate {0}")]
    InvalidCost(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum Nsga2Error {
    #[error("nsga2: invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Error)]
pub enum RollingError {
    #[error("rolling: invalid span: {0}")]
    InvalidSpan(String),
    #[error("rolling: window train {train_start}-{train_end} / test {test_start}-{test_end} failed: {source}")]
    Window {
        train_start: i32,
        train_end: i32,
        test_start: i32,
        test_end: i32,
        #[source]
        source: Box<Error>,
    },
}

/// Crate-level error; wraps the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Genome(#[from] GenomeError),
    #[error(transparent)]
    Backtest(#[from] BacktestError),
    #[error(transparent)]
    Nsga2(#[from] Nsga2Error),
    #[error(transparent)]
    Rolling(#[from] RollingError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
