//! Daily OHLC price series: loading, validation and calendar slicing.

use std::fs::File;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use log::warn;

use crate::error::DataError;

const DATE_FORMAT: &str = "%Y-%m-%d";

/// One trading day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> Self {
        Self {
            date,
            open,
            high,
            low,
            close,
        }
    }

    /// Checks positivity and `low <= open, close <= high`.
    pub fn validate(&self) -> Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(format!("non-positive or non-finite price on {}", self.date));
        }
        if self.low > self.high
            || self.open < self.low
            || self.open > self.high
            || self.close < self.low
            || self.close > self.high
        {
            return Err(format!(
                "OHLC ordering violated on {} (o={}, h={}, l={}, c={})",
                self.date, self.open, self.high, self.low, self.close
            ));
        }
        Ok(())
    }
}

/// Validated, date-ascending series of bars. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcSeries {
    bars: Vec<OhlcBar>,
}

impl OhlcSeries {
    /// Builds a series, enforcing bar validity and strictly increasing dates.
    pub fn from_bars(bars: Vec<OhlcBar>) -> Result<Self, DataError> {
        if bars.is_empty() {
            return Err(DataError::EmptySeries);
        }
        for (i, bar) in bars.iter().enumerate() {
            bar.validate().map_err(|reason| DataError::MalformedRow {
                line: i as u64 + 1,
                reason,
            })?;
            if i > 0 && bars[i - 1].date >= bar.date {
                return Err(DataError::NonMonotoneDates {
                    previous: bars[i - 1].date,
                    date: bar.date,
                });
            }
        }
        Ok(Self { bars })
    }

    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    pub fn first_year(&self) -> i32 {
        self.bars[0].date.year()
    }

    pub fn last_year(&self) -> i32 {
        self.bars[self.bars.len() - 1].date.year()
    }

    /// Sub-series over a bar index range. Empty ranges are an error.
    pub fn slice(&self, range: Range<usize>) -> Result<Self, DataError> {
        let bars = self.bars.get(range).unwrap_or(&[]);
        if bars.is_empty() {
            return Err(DataError::EmptySeries);
        }
        Ok(Self {
            bars: bars.to_vec(),
        })
    }

    /// Index range of the bars whose calendar year lies in `[start_year, end_year]`.
    pub fn year_range(&self, start_year: i32, end_year: i32) -> Range<usize> {
        let lo = self.bars.partition_point(|b| b.date.year() < start_year);
        let hi = self.bars.partition_point(|b| b.date.year() <= end_year);
        lo..hi.max(lo)
    }

    /// First index whose date is on or after `date`.
    pub fn index_on_or_after(&self, date: NaiveDate) -> usize {
        self.bars.partition_point(|b| b.date < date)
    }

    /// Writes the series in the input CSV layout.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["Date", "Open", "High", "Low", "Close"])?;
        for b in &self.bars {
            writer.write_record([
                b.date.format(DATE_FORMAT).to_string(),
                b.open.to_string(),
                b.high.to_string(),
                b.low.to_string(),
                b.close.to_string(),
            ])?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// A row skipped during loading because a price field was missing or non-numeric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRow {
    pub line: u64,
    pub reason: String,
}

/// Result of [`load_ohlc`]: the series plus the rows that were dropped.
#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: OhlcSeries,
    pub dropped: Vec<DroppedRow>,
}

struct Columns {
    date: usize,
    open: usize,
    high: usize,
    low: usize,
    close: usize,
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Result<Self, DataError> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
                .ok_or_else(|| DataError::MalformedHeader(format!("missing column {name:?}")))
        };
        Ok(Self {
            date: find("date")?,
            open: find("open")?,
            high: find("high")?,
            low: find("low")?,
            close: find("close")?,
        })
    }
}

fn parse_price(field: Option<&str>) -> Option<f64> {
    let value: f64 = field?.trim().parse().ok()?;
    value.is_finite().then_some(value)
}

/// Loads a `Date,Open,High,Low,Close[,...]` CSV file.
///
/// Rows with a missing or non-numeric price are dropped and reported in
/// [`LoadedSeries::dropped`]. Rows with an unparseable date, a non-positive price or
/// broken OHLC ordering are rejected with [`DataError::MalformedRow`].
pub fn load_ohlc(path: impl AsRef<Path>) -> Result<LoadedSeries, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => DataError::FileNotFound(path.to_path_buf()),
        _ => DataError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    read_ohlc(file)
}

/// Same as [`load_ohlc`] over any reader.
pub fn read_ohlc<R: std::io::Read>(reader: R) -> Result<LoadedSeries, DataError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers()?.clone();
    let cols = Columns::from_header(&header)?;

    let mut bars: Vec<OhlcBar> = Vec::new();
    let mut dropped = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let date_field = record.get(cols.date).unwrap_or("").trim();
        if date_field.is_empty() && record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let date = NaiveDate::parse_from_str(date_field, DATE_FORMAT).map_err(|e| {
            DataError::MalformedRow {
                line,
                reason: format!("bad date {date_field:?}: {e}"),
            }
        })?;
        let prices = [cols.open, cols.high, cols.low, cols.close].map(|i| parse_price(record.get(i)));
        let [Some(open), Some(high), Some(low), Some(close)] = prices else {
            warn!("dropping row at line {line} ({date}): missing or non-numeric price");
            dropped.push(DroppedRow {
                line,
                reason: "missing or non-numeric price".into(),
            });
            continue;
        };
        let bar = OhlcBar::new(date, open, high, low, close);
        bar.validate()
            .map_err(|reason| DataError::MalformedRow { line, reason })?;
        if let Some(prev) = bars.last() {
            if prev.date >= date {
                return Err(DataError::NonMonotoneDates {
                    previous: prev.date,
                    date,
                });
            }
        }
        bars.push(bar);
    }
    if !dropped.is_empty() {
        warn!("dropped {} row(s) with missing prices", dropped.len());
    }
    let series = OhlcSeries::from_bars(bars)?;
    Ok(LoadedSeries { series, dropped })
}

/// Bars whose calendar year lies in `[start_year, end_year]`, order preserved.
pub fn slice_by_years(
    series: &OhlcSeries,
    start_year: i32,
    end_year: i32,
) -> Result<OhlcSeries, DataError> {
    if start_year > end_year {
        return Err(DataError::InvalidRange {
            start: start_year,
            end: end_year,
        });
    }
    series.slice(series.year_range(start_year, end_year))
}
