//! Walk-forward protocol: evolve on the training years, score the resulting front
//! on the following test year(s), one report per window.

use std::io::Write;

use chrono::Days;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::backtest::{evaluate_strategy, BacktestConfig, FitnessReport};
use crate::error::{BacktestError, Error, Result, RollingError};
use crate::execution::Execution;
use crate::genome::{render_rules, Genome};
use crate::indicators::{build_signal_matrix_with, IndicatorParams, SignalMatrix};
use crate::market_data::OhlcSeries;
use crate::nsga2::{evolve, GenerationStats, Nsga2Params, ObjectiveVector};

/// Calendar-year train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub struct WindowSpec {
    pub train_start_year: i32,
    pub train_end_year: i32,
    pub test_start_year: i32,
    pub test_end_year: i32,
}

impl WindowSpec {
    pub fn label(&self) -> String {
        let test = if self.test_start_year == self.test_end_year {
            self.test_start_year.to_string()
        } else {
            format!("{}-{}", self.test_start_year, self.test_end_year)
        };
        format!("{}-{} / {}", self.train_start_year, self.train_end_year, test)
    }

    fn wrap(&self, source: impl Into<Error>) -> Error {
        RollingError::Window {
            train_start: self.train_start_year,
            train_end: self.train_end_year,
            test_start: self.test_start_year,
            test_end: self.test_end_year,
            source: Box::new(source.into()),
        }
        .into()
    }
}

/// Windows advancing by `test_years`, the first training on `first_train_year`,
/// the last testing no later than `last_test_year`.
pub fn make_windows(
    first_train_year: i32,
    last_test_year: i32,
    train_years: u32,
    test_years: u32,
) -> Result<Vec<WindowSpec>, RollingError> {
    if train_years == 0 || test_years == 0 {
        return Err(RollingError::InvalidSpan(
            "train and test lengths must be at least one year".into(),
        ));
    }
    let (train, test) = (train_years as i32, test_years as i32);
    let mut windows = Vec::new();
    let mut start = first_train_year;
    while start + train + test - 1 <= last_test_year {
        windows.push(WindowSpec {
            train_start_year: start,
            train_end_year: start + train - 1,
            test_start_year: start + train,
            test_end_year: start + train + test - 1,
        });
        start += test;
    }
    if windows.is_empty() {
        return Err(RollingError::InvalidSpan(format!(
            "{first_train_year}..={last_test_year} cannot hold {train_years} training and {test_years} test year(s)"
        )));
    }
    Ok(windows)
}

/// Everything a walk-forward run needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub nsga: Nsga2Params,
    pub backtest: BacktestConfig,
    pub indicators: IndicatorParams,
    /// Calendar days of prior history used to warm up indicators.
    pub lead_in_days: u64,
    pub execution: Execution,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            nsga: Nsga2Params::default(),
            backtest: BacktestConfig::default(),
            indicators: IndicatorParams::default(),
            lead_in_days: 60,
            execution: Execution::default(),
        }
    }
}

/// Bars and signals of one scored period. Signals were computed with lead-in
/// history but cover exactly the scored bars.
#[derive(Debug, Clone)]
pub struct Period {
    pub series: OhlcSeries,
    pub signals: SignalMatrix,
}

impl Period {
    /// Builds the period for years `[start_year, end_year]`, warming indicators
    /// with up to `lead_in_days` of earlier bars. Never reads bars after the period.
    pub fn build(
        series: &OhlcSeries,
        start_year: i32,
        end_year: i32,
        indicators: &IndicatorParams,
        lead_in_days: u64,
    ) -> Result<Self> {
        let range = series.year_range(start_year, end_year);
        if range.len() < 2 {
            return Err(BacktestError::TooFewBars(range.len()).into());
        }
        let scored = series.slice(range.clone())?;
        let first = scored.bars()[0].date;
        let lead_start = first
            .checked_sub_days(Days::new(lead_in_days))
            .map_or(0, |d| series.index_on_or_after(d));
        let history = series.slice(lead_start..range.end)?;
        let matrix = build_signal_matrix_with(&history, indicators)?;
        let signals = matrix.slice(range.start - lead_start..history.len());
        Ok(Self {
            series: scored,
            signals,
        })
    }

    pub fn evaluate(&self, g: &Genome, config: &BacktestConfig) -> FitnessReport {
        evaluate_strategy(g, &self.series, &self.signals, config)
            .expect("period series and signals are aligned and long enough")
    }
}

/// One member of a window's front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub genome: Genome,
    pub buy_rule: String,
    pub sell_rule: String,
    pub in_sample: FitnessReport,
    pub out_sample: FitnessReport,
}

impl StrategyRecord {
    pub fn new(genome: Genome, in_sample: FitnessReport, out_sample: FitnessReport) -> Self {
        let (buy_rule, sell_rule) = render_rules(&genome);
        Self {
            genome,
            buy_rule,
            sell_rule,
            in_sample,
            out_sample,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub spec: WindowSpec,
    pub strategies: Vec<StrategyRecord>,
    /// Per-generation statistics; not serialized.
    pub history: Vec<GenerationStats>,
}

impl Serialize for WindowReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("WindowReport", 3)?;
        s.serialize_field("train", &[self.spec.train_start_year, self.spec.train_end_year])?;
        if self.spec.test_start_year == self.spec.test_end_year {
            s.serialize_field("test", &self.spec.test_start_year)?;
        } else {
            s.serialize_field("test", &[self.spec.test_start_year, self.spec.test_end_year])?;
        }
        s.serialize_field("strategies", &self.strategies)?;
        s.end()
    }
}

/// Evolves on the training years of `spec` and scores the front on its test years.
/// Seeded from `config.nsga.seed`.
pub fn run_window(series: &OhlcSeries, spec: WindowSpec, config: &RollingConfig) -> Result<WindowReport> {
    let train = Period::build(
        series,
        spec.train_start_year,
        spec.train_end_year,
        &config.indicators,
        config.lead_in_days,
    )?;
    let test = Period::build(
        series,
        spec.test_start_year,
        spec.test_end_year,
        &config.indicators,
        config.lead_in_days,
    )?;
    let fitness = |g: &Genome| {
        let r = train.evaluate(g, &config.backtest);
        ObjectiveVector::new(r.sharpe, r.mdd)
    };
    let outcome = evolve(fitness, config.nsga, config.execution)?;
    let strategies = outcome
        .front
        .iter()
        .map(|ind| {
            StrategyRecord::new(
                ind.genome,
                train.evaluate(&ind.genome, &config.backtest),
                test.evaluate(&ind.genome, &config.backtest),
            )
        })
        .collect();
    Ok(WindowReport {
        spec,
        strategies,
        history: outcome.history,
    })
}

/// Seed used for window `index` of a run seeded with `master`.
pub fn window_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

/// Runs every window independently (window `i` seeded `seed + i`). The first failing
/// window aborts the run and is named in the error.
pub fn run_all(
    series: &OhlcSeries,
    windows: &[WindowSpec],
    config: &RollingConfig,
) -> Result<Vec<WindowReport>> {
    let jobs: Vec<(usize, WindowSpec)> = windows.iter().copied().enumerate().collect();
    let results = config.execution.map(&jobs, |&(i, spec)| {
        let mut cfg = config.clone();
        cfg.nsga.seed = window_seed(config.nsga.seed, i);
        run_window(series, spec, &cfg).map_err(|e| spec.wrap(e))
    });
    results.into_iter().collect()
}

/// One CSV row per strategy, laid out like a results table.
pub fn write_reports_csv<W: Write>(reports: &[WindowReport], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "in_sample_period",
        "out_sample_period",
        "s_no",
        "in_sample",
        "out_sample",
        "buy_strategy",
        "sell_strategy",
        "genome",
    ])?;
    for report in reports {
        let spec = report.spec;
        let train = format!("{}-{}", spec.train_start_year, spec.train_end_year);
        let test = if spec.test_start_year == spec.test_end_year {
            spec.test_start_year.to_string()
        } else {
            format!("{}-{}", spec.test_start_year, spec.test_end_year)
        };
        for (i, s) in report.strategies.iter().enumerate() {
            writer.write_record([
                train.clone(),
                test.clone(),
                (i + 1).to_string(),
                s.in_sample.bracketed(),
                s.out_sample.bracketed(),
                s.buy_rule.clone(),
                s.sell_rule.clone(),
                s.genome.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}
