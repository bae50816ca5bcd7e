//! The nine technical indicators and their daily buy/sell crossing signals.
//!
//! Every rule uses strict inequalities and compares day `t` with day `t - 1`.
//! A signal at `t` needs every quantity at `t` and `t - 1` to be defined; cells
//! during warm-up (or on degenerate days) are masked and never fire.

use std::io::Write;
use std::ops::Range;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::IndicatorError;
use crate::market_data::OhlcSeries;

/// Minimum bar count accepted by [`build_signal_matrix`].
pub const MIN_SERIES_LEN: usize = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndicatorKind {
    SmaCross,
    Macd,
    Momentum,
    PriceOsc,
    Stochastic,
    Rsi,
    Cci,
    Williams,
    Bollinger,
}

/// Momentum group vs reversal group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorGroup {
    Momentum,
    Reversal,
}

impl IndicatorKind {
    /// Canonical order; also the genome bit order.
    pub const ALL: [IndicatorKind; 9] = [
        IndicatorKind::SmaCross,
        IndicatorKind::Macd,
        IndicatorKind::Momentum,
        IndicatorKind::PriceOsc,
        IndicatorKind::Stochastic,
        IndicatorKind::Rsi,
        IndicatorKind::Cci,
        IndicatorKind::Williams,
        IndicatorKind::Bollinger,
    ];

    pub const COUNT: usize = 9;

    /// Number of leading kinds that belong to the momentum group.
    pub const MOMENTUM_COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn group(self) -> IndicatorGroup {
        if self.index() < Self::MOMENTUM_COUNT {
            IndicatorGroup::Momentum
        } else {
            IndicatorGroup::Reversal
        }
    }

    /// Name used in rendered rules and CSV headers.
    pub fn short_name(self) -> &'static str {
        match self {
            IndicatorKind::SmaCross => "SMA",
            IndicatorKind::Macd => "MACD",
            IndicatorKind::Momentum => "MO",
            IndicatorKind::PriceOsc => "PO",
            IndicatorKind::Stochastic => "sto",
            IndicatorKind::Rsi => "RSI",
            IndicatorKind::Cci => "CCI",
            IndicatorKind::Williams => "LW",
            IndicatorKind::Bollinger => "BB",
        }
    }
}

/// Indicator constants. Defaults are the standard rule set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorParams {
    pub sma_fast: usize,
    pub sma_slow: usize,
    pub macd_fast: usize,
    pub macd_slow: usize,
    pub macd_signal: usize,
    pub momentum_lag: usize,
    pub po_fast: usize,
    pub po_slow: usize,
    pub stoch_window: usize,
    pub stoch_smooth: usize,
    pub stoch_oversold: f64,
    pub stoch_overbought: f64,
    pub rsi_window: usize,
    pub rsi_oversold: f64,
    pub rsi_overbought: f64,
    pub cci_window: usize,
    pub cci_constant: f64,
    pub cci_threshold: f64,
    pub williams_window: usize,
    pub williams_oversold: f64,
    pub williams_overbought: f64,
    pub bollinger_window: usize,
    pub bollinger_width: f64,
}

impl Default for IndicatorParams {
    fn default() -> Self {
        Self {
            sma_fast: 9,
            sma_slow: 40,
            macd_fast: 12,
            macd_slow: 26,
            macd_signal: 9,
            momentum_lag: 10,
            po_fast: 10,
            po_slow: 20,
            stoch_window: 14,
            stoch_smooth: 3,
            stoch_oversold: 20.0,
            stoch_overbought: 80.0,
            rsi_window: 14,
            rsi_oversold: 30.0,
            rsi_overbought: 70.0,
            cci_window: 20,
            cci_constant: 0.015,
            cci_threshold: 100.0,
            williams_window: 14,
            williams_oversold: -80.0,
            williams_overbought: -20.0,
            bollinger_window: 20,
            bollinger_width: 3.0,
        }
    }
}

/// Per-day buy/sell booleans for one indicator, with the warm-up mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalPair {
    pub buy: Vec<bool>,
    pub sell: Vec<bool>,
    pub defined: Vec<bool>,
}

impl SignalPair {
    fn masked(len: usize) -> Self {
        Self {
            buy: vec![false; len],
            sell: vec![false; len],
            defined: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.buy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buy.is_empty()
    }

    pub fn buy_days(&self) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.buy[t]).collect()
    }

    pub fn sell_days(&self) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.sell[t]).collect()
    }

    fn mask_days(&mut self, days: impl IntoIterator<Item = usize>) {
        for t in days {
            self.buy[t] = false;
            self.sell[t] = false;
            self.defined[t] = false;
        }
    }
}

/// Simple moving average of the last `n` values, inclusive of today.
pub fn sma(closes: &[f64], n: usize) -> Vec<Option<f64>> {
    let values: Vec<Option<f64>> = closes.iter().copied().map(Some).collect();
    sma_of(&values, n)
}

/// SMA over a partially defined series; defined only where the whole window is.
/// A window of identical values averages to exactly that value.
fn sma_of(values: &[Option<f64>], n: usize) -> Vec<Option<f64>> {
    assert!(n >= 1, "window length must be at least 1");
    (0..values.len())
        .map(|t| {
            if t + 1 < n {
                return None;
            }
            let window = &values[t + 1 - n..=t];
            let first = window[0]?;
            let mut sum = 0.0;
            let mut flat = true;
            for v in window {
                let v = (*v)?;
                flat &= v == first;
                sum += v;
            }
            // exact on flat windows; sum / n can be off by an ulp
            Some(if flat { first } else { sum / n as f64 })
        })
        .collect()
}

/// Exponential moving average with smoothing `2 / (n + 1)`, seeded at the first close.
pub fn ema(closes: &[f64], n: usize) -> Vec<f64> {
    assert!(n >= 1, "span must be at least 1");
    let alpha = 2.0 / (n as f64 + 1.0);
    let mut out = Vec::with_capacity(closes.len());
    let mut prev = match closes.first() {
        Some(&c) => c,
        None => return out,
    };
    out.push(prev);
    for &c in &closes[1..] {
        // algebraically alpha*c + (1-alpha)*prev; exact fixed point on flat input
        prev += alpha * (c - prev);
        out.push(prev);
    }
    out
}

fn rolling_extreme(values: &[f64], n: usize, pick: fn(f64, f64) -> f64) -> Vec<Option<f64>> {
    (0..values.len())
        .map(|t| {
            (t + 1 >= n).then(|| {
                values[t + 1 - n..=t]
                    .iter()
                    .copied()
                    .reduce(pick)
                    .expect("non-empty window")
            })
        })
        .collect()
}

/// Up/down crossings of `a` against `b` between `t - 1` and `t`.
fn crossings(a: &[Option<f64>], b: &[Option<f64>]) -> SignalPair {
    let len = a.len();
    let mut out = SignalPair::masked(len);
    for t in 1..len {
        if let (Some(a0), Some(b0), Some(a1), Some(b1)) = (a[t - 1], b[t - 1], a[t], b[t]) {
            out.defined[t] = true;
            out.buy[t] = a0 < b0 && a1 > b1;
            out.sell[t] = a0 > b0 && a1 < b1;
        }
    }
    out
}

fn constant(len: usize, value: f64) -> Vec<Option<f64>> {
    vec![Some(value); len]
}

fn all_defined(values: Vec<f64>) -> Vec<Option<f64>> {
    values.into_iter().map(Some).collect()
}

/// SMA fast/slow crossover.
pub fn sma_cross_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let closes = series.closes();
    crossings(&sma(&closes, p.sma_fast), &sma(&closes, p.sma_slow))
}

/// MACD line minus EMA-smoothed signal line (both seeded at day 0).
pub fn macd_lines(closes: &[f64], p: &IndicatorParams) -> (Vec<f64>, Vec<f64>) {
    let fast = ema(closes, p.macd_fast);
    let slow = ema(closes, p.macd_slow);
    let macd: Vec<f64> = fast.iter().zip(&slow).map(|(f, s)| f - s).collect();
    let signal = ema(&macd, p.macd_signal);
    (macd, signal)
}

pub fn macd_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let (macd, signal) = macd_lines(&series.closes(), p);
    crossings(&all_defined(macd), &all_defined(signal))
}

/// `C(t) - C(t - lag)` zero crossings.
pub fn momentum_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let closes = series.closes();
    let lag = p.momentum_lag;
    let mom: Vec<Option<f64>> = (0..closes.len())
        .map(|t| (t >= lag).then(|| closes[t] - closes[t - lag]))
        .collect();
    crossings(&mom, &constant(closes.len(), 0.0))
}

/// Relative EMA spread zero crossings.
pub fn price_osc_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let closes = series.closes();
    let fast = ema(&closes, p.po_fast);
    let slow = ema(&closes, p.po_slow);
    let po: Vec<Option<f64>> = fast
        .iter()
        .zip(&slow)
        .map(|(f, s)| Some((f - s) / s))
        .collect();
    crossings(&po, &constant(closes.len(), 0.0))
}

/// `(close, high, low)` for one day.
type RangeRow = (f64, f64, f64);

/// Stochastic `K`, `D`, `D_slow` and the degenerate-day flags.
pub type StochasticLines = (Vec<Option<f64>>, Vec<Option<f64>>, Vec<Option<f64>>, Vec<bool>);

/// `(C - L) / (H - L)` ranges over the trailing window; `None` during warm-up.
/// Flags a day as degenerate when the window range is zero.
fn range_position(series: &OhlcSeries, window: usize) -> (Vec<Option<RangeRow>>, Vec<bool>) {
    let highs = rolling_extreme(&series.highs(), window, f64::max);
    let lows = rolling_extreme(&series.lows(), window, f64::min);
    let closes = series.closes();
    let mut degenerate = vec![false; closes.len()];
    let rows = (0..closes.len())
        .map(|t| {
            let (h, l) = (highs[t]?, lows[t]?);
            degenerate[t] = h == l;
            Some((closes[t], h, l))
        })
        .collect();
    (rows, degenerate)
}

/// Stochastic %K, its 3-day SMA `D` and the slow line `D_slow`.
pub fn stochastic_lines(
    series: &OhlcSeries,
    p: &IndicatorParams,
) -> StochasticLines {
    let (rows, degenerate) = range_position(series, p.stoch_window);
    let k: Vec<Option<f64>> = rows
        .iter()
        .zip(&degenerate)
        .map(|(row, &deg)| row.map(|(c, h, l)| if deg { 50.0 } else { 100.0 * (c - l) / (h - l) }))
        .collect();
    let d = sma_of(&k, p.stoch_smooth);
    let d_slow = sma_of(&d, p.stoch_smooth);
    (k, d, d_slow, degenerate)
}

pub fn stochastic_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let (_, d, d_slow, degenerate) = stochastic_lines(series, p);
    let mut out = crossings(&d, &d_slow);
    for t in 0..out.len() {
        if !out.defined[t] {
            continue;
        }
        let (dt, st) = (d[t].unwrap(), d_slow[t].unwrap());
        out.buy[t] &= dt < p.stoch_oversold && st < p.stoch_oversold;
        out.sell[t] &= dt > p.stoch_overbought && st > p.stoch_overbought;
    }
    out.mask_days((0..out.len()).filter(|&t| degenerate[t]));
    out
}

/// RSI from simple-averaged gains and losses. Zero loss gives 100, zero gain gives 0,
/// and a flat window (both zero) gives 50.
pub fn rsi(closes: &[f64], window: usize) -> Vec<Option<f64>> {
    let len = closes.len();
    let mut gains = vec![None; len];
    let mut losses = vec![None; len];
    for t in 1..len {
        gains[t] = Some((closes[t] - closes[t - 1]).max(0.0));
        losses[t] = Some((closes[t - 1] - closes[t]).max(0.0));
    }
    let avg_gain = sma_of(&gains, window);
    let avg_loss = sma_of(&losses, window);
    avg_gain
        .iter()
        .zip(&avg_loss)
        .map(|(g, l)| {
            let (g, l) = ((*g)?, (*l)?);
            Some(match (g == 0.0, l == 0.0) {
                (true, true) => 50.0,
                (false, true) => 100.0,
                (true, false) => 0.0,
                (false, false) => 100.0 - 100.0 / (1.0 + g / l),
            })
        })
        .collect()
}

pub fn rsi_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let closes = series.closes();
    let rsi = rsi(&closes, p.rsi_window);
    let len = closes.len();
    let up = crossings(&rsi, &constant(len, p.rsi_oversold));
    let down = crossings(&rsi, &constant(len, p.rsi_overbought));
    SignalPair {
        buy: up.buy,
        sell: down.sell,
        defined: up.defined,
    }
}

/// Commodity Channel Index; `None` during warm-up or when the mean deviation is zero.
pub fn cci(series: &OhlcSeries, p: &IndicatorParams) -> Vec<Option<f64>> {
    let typical: Vec<Option<f64>> = series
        .bars()
        .iter()
        .map(|b| Some((b.close + b.high + b.low) / 3.0))
        .collect();
    let tp_sma = sma_of(&typical, p.cci_window);
    let deviation: Vec<Option<f64>> = typical
        .iter()
        .zip(&tp_sma)
        .map(|(tp, avg)| Some(((*avg)? - (*tp)?).abs()))
        .collect();
    let mean_dev = sma_of(&deviation, p.cci_window);
    (0..typical.len())
        .map(|t| {
            let md = mean_dev[t]?;
            if md == 0.0 {
                return None;
            }
            Some((typical[t]? - tp_sma[t]?) / (p.cci_constant * md))
        })
        .collect()
}

pub fn cci_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let cci = cci(series, p);
    let len = cci.len();
    let up = crossings(&cci, &constant(len, p.cci_threshold));
    let down = crossings(&cci, &constant(len, -p.cci_threshold));
    SignalPair {
        buy: up.buy,
        sell: down.sell,
        defined: up.defined,
    }
}

/// Williams %R in `[-100, 0]`; `-50` on degenerate (flat-range) days.
pub fn williams(series: &OhlcSeries, p: &IndicatorParams) -> (Vec<Option<f64>>, Vec<bool>) {
    let (rows, degenerate) = range_position(series, p.williams_window);
    let lw = rows
        .iter()
        .zip(&degenerate)
        .map(|(row, &deg)| row.map(|(c, h, l)| if deg { -50.0 } else { 100.0 * (c - h) / (h - l) }))
        .collect();
    (lw, degenerate)
}

pub fn williams_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let (lw, degenerate) = williams(series, p);
    let len = lw.len();
    let up = crossings(&lw, &constant(len, p.williams_oversold));
    let down = crossings(&lw, &constant(len, p.williams_overbought));
    let mut out = SignalPair {
        buy: up.buy,
        sell: down.sell,
        defined: up.defined,
    };
    out.mask_days((0..len).filter(|&t| degenerate[t]));
    out
}

/// Lower and upper bands: SMA ± width × population standard deviation.
pub fn bollinger_bands(closes: &[f64], p: &IndicatorParams) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let n = p.bollinger_window;
    let mid = sma(closes, n);
    let mut lower = vec![None; closes.len()];
    let mut upper = vec![None; closes.len()];
    for t in 0..closes.len() {
        let Some(m) = mid[t] else { continue };
        let var = closes[t + 1 - n..=t]
            .iter()
            .map(|c| (c - m) * (c - m))
            .sum::<f64>()
            / n as f64;
        let sd = var.sqrt();
        lower[t] = Some(m - p.bollinger_width * sd);
        upper[t] = Some(m + p.bollinger_width * sd);
    }
    (lower, upper)
}

pub fn bollinger_signals(series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    let closes = series.closes();
    let (lower, upper) = bollinger_bands(&closes, p);
    let close = all_defined(closes);
    let up = crossings(&close, &lower);
    let down = crossings(&close, &upper);
    SignalPair {
        buy: up.buy,
        sell: down.sell,
        defined: up.defined,
    }
}

/// Dispatches to the per-indicator signal function.
pub fn signals_for(kind: IndicatorKind, series: &OhlcSeries, p: &IndicatorParams) -> SignalPair {
    match kind {
        IndicatorKind::SmaCross => sma_cross_signals(series, p),
        IndicatorKind::Macd => macd_signals(series, p),
        IndicatorKind::Momentum => momentum_signals(series, p),
        IndicatorKind::PriceOsc => price_osc_signals(series, p),
        IndicatorKind::Stochastic => stochastic_signals(series, p),
        IndicatorKind::Rsi => rsi_signals(series, p),
        IndicatorKind::Cci => cci_signals(series, p),
        IndicatorKind::Williams => williams_signals(series, p),
        IndicatorKind::Bollinger => bollinger_signals(series, p),
    }
}

/// All nine signal pairs, one bitmask per day (bit `k` = [`IndicatorKind::index`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalMatrix {
    dates: Vec<NaiveDate>,
    buy: Vec<u16>,
    sell: Vec<u16>,
    defined: Vec<u16>,
}

impl SignalMatrix {
    /// Builds a matrix from raw per-day masks. Buy/sell bits outside `defined` are cleared.
    ///
    /// Panics if the mask vectors differ in length or a day has both buy and sell set
    /// for the same indicator.
    pub fn from_masks(buy: Vec<u16>, sell: Vec<u16>, defined: Vec<u16>) -> Self {
        assert!(buy.len() == sell.len() && sell.len() == defined.len());
        let all = (1u16 << IndicatorKind::COUNT) - 1;
        let mut m = Self {
            dates: Vec::new(),
            buy,
            sell,
            defined,
        };
        for t in 0..m.buy.len() {
            m.defined[t] &= all;
            m.buy[t] &= m.defined[t];
            m.sell[t] &= m.defined[t];
            assert_eq!(m.buy[t] & m.sell[t], 0, "buy and sell both set on day {t}");
        }
        m
    }

    fn from_pairs(dates: Vec<NaiveDate>, pairs: &[SignalPair]) -> Self {
        let len = dates.len();
        let mut buy = vec![0u16; len];
        let mut sell = vec![0u16; len];
        let mut defined = vec![0u16; len];
        for (k, pair) in pairs.iter().enumerate() {
            debug_assert_eq!(pair.len(), len);
            for t in 0..len {
                debug_assert!(pair.defined[t] || !(pair.buy[t] || pair.sell[t]));
                debug_assert!(!(pair.buy[t] && pair.sell[t]));
                buy[t] |= (pair.buy[t] as u16) << k;
                sell[t] |= (pair.sell[t] as u16) << k;
                defined[t] |= (pair.defined[t] as u16) << k;
            }
        }
        Self {
            dates,
            buy,
            sell,
            defined,
        }
    }

    pub fn len(&self) -> usize {
        self.buy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buy.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn buy_bits(&self, t: usize) -> u16 {
        self.buy[t]
    }

    pub fn sell_bits(&self, t: usize) -> u16 {
        self.sell[t]
    }

    pub fn defined_bits(&self, t: usize) -> u16 {
        self.defined[t]
    }

    pub fn buy(&self, t: usize, kind: IndicatorKind) -> bool {
        self.buy[t] >> kind.index() & 1 == 1
    }

    pub fn sell(&self, t: usize, kind: IndicatorKind) -> bool {
        self.sell[t] >> kind.index() & 1 == 1
    }

    pub fn defined(&self, t: usize, kind: IndicatorKind) -> bool {
        self.defined[t] >> kind.index() & 1 == 1
    }

    pub fn column(&self, kind: IndicatorKind) -> SignalPair {
        let len = self.len();
        SignalPair {
            buy: (0..len).map(|t| self.buy(t, kind)).collect(),
            sell: (0..len).map(|t| self.sell(t, kind)).collect(),
            defined: (0..len).map(|t| self.defined(t, kind)).collect(),
        }
    }

    /// Rows in `range`, e.g. to drop warm-up lead-in days.
    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            dates: self.dates.get(range.clone()).map(<[_]>::to_vec).unwrap_or_default(),
            buy: self.buy[range.clone()].to_vec(),
            sell: self.sell[range.clone()].to_vec(),
            defined: self.defined[range].to_vec(),
        }
    }

    /// CSV with a `Date` column then `<NAME>_buy,<NAME>_sell` per indicator, as 0/1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["Date".to_string()];
        for kind in IndicatorKind::ALL {
            header.push(format!("{}_buy", kind.short_name()));
            header.push(format!("{}_sell", kind.short_name()));
        }
        writer.write_record(&header)?;
        for t in 0..self.len() {
            let mut row = Vec::with_capacity(header.len());
            row.push(match self.dates.get(t) {
                Some(d) => d.format("%Y-%m-%d").to_string(),
                None => t.to_string(),
            });
            for kind in IndicatorKind::ALL {
                row.push((self.buy(t, kind) as u8).to_string());
                row.push((self.sell(t, kind) as u8).to_string());
            }
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn build_signal_matrix(series: &OhlcSeries) -> Result<SignalMatrix, IndicatorError> {
    build_signal_matrix_with(series, &IndicatorParams::default())
}

pub fn build_signal_matrix_with(
    series: &OhlcSeries,
    p: &IndicatorParams,
) -> Result<SignalMatrix, IndicatorError> {
    if series.len() < MIN_SERIES_LEN {
        return Err(IndicatorError::SeriesTooShort {
            len: series.len(),
            required: MIN_SERIES_LEN,
        });
    }
    let pairs: Vec<SignalPair> = IndicatorKind::ALL
        .iter()
        .map(|&k| signals_for(k, series, p))
        .collect();
    Ok(SignalMatrix::from_pairs(series.dates(), &pairs))
}
