//! Positions, cost-adjusted returns, and the (Sharpe, max drawdown) objective pair.

use serde::{Deserialize, Serialize};

use crate::error::BacktestError;
use crate::genome::{FinalSignal, Genome};
use crate::indicators::SignalMatrix;
use crate::market_data::OhlcSeries;

pub const TRADING_DAYS: f64 = 252.0;
/// Annualization factor for daily volatility (approximately `sqrt(252)`).
pub const VOL_SCALE: f64 = 16.0;

/// What a flat final signal means for the next day's position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NeutralMode {
    /// Close the position.
    #[default]
    Flat,
    /// Keep yesterday's position.
    Hold,
}

/// Which return series feeds the volatility estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VolSource {
    #[default]
    NetPortfolio,
    Asset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    /// Cost per unit of turnover, e.g. `0.02`.
    pub cost_rate: f64,
    pub neutral: NeutralMode,
    pub vol_source: VolSource,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            cost_rate: 0.02,
            neutral: NeutralMode::Flat,
            vol_source: VolSource::NetPortfolio,
        }
    }
}

impl BacktestConfig {
    pub fn with_cost(cost_rate: f64) -> Self {
        Self {
            cost_rate,
            ..Self::default()
        }
    }
}

/// Daily unit positions in `{-1, 0, +1}`; day `t` acts on the signal of day `t - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSeries(pub Vec<i8>);

impl PositionSeries {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

pub fn positions_from_signals(signals: &[FinalSignal]) -> PositionSeries {
    positions_with_mode(signals, NeutralMode::Flat)
}

pub fn positions_with_mode(signals: &[FinalSignal], mode: NeutralMode) -> PositionSeries {
    let mut w = Vec::with_capacity(signals.len());
    if signals.is_empty() {
        return PositionSeries(w);
    }
    w.push(0i8);
    for t in 1..signals.len() {
        let s = signals[t - 1].value();
        let prev = w[t - 1];
        w.push(match (mode, s) {
            (NeutralMode::Hold, 0) => prev,
            _ => s,
        });
    }
    PositionSeries(w)
}

/// Per-day return components. Index 0 is the first bar, which has no prior close:
/// its return, turnover and cost are zero. Metrics use days `1..`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnLedger {
    pub asset: Vec<f64>,
    pub gross: Vec<f64>,
    pub turnover: Vec<f64>,
    pub net: Vec<f64>,
    pub cost_rate: f64,
}

impl ReturnLedger {
    /// Net returns over the scored days.
    pub fn net_returns(&self) -> &[f64] {
        &self.net[1..]
    }

    pub fn asset_returns(&self) -> &[f64] {
        &self.asset[1..]
    }

    pub fn total_turnover(&self) -> f64 {
        self.turnover.iter().sum()
    }
}

/// `|w[t] - w[t-1] * (1 + r[t-1]) / (1 + r_gross[t-1])|` with `tau[0] = |w[0]|`.
pub fn turnover(w: &[i8], asset: &[f64], gross: &[f64]) -> Vec<f64> {
    (0..w.len())
        .map(|t| {
            if t == 0 {
                return f64::from(w[0]).abs();
            }
            let denom = 1.0 + gross[t - 1];
            let drift = if denom == 0.0 {
                1.0
            } else {
                (1.0 + asset[t - 1]) / denom
            };
            (f64::from(w[t]) - f64::from(w[t - 1]) * drift).abs()
        })
        .collect()
}

pub fn net_returns(
    series: &OhlcSeries,
    w: &PositionSeries,
    cost_rate: f64,
) -> Result<ReturnLedger, BacktestError> {
    ledger_from_closes(&series.closes(), w.as_slice(), cost_rate)
}

pub fn ledger_from_closes(
    closes: &[f64],
    w: &[i8],
    cost_rate: f64,
) -> Result<ReturnLedger, BacktestError> {
    if closes.len() < 2 {
        return Err(BacktestError::TooFewBars(closes.len()));
    }
    if w.len() != closes.len() {
        return Err(BacktestError::LengthMismatch {
            what: "positions",
            got: w.len(),
            expected: closes.len(),
        });
    }
    if !(cost_rate >= 0.0 && cost_rate.is_finite()) {
        return Err(BacktestError::InvalidCost(cost_rate));
    }
    let n = closes.len();
    let mut asset = vec![0.0; n];
    for t in 1..n {
        let prev = closes[t - 1];
        if prev == 0.0 {
            return Err(BacktestError::DegeneratePrice { day: t - 1, price: prev });
        }
        asset[t] = (closes[t] - prev) / prev;
    }
    let gross: Vec<f64> = w.iter().zip(&asset).map(|(&p, r)| f64::from(p) * r).collect();
    let tau = turnover(w, &asset, &gross);
    let net = gross.iter().zip(&tau).map(|(g, t)| g - t * cost_rate).collect();
    Ok(ReturnLedger {
        asset,
        gross,
        turnover: tau,
        net,
        cost_rate,
    })
}

/// `(prod(1 + r))^(252 / N) - 1`; `-1` once any day loses everything.
pub fn annualized_return(returns: &[f64]) -> f64 {
    if returns.is_empty() {
        return 0.0;
    }
    if returns.iter().any(|r| 1.0 + r <= 0.0) {
        return -1.0;
    }
    let growth: f64 = returns.iter().map(|r| 1.0 + r).product();
    growth.powf(TRADING_DAYS / returns.len() as f64) - 1.0
}

/// Population standard deviation scaled by 16. Exactly 0 for a constant series.
pub fn annualized_vol(returns: &[f64]) -> f64 {
    if returns.is_empty() {
        return 0.0;
    }
    if returns.iter().all(|r| *r == returns[0]) {
        return 0.0;
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    VOL_SCALE * var.sqrt()
}

fn ratio(ret: f64, vol: f64) -> f64 {
    if vol > 0.0 {
        let s = ret / vol;
        if s.is_finite() {
            s
        } else {
            0.0
        }
    } else {
        0.0
    }
}

/// Annualized return over annualized volatility, 0 when volatility is 0.
pub fn sharpe(returns: &[f64]) -> f64 {
    ratio(annualized_return(returns), annualized_vol(returns))
}

/// Most negative `(WI - peak) / peak` of the wealth index (base 1), in `[-1, 0]`.
pub fn max_drawdown(returns: &[f64]) -> f64 {
    let mut wealth = 1.0f64;
    let mut peak = 1.0f64;
    let mut worst = 0.0f64;
    for r in returns {
        if 1.0 + r <= 0.0 {
            return -1.0;
        }
        wealth *= 1.0 + r;
        peak = peak.max(wealth);
        worst = worst.min((wealth - peak) / peak);
    }
    worst.max(-1.0)
}

/// Objective pair plus diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub sharpe: f64,
    pub mdd: f64,
    pub ann_return: f64,
    pub ann_vol: f64,
    pub turnover: f64,
}

impl FitnessReport {
    pub fn inert() -> Self {
        Self {
            sharpe: 0.0,
            mdd: 0.0,
            ann_return: 0.0,
            ann_vol: 0.0,
            turnover: 0.0,
        }
    }

    pub fn from_ledger(ledger: &ReturnLedger, vol_source: VolSource) -> Self {
        let net = ledger.net_returns();
        let ann_return = annualized_return(net);
        let ann_vol = match vol_source {
            VolSource::NetPortfolio => annualized_vol(net),
            VolSource::Asset => annualized_vol(ledger.asset_returns()),
        };
        Self {
            sharpe: ratio(ann_return, ann_vol),
            mdd: max_drawdown(net),
            ann_return,
            ann_vol,
            turnover: ledger.total_turnover(),
        }
    }

    /// `[sharpe, mdd]` with three decimals.
    pub fn bracketed(&self) -> String {
        format!("[{:.3}, {:.3}]", self.sharpe, self.mdd)
    }
}

/// Backtests a genome over a price series and its aligned signal matrix.
pub fn evaluate_strategy(
    g: &Genome,
    series: &OhlcSeries,
    signals: &SignalMatrix,
    config: &BacktestConfig,
) -> Result<FitnessReport, BacktestError> {
    if signals.len() != series.len() {
        return Err(BacktestError::LengthMismatch {
            what: "signal matrix",
            got: signals.len(),
            expected: series.len(),
        });
    }
    let w = positions_with_mode(&g.signal_series(signals), config.neutral);
    let ledger = net_returns(series, &w, config.cost_rate)?;
    Ok(FitnessReport::from_ledger(&ledger, config.vol_source))
}
