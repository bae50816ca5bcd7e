//! Day-by-day recomputation of each indicator from its definition. Every value is
//! rebuilt from the raw window at that day; nothing is carried between days except
//! the EMA recurrence.

use evotrade::indicators::IndicatorKind;
use evotrade::market_data::OhlcSeries;

/// Oracle output for one indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub buy: Vec<bool>,
    pub sell: Vec<bool>,
    pub defined: Vec<bool>,
}

impl Expected {
    fn new(n: usize) -> Self {
        Self {
            buy: vec![false; n],
            sell: vec![false; n],
            defined: vec![false; n],
        }
    }

    fn set(&mut self, t: usize, buy: bool, sell: bool) {
        self.defined[t] = true;
        self.buy[t] = buy;
        self.sell[t] = sell;
    }
}

/// Arithmetic mean; a window of identical values averages to that value exactly.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.iter().all(|x| *x == xs[0]) {
        return xs[0];
    }
    let mut s = 0.0;
    for x in xs {
        s += x;
    }
    s / xs.len() as f64
}

pub fn ema(xs: &[f64], n: usize) -> Vec<f64> {
    let a = 2.0 / (n as f64 + 1.0);
    let mut out = vec![xs[0]];
    for t in 1..xs.len() {
        let prev = out[t - 1];
        out.push(prev + a * (xs[t] - prev));
    }
    out
}

fn window(xs: &[f64], t: usize, n: usize) -> &[f64] {
    &xs[t + 1 - n..=t]
}

fn up(a0: f64, b0: f64, a1: f64, b1: f64) -> bool {
    a0 < b0 && a1 > b1
}

fn down(a0: f64, b0: f64, a1: f64, b1: f64) -> bool {
    a0 > b0 && a1 < b1
}

pub fn sma_cross(s: &OhlcSeries) -> Expected {
    let c = s.closes();
    let mut e = Expected::new(c.len());
    let f = |t| mean(window(&c, t, 9));
    let sl = |t| mean(window(&c, t, 40));
    for t in 40..c.len() {
        e.set(t, up(f(t - 1), sl(t - 1), f(t), sl(t)), down(f(t - 1), sl(t - 1), f(t), sl(t)));
    }
    e
}

pub fn macd(s: &OhlcSeries) -> Expected {
    let c = s.closes();
    let (e12, e26) = (ema(&c, 12), ema(&c, 26));
    let line: Vec<f64> = (0..c.len()).map(|t| e12[t] - e26[t]).collect();
    let sig = ema(&line, 9);
    let mut e = Expected::new(c.len());
    for t in 1..c.len() {
        e.set(
            t,
            up(line[t - 1], sig[t - 1], line[t], sig[t]),
            down(line[t - 1], sig[t - 1], line[t], sig[t]),
        );
    }
    e
}

pub fn momentum(s: &OhlcSeries) -> Expected {
    let c = s.closes();
    let m = |t: usize| c[t] - c[t - 10];
    let mut e = Expected::new(c.len());
    for t in 11..c.len() {
        e.set(t, m(t - 1) < 0.0 && m(t) > 0.0, m(t - 1) > 0.0 && m(t) < 0.0);
    }
    e
}

pub fn price_osc(s: &OhlcSeries) -> Expected {
    let c = s.closes();
    let (e10, e20) = (ema(&c, 10), ema(&c, 20));
    let po = |t: usize| (e10[t] - e20[t]) / e20[t];
    let mut e = Expected::new(c.len());
    for t in 1..c.len() {
        e.set(t, po(t - 1) < 0.0 && po(t) > 0.0, po(t - 1) > 0.0 && po(t) < 0.0);
    }
    e
}

/// Highest high and lowest low of the 14 bars ending at `t`.
fn range14(s: &OhlcSeries, t: usize) -> (f64, f64) {
    let bars = &s.bars()[t - 13..=t];
    let mut h = f64::NEG_INFINITY;
    let mut l = f64::INFINITY;
    for b in bars {
        h = h.max(b.high);
        l = l.min(b.low);
    }
    (h, l)
}

fn raw_k(s: &OhlcSeries, t: usize) -> f64 {
    let (h, l) = range14(s, t);
    if h == l {
        50.0
    } else {
        100.0 * (s.bars()[t].close - l) / (h - l)
    }
}

fn degenerate(s: &OhlcSeries, t: usize) -> bool {
    let (h, l) = range14(s, t);
    h == l
}

pub fn stochastic(s: &OhlcSeries) -> Expected {
    let n = s.len();
    let d = |t: usize| mean(&[raw_k(s, t - 2), raw_k(s, t - 1), raw_k(s, t)]);
    let slow = |t: usize| mean(&[d(t - 2), d(t - 1), d(t)]);
    let mut e = Expected::new(n);
    for t in 18..n {
        if degenerate(s, t) {
            continue;
        }
        let (d0, s0, d1, s1) = (d(t - 1), slow(t - 1), d(t), slow(t));
        e.set(
            t,
            d1 < 20.0 && s1 < 20.0 && up(d0, s0, d1, s1),
            d1 > 80.0 && s1 > 80.0 && down(d0, s0, d1, s1),
        );
    }
    e
}

fn rsi_at(c: &[f64], t: usize) -> f64 {
    let mut gains = Vec::new();
    let mut losses = Vec::new();
    for j in t - 13..=t {
        let diff = c[j] - c[j - 1];
        gains.push(if diff > 0.0 { diff } else { 0.0 });
        losses.push(if diff < 0.0 { -diff } else { 0.0 });
    }
    let (g, l) = (mean(&gains), mean(&losses));
    if g == 0.0 && l == 0.0 {
        50.0
    } else if l == 0.0 {
        100.0
    } else if g == 0.0 {
        0.0
    } else {
        100.0 - 100.0 / (1.0 + g / l)
    }
}

pub fn rsi(s: &OhlcSeries) -> Expected {
    let c = s.closes();
    let mut e = Expected::new(c.len());
    for t in 15..c.len() {
        let (r0, r1) = (rsi_at(&c, t - 1), rsi_at(&c, t));
        e.set(t, r0 < 30.0 && r1 > 30.0, r0 > 70.0 && r1 < 70.0);
    }
    e
}

fn typical(s: &OhlcSeries, t: usize) -> f64 {
    let b = &s.bars()[t];
    (b.close + b.high + b.low) / 3.0
}

fn typical_mean(s: &OhlcSeries, t: usize) -> f64 {
    let tps: Vec<f64> = (t - 19..=t).map(|j| typical(s, j)).collect();
    mean(&tps)
}

fn cci_at(s: &OhlcSeries, t: usize) -> Option<f64> {
    let devs: Vec<f64> = (t - 19..=t)
        .map(|j| (typical_mean(s, j) - typical(s, j)).abs())
        .collect();
    let md = mean(&devs);
    (md != 0.0).then(|| (typical(s, t) - typical_mean(s, t)) / (0.015 * md))
}

pub fn cci(s: &OhlcSeries) -> Expected {
    let mut e = Expected::new(s.len());
    for t in 39..s.len() {
        if let (Some(c0), Some(c1)) = (cci_at(s, t - 1), cci_at(s, t)) {
            e.set(t, c0 < 100.0 && c1 > 100.0, c0 > -100.0 && c1 < -100.0);
        }
    }
    e
}

fn lw_at(s: &OhlcSeries, t: usize) -> f64 {
    let (h, l) = range14(s, t);
    if h == l {
        -50.0
    } else {
        100.0 * (s.bars()[t].close - h) / (h - l)
    }
}

pub fn williams(s: &OhlcSeries) -> Expected {
    let mut e = Expected::new(s.len());
    for t in 14..s.len() {
        if degenerate(s, t) {
            continue;
        }
        let (w0, w1) = (lw_at(s, t - 1), lw_at(s, t));
        e.set(t, w0 < -80.0 && w1 > -80.0, w0 > -20.0 && w1 < -20.0);
    }
    e
}

fn bands(c: &[f64], t: usize) -> (f64, f64) {
    let w = window(c, t, 20);
    let m = mean(w);
    let mut ss = 0.0;
    for x in w {
        ss += (x - m) * (x - m);
    }
    let sd = (ss / 20.0).sqrt();
    (m - 3.0 * sd, m + 3.0 * sd)
}

pub fn bollinger(s: &OhlcSeries) -> Expected {
    let c = s.closes();
    let mut e = Expected::new(c.len());
    for t in 20..c.len() {
        let ((lo0, hi0), (lo1, hi1)) = (bands(&c, t - 1), bands(&c, t));
        e.set(t, up(c[t - 1], lo0, c[t], lo1), down(c[t - 1], hi0, c[t], hi1));
    }
    e
}

pub fn expected(kind: IndicatorKind, s: &OhlcSeries) -> Expected {
    match kind {
        IndicatorKind::SmaCross => sma_cross(s),
        IndicatorKind::Macd => macd(s),
        IndicatorKind::Momentum => momentum(s),
        IndicatorKind::PriceOsc => price_osc(s),
        IndicatorKind::Stochastic => stochastic(s),
        IndicatorKind::Rsi => rsi(s),
        IndicatorKind::Cci => cci(s),
        IndicatorKind::Williams => williams(s),
        IndicatorKind::Bollinger => bollinger(s),
    }
}
