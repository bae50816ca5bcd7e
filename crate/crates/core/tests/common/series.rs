use chrono::{Days, NaiveDate};
use evotrade::market_data::{OhlcBar, OhlcSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bars on consecutive calendar days from 2005-01-03. Open is the previous close;
/// high/low extend the body by `wick` (a fraction of the close).
pub fn from_closes(closes: &[f64], wick: f64) -> OhlcSeries {
    let start = NaiveDate::from_ymd_opt(2005, 1, 3).unwrap();
    let bars = closes
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let open = if i == 0 { c } else { closes[i - 1] };
            let high = open.max(c) * (1.0 + wick);
            let low = open.min(c) * (1.0 - wick);
            OhlcBar::new(start + Days::new(i as u64), open, high, low, c)
        })
        .collect();
    OhlcSeries::from_bars(bars).unwrap()
}

pub fn constant(n: usize, price: f64) -> Vec<f64> {
    vec![price; n]
}

pub fn monotone(n: usize, start: f64, step: f64) -> Vec<f64> {
    (0..n).map(|i| start + step * i as f64).collect()
}

/// `down` days falling by `step`, then `up` days rising by `step`.
pub fn v_shape(down: usize, up: usize, start: f64, step: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=down).map(|i| start - step * i as f64).collect();
    let bottom = *out.last().unwrap();
    out.extend((1..=up).map(|i| bottom + step * i as f64));
    out
}

pub fn inverted_v(up: usize, down: usize, start: f64, step: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=up).map(|i| start + step * i as f64).collect();
    let top = *out.last().unwrap();
    out.extend((1..=down).map(|i| top - step * i as f64));
    out
}

/// Random walk with per-day returns uniform in `[-vol, vol]`, rounded to cents.
pub fn random_walk(seed: u64, n: usize, start: f64, vol: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = start;
    (0..n)
        .map(|_| {
            c *= 1.0 + rng.gen_range(-vol..vol);
            (c * 100.0).round() / 100.0
        })
        .collect()
}

pub fn sine(n: usize, period: f64, mid: f64, amp: f64) -> Vec<f64> {
    (0..n)
        .map(|i| mid + amp * (2.0 * std::f64::consts::PI * i as f64 / period).sin())
        .collect()
}

/// The five shapes used by the oracle suite: name and series.
pub fn oracle_suite() -> Vec<(&'static str, OhlcSeries)> {
    vec![
        ("constant", from_closes(&constant(120, 100.37), 0.0)),
        ("monotone", from_closes(&monotone(120, 100.0, 0.5), 0.004)),
        ("v", from_closes(&v_shape(60, 60, 200.0, 1.5), 0.006)),
        ("inverted_v", from_closes(&inverted_v(60, 60, 100.0, 1.5), 0.006)),
        ("random_200", from_closes(&random_walk(7, 200, 1000.0, 0.03), 0.01)),
    ]
}
