//! Deterministic synthetic index generator used for fixtures and smoke runs.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::market_data::{OhlcBar, OhlcSeries};

/// Regime-switching geometric random walk on weekdays of `[first_year, last_year]`.
///
/// Each calendar year draws a drift and volatility regime, so some years trend and
/// some chop. Prices are rounded to cents.
pub fn synthetic_index(seed: u64, first_year: i32, last_year: i32, start_price: f64) -> OhlcSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let round = |x: f64| (x * 100.0).round() / 100.0;

    let mut bars = Vec::new();
    let mut close = start_price;
    let mut year = first_year - 1;
    let (mut drift, mut vol) = (0.0, 0.01);
    let mut date = NaiveDate::from_ymd_opt(first_year, 1, 1).expect("valid year");
    let end = NaiveDate::from_ymd_opt(last_year, 12, 31).expect("valid year");
    while date <= end {
        if matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            date = date.succ_opt().expect("date in range");
            continue;
        }
        if date.year() != year {
            year = date.year();
            drift = rng.gen_range(-0.0012..0.0015);
            vol = rng.gen_range(0.006..0.022);
        }
        let gap = 0.25 * vol * unit.sample(&mut rng);
        let ret = drift + vol * unit.sample(&mut rng);
        let open = round(close * (1.0 + gap));
        let next_close = round(close * (1.0 + ret).max(0.5));
        let wick_hi = vol * unit.sample(&mut rng).abs() * 0.6;
        let wick_lo = vol * unit.sample(&mut rng).abs() * 0.6;
        let high = round(open.max(next_close) * (1.0 + wick_hi)).max(open.max(next_close));
        let low = round(open.min(next_close) * (1.0 - wick_lo)).min(open.min(next_close));
        bars.push(OhlcBar::new(date, open, high, low.max(0.01), next_close));
        close = next_close;
        date = date.succ_opt().expect("date in range");
    }
    OhlcSeries::from_bars(bars).expect("generator produces valid bars")
}

/// The bundled 2003-2015 fixture index.
pub fn fixture_index() -> OhlcSeries {
    synthetic_index(20_030_101, 2003, 2015, 5_000.0)
}
