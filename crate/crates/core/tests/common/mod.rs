//! Brute-force reference implementations and series builders shared by the
//! integration tests. Nothing here calls into the library's computation code.
#![allow(dead_code)]

pub mod ledger;
pub mod nds;
pub mod rules;
pub mod series;
pub mod signals;

use std::path::PathBuf;

use evotrade::market_data::{load_ohlc, OhlcSeries};

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/fixture_index.csv")
}

pub fn fixture() -> OhlcSeries {
    load_ohlc(fixture_path()).expect("bundled fixture loads").series
}

/// `|a - b| <= tol * max(|a|, |b|)`, with exact equality always accepted.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
