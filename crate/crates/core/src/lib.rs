//! Evolution of technical-indicator trading rules under NSGA-II.
//!
//! Daily OHLC data is turned into nine indicator signal streams. A 52-bit genome
//! picks which signals (and which required values) form the buy and sell rules;
//! each genome is backtested with transaction costs and scored on Sharpe ratio and
//! signed maximum drawdown. NSGA-II evolves a Pareto front on each training
//! window, and every front member is re-scored on the following test year.
//!
//! Fitness evaluation and independent windows run on rayon when the `parallel`
//! feature is enabled (default); see [`execution::Execution`].

pub mod backtest;
pub mod cli;
pub mod error;
pub mod execution;
pub mod genome;
pub mod indicators;
pub mod market_data;
pub mod nsga2;
pub mod rolling;
pub mod synthetic;

pub use error::{Error, Result};
