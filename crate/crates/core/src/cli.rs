//! Command-line interface: `signals`, `backtest`, `roll` and `render`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::backtest::{evaluate_strategy, BacktestConfig, NeutralMode, VolSource};
use crate::error::{Error, Result};
use crate::execution::Execution;
use crate::genome::{render_rules, Genome};
use crate::indicators::{build_signal_matrix, build_signal_matrix_with, IndicatorParams};
use crate::market_data::{load_ohlc, slice_by_years, OhlcSeries};
use crate::nsga2::Nsga2Params;
use crate::rolling::{make_windows, run_all, write_reports_csv, RollingConfig, WindowReport};

#[derive(Debug, Parser)]
#[command(name = "evotrade", version, about = "Evolve indicator trading rules with NSGA-II")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the per-day indicator signal matrix as CSV.
    Signals(SignalsArgs),
    /// Backtest one genome and print its fitness report.
    Backtest(BacktestArgs),
    /// Run the walk-forward experiment and write window reports.
    Roll(RollArgs),
    /// Print the buy and sell rules encoded by a genome.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Daily OHLC CSV (Date,Open,High,Low,Close[,...]).
    #[arg(long)]
    pub data: PathBuf,
    /// First calendar year to use.
    #[arg(long = "start-year")]
    pub start_year: Option<i32>,
    /// Last calendar year to use.
    #[arg(long = "end-year")]
    pub end_year: Option<i32>,
}

#[derive(Debug, Args)]
pub struct SignalsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Transaction cost per unit of turnover.
    #[arg(long, default_value_t = 0.02)]
    pub cost: f64,
    /// Keep the previous position on a neutral signal instead of going flat.
    #[arg(long = "hold-on-neutral")]
    pub hold_on_neutral: bool,
    /// Use asset returns instead of net strategy returns for volatility.
    #[arg(long = "asset-vol")]
    pub asset_vol: bool,
}

impl CostArgs {
    fn config(&self) -> BacktestConfig {
        BacktestConfig {
            cost_rate: self.cost,
            neutral: if self.hold_on_neutral {
                NeutralMode::Hold
            } else {
                NeutralMode::Flat
            },
            vol_source: if self.asset_vol {
                VolSource::Asset
            } else {
                VolSource::NetPortfolio
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cost: CostArgs,
    /// 52-character 0/1 genome string.
    pub genome: String,
}

#[derive(Debug, Args)]
pub struct RollArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cost: CostArgs,
    #[arg(long, default_value_t = 30)]
    pub pop: usize,
    #[arg(long, visible_alias = "generations", default_value_t = 5)]
    pub gens: usize,
    #[arg(long, default_value_t = 0.9)]
    pub cx: f64,
    #[arg(long = "mut", default_value_t = 0.1)]
    pub mutation: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "train-years", default_value_t = 2)]
    pub train_years: u32,
    #[arg(long = "test-years", default_value_t = 1)]
    pub test_years: u32,
    /// JSON report path (stdout when absent; summaries then go to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional flattened CSV report, one row per strategy.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Maximum worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// 52-character 0/1 genome string.
    pub genome: String,
}

/// Resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub cost_rate: f64,
    pub population: usize,
    pub generations: usize,
    pub cx_rate: f64,
    pub mut_rate: f64,
    pub seed: u64,
    pub train_years: u32,
    pub test_years: u32,
    pub first_train_year: Option<i32>,
    pub last_test_year: Option<i32>,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nsga = Nsga2Params::default();
        Self {
            data_path: PathBuf::new(),
            cost_rate: BacktestConfig::default().cost_rate,
            population: nsga.population_size,
            generations: nsga.generations,
            cx_rate: nsga.crossover_rate,
            mut_rate: nsga.mutation_rate,
            seed: nsga.seed,
            train_years: 2,
            test_years: 1,
            first_train_year: None,
            last_test_year: None,
            output_path: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_args(args: &RollArgs) -> Self {
        Self {
            data_path: args.data.data.clone(),
            cost_rate: args.cost.cost,
            population: args.pop,
            generations: args.gens,
            cx_rate: args.cx,
            mut_rate: args.mutation,
            seed: args.seed,
            train_years: args.train_years,
            test_years: args.test_years,
            first_train_year: args.data.start_year,
            last_test_year: args.data.end_year,
            output_path: args.out.clone(),
            threads: args.threads,
        }
    }

    pub fn nsga_params(&self) -> Nsga2Params {
        Nsga2Params {
            population_size: self.population,
            generations: self.generations,
            crossover_rate: self.cx_rate,
            mutation_rate: self.mut_rate,
            seed: self.seed,
        }
    }
}

fn load(data: &DataArgs) -> Result<OhlcSeries> {
    let loaded = load_ohlc(&data.data)?;
    if !loaded.dropped.is_empty() {
        log::warn!(
            "{}: dropped {} row(s) with missing prices",
            data.data.display(),
            loaded.dropped.len()
        );
    }
    let series = loaded.series;
    match (data.start_year, data.end_year) {
        (None, None) => Ok(series),
        (start, end) => {
            let start = start.unwrap_or_else(|| series.first_year());
            let end = end.unwrap_or_else(|| series.last_year());
            Ok(slice_by_years(&series, start, end)?)
        }
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_signals(args: &SignalsArgs, stdout: &mut dyn Write) -> Result<()> {
    let series = load(&args.data)?;
    let matrix = build_signal_matrix(&series)?;
    match &args.out {
        Some(path) => {
            let mut f = create(path)?;
            matrix.write_csv(&mut f)?;
            f.flush()?;
        }
        None => matrix.write_csv(stdout)?,
    }
    Ok(())
}

pub fn cmd_backtest(args: &BacktestArgs, stdout: &mut dyn Write) -> Result<()> {
    let genome: Genome = args.genome.parse()?;
    let series = load(&args.data)?;
    let matrix = build_signal_matrix_with(&series, &IndicatorParams::default())?;
    let report = evaluate_strategy(&genome, &series, &matrix, &args.cost.config())?;
    let (buy, sell) = render_rules(&genome);
    writeln!(stdout, "{}", serde_json::to_string(&report)?)?;
    writeln!(stdout, "BUY:  {buy}")?;
    writeln!(stdout, "SELL: {sell}")?;
    Ok(())
}

pub fn cmd_render(args: &RenderArgs, stdout: &mut dyn Write) -> Result<()> {
    let genome: Genome = args.genome.parse()?;
    let (buy, sell) = render_rules(&genome);
    writeln!(stdout, "BUY:  {buy}")?;
    writeln!(stdout, "SELL: {sell}")?;
    Ok(())
}

/// Runs the walk-forward experiment and returns the reports it wrote.
pub fn cmd_roll(args: &RollArgs, stdout: &mut dyn Write) -> Result<Vec<WindowReport>> {
    let run = RunConfig::from_args(args);
    let series = load_ohlc(&run.data_path)?.series;
    let first = run.first_train_year.unwrap_or_else(|| series.first_year());
    let last = run.last_test_year.unwrap_or_else(|| series.last_year());
    let windows = make_windows(first, last, run.train_years, run.test_years)?;
    let nsga = run.nsga_params();
    nsga.validate()?;
    let config = RollingConfig {
        nsga,
        backtest: args.cost.config(),
        indicators: IndicatorParams::default(),
        lead_in_days: 60,
        execution: Execution::Parallel,
    };
    let reports = Execution::with_threads(run.threads, || run_all(&series, &windows, &config))?;
    let json = serde_json::to_string_pretty(&reports)?;

    let mut summary = String::new();
    for r in &reports {
        summary.push_str(&format!(
            "window {}: {} strategies\n",
            r.spec.label(),
            r.strategies.len()
        ));
        for (i, s) in r.strategies.iter().enumerate() {
            summary.push_str(&format!(
                "  {:>2}  in {}  out {}\n      BUY  {}\n      SELL {}\n",
                i + 1,
                s.in_sample.bracketed(),
                s.out_sample.bracketed(),
                s.buy_rule,
                s.sell_rule
            ));
        }
    }
    match &run.output_path {
        Some(path) => {
            let mut f = create(path)?;
            writeln!(f, "{json}")?;
            f.flush()?;
            write!(stdout, "{summary}")?;
        }
        None => {
            writeln!(stdout, "{json}")?;
            eprint!("{summary}");
        }
    }
    if let Some(path) = &args.csv {
        let mut f = create(path)?;
        write_reports_csv(&reports, &mut f)?;
        f.flush()?;
    }
    Ok(reports)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Signals(a) => cmd_signals(a, stdout),
        Command::Backtest(a) => cmd_backtest(a, stdout),
        Command::Roll(a) => cmd_roll(a, stdout).map(|_| ()),
        Command::Render(a) => cmd_render(a, stdout),
    }
}

/// 2 for bad input (data, genome, too-short series), 1 for anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Data(_) | Error::Genome(_) | Error::Indicator(_) => 2,
        _ => 1,
    }
}
