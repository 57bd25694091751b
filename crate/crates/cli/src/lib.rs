//! Command-line front end for the `mapvol` volatility models.
//!
//! [`run`] parses arguments, merges them over the configuration file and
//! dispatches to a subcommand. Every subcommand writes its artifacts under
//! the output directory and returns an [`ExitCode`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use mapvol::forecast::ConvergenceRule;
use mapvol::ModelKind;

pub use config::RunConfig;
pub use error::{CliError, ExitCode};

#[derive(Debug, Parser)]
#[command(name = "mapvol", version, about = "Multiplicative error models of realized volatility with policy effects")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, short = 'c', global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "MAPVOL_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long = "out", short = 'o', global = true)]
    pub out: Option<PathBuf>,
    /// Input panel CSV.
    #[arg(long, short = 'i', global = true)]
    pub input: Option<PathBuf>,
    /// Comma-separated model list, e.g. AMEM,MAP,P-MAP.
    #[arg(long, global = true, value_delimiter = ',')]
    pub models: Option<Vec<ModelKind>>,
    /// Comma-separated output formats: json, text, csv, svg.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_format)]
    pub formats: Option<Vec<config::Format>>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

fn parse_format(s: &str) -> Result<config::Format, String> {
    match s.to_ascii_lowercase().as_str() {
        "json" => Ok(config::Format::Json),
        "text" | "txt" => Ok(config::Format::Text),
        "csv" => Ok(config::Format::Csv),
        "svg" => Ok(config::Format::Svg),
        _ => Err(format!("unknown format `{s}` (json, text, csv, svg)")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the selected models and report coefficients, diagnostics and marginal effects.
    Estimate(WindowArgs),
    /// Multi-step forecasts and impulse responses from the forecast origin.
    Forecast(ForecastArgs),
    /// Impulse responses to a sustained proxy shock.
    Irf(ForecastArgs),
    /// Out-of-sample one-step losses for each split date.
    Evaluate(SplitArgs),
    /// Model Confidence Set on the out-of-sample losses.
    Mcs(McsArgs),
    /// Simulate a panel from a chosen model.
    Simulate(SimulateArgs),
    /// Volatility around announcement days.
    Stylized(StylizedArgs),
    /// Re-render text reports from JSON artifacts in the output directory.
    Report,
}

#[derive(Debug, Args, Default)]
pub struct WindowArgs {
    /// First day of the estimation window.
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last day of the estimation window.
    #[arg(long)]
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Forecast origin date; the end of the estimation window by default.
    #[arg(long)]
    pub origin: Option<NaiveDate>,
    /// Reuse an `estimates.json` instead of refitting.
    #[arg(long)]
    pub estimates: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_parser = parse_rule)]
    pub convergence_rule: Option<ConvergenceRule>,
    /// Proxy shock for impulse responses.
    #[arg(long, allow_hyphen_values = true)]
    pub shock: Option<f64>,
}

fn parse_rule(s: &str) -> Result<ConvergenceRule, String> {
    match s.replace('-', "_").as_str() {
        "successive_difference" => Ok(ConvergenceRule::SuccessiveDifference),
        "distance_to_limit" => Ok(ConvergenceRule::DistanceToLimit),
        _ => Err(format!("unknown convergence rule `{s}` (successive-difference, distance-to-limit)")),
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Comma-separated split dates (last in-sample day).
    #[arg(long, value_delimiter = ',')]
    pub splits: Option<Vec<NaiveDate>>,
}

#[derive(Debug, Args)]
pub struct McsArgs {
    #[command(flatten)]
    pub splits: SplitArgs,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub block_length: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub kind: Option<ModelKind>,
    /// Number of days.
    #[arg(long = "length", short = 'n')]
    pub t_len: Option<usize>,
    /// Panel CSV destination; `<out>/simulated.csv` by default.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StylizedArgs {
    #[arg(long)]
    pub window: Option<usize>,
}

impl Cli {
    /// Configuration file values with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.global.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let g = &self.global;
        if let Some(t) = g.threads {
            c.threads = t;
        }
        if let Some(s) = g.seed {
            c.seed = s;
        }
        if let Some(o) = &g.out {
            c.output_dir = o.clone();
        }
        if let Some(i) = &g.input {
            c.data.input = Some(i.clone());
        }
        if let Some(m) = &g.models {
            c.estimation.models = m.clone();
        }
        if let Some(f) = &g.formats {
            c.formats = f.clone();
        }
        match &self.command {
            Command::Estimate(w) => apply_window(&mut c, w),
            Command::Forecast(a) | Command::Irf(a) => {
                apply_window(&mut c, &a.window);
                let f = &mut c.forecast;
                f.horizon = a.horizon.unwrap_or(f.horizon);
                f.origin = a.origin.or(f.origin);
                f.estimates = a.estimates.clone().or(f.estimates.take());
                f.tolerance = a.tolerance.unwrap_or(f.tolerance);
                f.convergence_rule = a.convergence_rule.unwrap_or(f.convergence_rule);
                f.irf_shock = a.shock.or(f.irf_shock);
            }
            Command::Evaluate(s) => apply_splits(&mut c, s),
            Command::Mcs(a) => {
                apply_splits(&mut c, &a.splits);
                c.mcs.level = a.level.unwrap_or(c.mcs.level);
                c.mcs.replications = a.replications.unwrap_or(c.mcs.replications);
                c.mcs.block_length = a.block_length.unwrap_or(c.mcs.block_length);
            }
            Command::Simulate(a) => {
                c.simulate.kind = a.kind.unwrap_or(c.simulate.kind);
                c.simulate.t_len = a.t_len.unwrap_or(c.simulate.t_len);
            }
            Command::Stylized(a) => c.stylized.window = a.window.unwrap_or(c.stylized.window),
            Command::Report => {}
        }
        c.validate()?;
        Ok(c)
    }
}

fn apply_window(c: &mut RunConfig, w: &WindowArgs) {
    c.estimation.start = w.start.or(c.estimation.start);
    c.estimation.end = w.end.or(c.estimation.end);
}

fn apply_splits(c: &mut RunConfig, s: &SplitArgs) {
    if let Some(v) = &s.splits {
        c.evaluation.splits = v.clone();
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn init_threads(n: usize) {
    if n > 0 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Usage as i32 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.global.verbose);
    let result = cli.resolve().and_then(|cfg| {
        init_threads(cfg.threads);
        commands::dispatch(&cli.command, &cfg, cli.global.config.as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code as i32
        }
    }
}
