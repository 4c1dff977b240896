//! Argument definitions and command dispatch.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use geoinar::baselines::{simulate_inarch, simulate_pinar, InarchModel, PinarModel};
use geoinar::diagnostics::{diagnose, DiagnosticsOptions};
use geoinar::estimation::{fit_cls, fit_ml, fit_yw, MlOptions, DEFAULT_LEVEL};
use geoinar::forecasting::{
    backtest, forecast, one_step_distribution, ForecastResult, PointRule, FORECAST_TAIL,
};
use geoinar::mcstudy::{run_scenario, ReplicateEstimate, ScenarioSpec, TABLE_SAMPLE_SIZES};
use geoinar::model::fit_model;
use geoinar::process::{simulate, InitialState};
use geoinar::{CountModel, CountSeries, FitResult, GeoInarModel, Method, ModelKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::input::parse_count_csv;
use crate::render::{render_report, Format};
use crate::report::{AnalysisReport, ModelDiagnostics, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "geoinar", version, about = "Geometric INAR(1) count time series: simulate, fit, forecast, diagnose")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format [default: csv for simulate, text otherwise]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a stationary sample path
    Simulate(SimulateArgs),
    /// Estimate parameters from a count series
    Fit(FitArgs),
    /// Multi-step forecasts from the last value, or a rolling one-step backtest
    Forecast(ForecastArgs),
    /// Goodness-of-fit report for fitted models
    Diagnose(DiagnoseArgs),
    /// Monte Carlo comparison of the estimators
    Mc(McArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Geoinar,
    Pinar,
    Inarch,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Geoinar => ModelKind::Geoinar,
            ModelArg::Pinar => ModelKind::Pinar,
            ModelArg::Inarch => ModelKind::Inarch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cls,
    Yw,
    Ml,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cls => Method::Cls,
            MethodArg::Yw => Method::Yw,
            MethodArg::Ml => Method::Ml,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Median,
    Mode,
}

impl From<RuleArg> for PointRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Median => PointRule::Median,
            RuleArg::Mode => PointRule::Mode,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "geoinar")]
    pub model: ModelArg,
    /// Marginal mean
    #[arg(long)]
    pub mu: f64,
    /// Lag-one autocorrelation
    #[arg(long)]
    pub alpha: f64,
    /// Path length
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Count series CSV (`-` for standard input)
    #[arg(long)]
    pub input: PathBuf,
    /// Models to fit (comma separated)
    #[arg(long, value_enum, value_delimiter = ',', default_value = "geoinar")]
    pub model: Vec<ModelArg>,
    /// Estimation methods (comma separated); the baselines take ml only
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ml")]
    pub method: Vec<MethodArg>,
    /// Confidence level of the Wald intervals
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    pub level: f64,
    /// Also score one-step median forecasts of everything after the first
    /// `train` observations
    #[arg(long)]
    pub train: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "geoinar")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "ml")]
    pub method: MethodArg,
    /// Largest horizon
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    /// Fit on the first `train` observations and forecast the rest one step
    /// at a time
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long, value_enum, default_value = "median")]
    pub rule: RuleArg,
    /// Coverage of the forecast intervals
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "geoinar")]
    pub model: Vec<ModelArg>,
    #[arg(long, value_enum, default_value = "ml")]
    pub method: MethodArg,
    /// PIT histogram bins
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Residual autocorrelation lags
    #[arg(long, default_value_t = 10)]
    pub lags: usize,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Preset a, b, c or d (mu = 5, alpha = 0.1, 0.3, 0.5, 0.7)
    #[arg(long)]
    pub scenario: Option<char>,
    /// True mean, overriding the preset
    #[arg(long)]
    pub mu: Option<f64>,
    /// True autocorrelation, overriding the preset
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sample sizes (comma separated) [default: 100,300,500,700,1000]
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cls,yw,ml")]
    pub method: Vec<MethodArg>,
    /// Base seed [default: the preset's]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write every replicate's estimates to this CSV file
    #[arg(long)]
    pub estimates: Option<PathBuf>,
}

/// A report plus the per-replicate estimates of an `mc` run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: AnalysisReport,
    pub estimates: Vec<ReplicateEstimate>,
}

impl From<AnalysisReport> for Outcome {
    fn from(report: AnalysisReport) -> Self {
        Self {
            report,
            estimates: Vec::new(),
        }
    }
}

fn read_series(path: &Path) -> Result<CountSeries> {
    if path == Path::new("-") {
        return parse_count_csv(io::stdin().lock());
    }
    let file = File::open(path).map_err(|source| CliError::Io {
        context: format!("cannot open {}", path.display()),
        source,
    })?;
    parse_count_csv(io::BufReader::new(file))
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--level must lie in (0, 1), got {level}")))
    }
}

fn names<T: std::fmt::Debug>(items: &[T]) -> Vec<String> {
    items.iter().map(|x| format!("{x:?}").to_lowercase()).collect()
}

/// Fits without requiring admissible estimates, so moment fits that leave the
/// parameter space are still reported (with a warning).
fn fit_only(kind: ModelKind, method: Method, series: &CountSeries) -> Result<FitResult> {
    let fit = match (kind, method) {
        (ModelKind::Geoinar, Method::Cls) => fit_cls(series)?,
        (ModelKind::Geoinar, Method::Yw) => fit_yw(series)?,
        (ModelKind::Geoinar, Method::Ml) => fit_ml(series, &MlOptions::default())?,
        _ => fit_model(kind, method, series)?.0,
    };
    Ok(fit)
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => simulate_cmd(a).map(Outcome::from),
        Command::Fit(a) => fit_cmd(a).map(Outcome::from),
        Command::Forecast(a) => forecast_cmd(a).map(Outcome::from),
        Command::Diagnose(a) => diagnose_cmd(a).map(Outcome::from),
        Command::Mc(a) => mc_cmd(a),
    }
}

fn simulate_cmd(a: &SimulateArgs) -> Result<AnalysisReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let series = match a.model {
        ModelArg::Geoinar => simulate(
            &GeoInarModel::new(a.mu, a.alpha)?,
            a.n,
            &mut rng,
            InitialState::Stationary,
        )?,
        ModelArg::Pinar => simulate_pinar(&PinarModel::new(a.mu, a.alpha)?, a.n, &mut rng)?,
        ModelArg::Inarch => simulate_inarch(&InarchModel::from_mean(a.mu, a.alpha)?, a.n, &mut rng)?,
    };
    let config = RunConfig {
        models: names(&[a.model]),
        mu: Some(a.mu),
        alpha: Some(a.alpha),
        n: vec![a.n],
        seed: Some(a.seed),
        ..RunConfig::default()
    };
    let mut report = AnalysisReport::new("simulate", config);
    report.series = series.values().to_vec();
    Ok(report)
}

fn fit_cmd(a: &FitArgs) -> Result<AnalysisReport> {
    check_level(a.level)?;
    let series = read_series(&a.input)?;
    let config = RunConfig {
        input: Some(a.input.display().to_string()),
        models: names(&a.model),
        methods: names(&a.method),
        level: Some(a.level),
        train: a.train,
        ..RunConfig::default()
    };
    let mut report = AnalysisReport::new("fit", config);
    let ml_requested = a.method.iter().any(|&m| Method::from(m) == Method::Ml);
    for &m in &a.model {
        for &method in &a.method {
            let (kind, method) = (ModelKind::from(m), Method::from(method));
            // the baselines have ML fits only; skip their other combinations
            // when ML is also on the list
            if kind != ModelKind::Geoinar && method != Method::Ml && ml_requested {
                continue;
            }
            report.fit.push(fit_only(kind, method, &series)?.with_level(a.level));
            if let Some(train) = a.train {
                report
                    .backtests
                    .push(backtest(&series, train, kind, method, PointRule::Median)?);
            }
        }
    }
    Ok(report)
}

/// Forecast record from a one-step law, for models without an h-step kernel.
fn one_step_forecast(
    model: &dyn CountModel,
    x_last: u64,
    rule: PointRule,
    level: f64,
) -> Result<ForecastResult> {
    let pmf = one_step_distribution(model, x_last, FORECAST_TAIL)?;
    let point = pmf.point(rule);
    let (lo, hi) = pmf.interval(level);
    Ok(ForecastResult {
        h: 1,
        x_last,
        point,
        rule,
        interval: (lo.min(point), hi.max(point)),
        level,
        tail_bound: FORECAST_TAIL,
        pmf: pmf.pmf,
    })
}

fn forecast_cmd(a: &ForecastArgs) -> Result<AnalysisReport> {
    check_level(a.level)?;
    if a.h == 0 {
        return Err(CliError::usage("--h must be at least 1"));
    }
    let series = read_series(&a.input)?;
    let (kind, method, rule) = (ModelKind::from(a.model), Method::from(a.method), PointRule::from(a.rule));
    let config = RunConfig {
        input: Some(a.input.display().to_string()),
        models: names(&[a.model]),
        methods: names(&[a.method]),
        h: a.train.is_none().then_some(a.h),
        train: a.train,
        rule: Some(names(&[a.rule]).remove(0)),
        level: Some(a.level),
        ..RunConfig::default()
    };
    let mut report = AnalysisReport::new("forecast", config);

    if let Some(train) = a.train {
        let bt = backtest(&series, train, kind, method, rule)?;
        report.fit.extend(bt.fit.clone());
        report.backtests.push(bt);
        return Ok(report);
    }

    let (fit, model) = fit_model(kind, method, &series)?;
    let x_last = *series.values().last().expect("series are non-empty");
    match kind {
        ModelKind::Geoinar => {
            let m = fit.geoinar()?;
            for h in 1..=a.h {
                report
                    .forecasts
                    .push(forecast(&m, x_last, h, rule, a.level, FORECAST_TAIL)?);
            }
        }
        _ if a.h > 1 => {
            return Err(CliError::usage(format!(
                "{kind} supports one-step forecasts only (--h 1)"
            )))
        }
        _ => report
            .forecasts
            .push(one_step_forecast(model.as_ref(), x_last, rule, a.level)?),
    }
    report.fit.push(fit);
    Ok(report)
}

fn diagnose_cmd(a: &DiagnoseArgs) -> Result<AnalysisReport> {
    if a.bins == 0 || a.lags == 0 {
        return Err(CliError::usage("--bins and --lags must be at least 1"));
    }
    let series = read_series(&a.input)?;
    let config = RunConfig {
        input: Some(a.input.display().to_string()),
        models: names(&a.model),
        methods: names(&[a.method]),
        bins: Some(a.bins),
        lags: Some(a.lags),
        ..RunConfig::default()
    };
    let mut report = AnalysisReport::new("diagnose", config);
    let opts = DiagnosticsOptions {
        bins: a.bins,
        max_lag: a.lags,
    };
    for &m in &a.model {
        let (fit, model) = fit_model(m.into(), a.method.into(), &series)?;
        let diag = diagnose(model.as_ref(), &series, opts)?;
        report.fit.push(fit.clone());
        report.diagnostics.push(ModelDiagnostics { fit, report: diag });
    }
    Ok(report)
}

fn mc_cmd(a: &McArgs) -> Result<Outcome> {
    let mut spec = match a.scenario {
        Some(label) => ScenarioSpec::preset(label)?,
        None => {
            if a.mu.is_none() || a.alpha.is_none() {
                return Err(CliError::usage(
                    "mc needs --scenario, or both --mu and --alpha",
                ));
            }
            ScenarioSpec::preset('a')?
        }
    };
    spec.mu = a.mu.unwrap_or(spec.mu);
    spec.alpha = a.alpha.unwrap_or(spec.alpha);
    spec.sample_sizes = if a.n.is_empty() {
        TABLE_SAMPLE_SIZES.to_vec()
    } else {
        a.n.clone()
    };
    spec.n_replicates = a.reps;
    spec.methods = a.method.iter().map(|&m| m.into()).collect();
    spec.base_seed = a.seed.unwrap_or(spec.base_seed);

    let result = run_scenario(&spec)?;
    let config = RunConfig {
        scenario: a.scenario.map(|c| c.to_ascii_lowercase().to_string()),
        methods: names(&a.method),
        mu: Some(spec.mu),
        alpha: Some(spec.alpha),
        n: spec.sample_sizes.clone(),
        reps: Some(spec.n_replicates),
        seed: Some(spec.base_seed),
        ..RunConfig::default()
    };
    let mut report = AnalysisReport::new("mc", config);
    report.mcstudy = result.rows;
    Ok(Outcome {
        report,
        estimates: result.estimates,
    })
}

fn estimates_csv(estimates: &[ReplicateEstimate]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "n", "replicate", "mu", "alpha"])?;
    for e in estimates {
        w.write_record([
            e.method.to_string(),
            e.n.to_string(),
            e.replicate.to_string(),
            e.mu.to_string(),
            e.alpha.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CliError::usage(format!("cannot buffer estimates: {e}")))
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let io_err = |source, what: String| CliError::Io { context: what, source };
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_err(e, format!("cannot write {}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| io_err(e, "cannot write to standard output".into()))
        }
    }
}

/// Executes, renders and writes one invocation.
pub fn run(cli: &Cli) -> Result<()> {
    let outcome = execute(&cli.command)?;
    outcome.report.validate()?;
    let format = cli.format.unwrap_or(match cli.command {
        Command::Simulate(_) => Format::Csv,
        _ => Format::Text,
    });
    write_to(cli.output.as_deref(), render_report(&outcome.report, format).as_bytes())?;
    if let Command::Mc(McArgs {
        estimates: Some(path),
        ..
    }) = &cli.command
    {
        write_to(Some(path), &estimates_csv(&outcome.estimates)?)?;
    }
    Ok(())
}
