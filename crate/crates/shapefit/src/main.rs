use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shapefit::config::{self, RunConfig};
use shapefit::io;
use shapefit::risk::{self, EstimatorKind, Suite, TruthSpec};
use shapefit::{Error, Result};
use shapefit_core::estimators::{cumulative_estimate, Data, Model};
use shapefit_core::regularize::{shape_map, shape_map_at};
use shapefit_core::stepfn::{sup_distance, Interval, Partition};

/// Shape-respecting nonparametric estimation of densities, regression
/// functions, hazard rates and failure rates, with a verification harness.
#[derive(Parser)]
#[command(name = "shapefit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a shape-respecting estimate to a data file.
    Estimate(CommonArgs),
    /// Monte Carlo risk of an estimator against a piecewise-constant truth.
    Simulate(CommonArgs),
    /// Run randomized verification suites and report violations.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Optional key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data model: density | regression | hazard | nhpp.
    #[arg(long)]
    model: Option<String>,
    /// Shape constraint: u_shaped | unimodal | nonincreasing | nondecreasing.
    #[arg(long)]
    shape: Option<String>,
    /// Estimation interval as `a,b`.
    #[arg(long)]
    interval: Option<String>,
    /// Fixed valley/mode (skips the data-driven search).
    #[arg(long)]
    mode: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replications (simulate) or trials (verify).
    #[arg(long)]
    reps: Option<usize>,
    /// Input file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file.
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Verification suite name, or `all`.
    #[arg(long)]
    suite: Option<String>,
    /// Risk-bracket constant.
    #[arg(long)]
    constant: Option<f64>,
    /// Per-replication sample size for simulate.
    #[arg(long)]
    size: Option<f64>,
    /// Regression noise level for simulate.
    #[arg(long)]
    sigma: Option<f64>,
    /// Estimator for simulate: shape | histogram:D | known-mode:M | constant-mle.
    #[arg(long)]
    estimator: Option<String>,
}

fn resolve(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        config::apply_config_file(&mut cfg, path)?;
    }
    if let Some(m) = &args.model {
        cfg.model = Some(config::parse_model(m)?);
    }
    if let Some(s) = &args.shape {
        cfg.shape = Some(config::parse_shape(s)?);
    }
    if let Some(i) = &args.interval {
        cfg.interval = Some(config::parse_interval(i)?);
    }
    if let Some(m) = args.mode {
        cfg.mode = Some(m);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(path) = &args.input {
        cfg.input = Some(path.clone());
    }
    if let Some(path) = &args.output {
        cfg.output = Some(path.clone());
    }
    if let Some(suite) = &args.suite {
        cfg.suite = Some(suite.clone());
    }
    if let Some(c) = args.constant {
        cfg.constant = c;
    }
    if let Some(size) = args.size {
        cfg.size = Some(size);
    }
    if let Some(sigma) = args.sigma {
        cfg.sigma = sigma;
    }
    if let Some(est) = &args.estimator {
        cfg.estimator = Some(est.clone());
    }
    Ok(cfg)
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::usage(format!("{what} is required")))
}

fn horizon_interval(cfg: &RunConfig) -> Result<Interval> {
    let interval = require(cfg.interval, "--interval")?;
    if interval.a() != 0.0 {
        return Err(Error::usage("hazard/nhpp intervals must start at 0"));
    }
    Ok(interval)
}

fn ingest(cfg: &RunConfig, model: Model, path: &Path) -> Result<Data> {
    match model {
        Model::Density => {
            let interval = require(cfg.interval, "--interval")?;
            Ok(Data::Sample(io::read_sample(path, interval)?))
        }
        Model::Regression => {
            if let Some(i) = cfg.interval {
                if i.a() != 0.0 || i.b() != 1.0 {
                    return Err(Error::usage("regression designs live on [0, 1]"));
                }
            }
            Ok(Data::Regression(io::read_regression(path)?))
        }
        Model::Hazard => {
            let interval = horizon_interval(cfg)?;
            Ok(Data::Censored(io::read_censored(path, interval.b())?))
        }
        Model::Nhpp => {
            let interval = horizon_interval(cfg)?;
            Ok(Data::Events(io::read_event_log(path, interval.b())?))
        }
    }
}

fn run_estimate(cfg: RunConfig) -> Result<ExitCode> {
    let model = require(cfg.model, "--model")?;
    let input = require(cfg.input.clone(), "--in")?;
    let output = require(cfg.output.clone(), "--out")?;
    let shape = cfg.shape.unwrap_or_else(|| model.default_shape());

    let data = ingest(&cfg, model, &input)?;
    match &data {
        Data::Censored(cs) if cs.at_risk_at_horizon() == 0 => {
            eprintln!(
                "warning: no subjects remain at risk at the horizon; \
                 the estimate is unreliable near the right endpoint"
            );
        }
        Data::Regression(r) => {
            eprintln!("design uniformity gap: {:.3e}", r.uniformity_gap());
        }
        _ => {}
    }

    let g_hat = cumulative_estimate(&data, model)?;
    let est = match cfg.mode {
        Some(m) => shape_map_at(&g_hat, shape, m)?,
        None => shape_map(&g_hat, shape)?,
    };
    if est.nonmonotone_input {
        eprintln!(
            "warning: the cumulative estimate is not nondecreasing; \
             the construction proceeds but its risk guarantee is conjectural"
        );
    }
    let d = sup_distance(&g_hat, &est.envelope, g_hat.domain())?;
    let sidecar = format!(
        "mode={} shape={} d={}",
        est.mode,
        config::shape_name(shape),
        d
    );
    io::write_step_function(&output, &est.estimate, Some(&sidecar))?;
    println!(
        "wrote {} (mode {}, sup distance {:.6})",
        output.display(),
        est.mode,
        d
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_estimator(text: &str, interval: Interval) -> Result<EstimatorKind> {
    if text == "shape" {
        return Ok(EstimatorKind::ShapeMap);
    }
    if text == "constant-mle" {
        return Ok(EstimatorKind::ConstantMle);
    }
    if let Some(cells) = text.strip_prefix("histogram:") {
        let cells: usize = cells
            .parse()
            .map_err(|_| Error::usage(format!("bad histogram cell count `{cells}`")))?;
        return Ok(EstimatorKind::Histogram(Partition::uniform(
            interval, cells,
        )?));
    }
    if let Some(mode) = text.strip_prefix("known-mode:") {
        let mode: f64 = mode
            .parse()
            .map_err(|_| Error::usage(format!("bad known mode `{mode}`")))?;
        return Ok(EstimatorKind::KnownMode(mode));
    }
    Err(Error::usage(format!(
        "unknown estimator `{text}` (shape | histogram:D | known-mode:M | constant-mle)"
    )))
}

fn run_simulate(cfg: RunConfig) -> Result<ExitCode> {
    let model = require(cfg.model, "--model")?;
    let interval = require(cfg.interval, "--interval")?;
    let input = require(cfg.input.clone(), "--in")?;
    let output = require(cfg.output.clone(), "--out")?;
    let shape = cfg.shape.unwrap_or_else(|| model.default_shape());

    let truth = io::read_step_function(&input, interval)?;
    let censor = match &cfg.censor {
        Some(path) => Some(io::read_step_function(path, interval)?),
        None => None,
    };
    let spec = TruthSpec::new(model, shape, truth, cfg.sigma, censor)?;
    let n_or_t = match model {
        Model::Nhpp => {
            if let Some(size) = cfg.size {
                if (size - interval.b()).abs() > 1e-9 * interval.b().max(1.0) {
                    return Err(Error::usage(
                        "for nhpp the observation window is the interval itself",
                    ));
                }
            }
            interval.b()
        }
        _ => require(cfg.size, "--size")?,
    };
    let estimator = parse_estimator(cfg.estimator.as_deref().unwrap_or("shape"), interval)?;
    let report = risk::monte_carlo_risk(&spec, &estimator, n_or_t, cfg.reps, cfg.seed)?;
    io::write_risk_report(&output, &report)?;
    println!(
        "mean_l1 {:.6} stderr {:.6} over {} replications -> {}",
        report.mean_l1,
        report.stderr,
        report.replications,
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_verify(cfg: RunConfig) -> Result<ExitCode> {
    let suites: Vec<Suite> =
        match cfg.suite.as_deref() {
            None | Some("all") => Suite::ALL.to_vec(),
            Some(name) => vec![Suite::parse(name)
                .ok_or_else(|| Error::usage(format!("unknown suite `{name}`")))?],
        };
    let mut reports = Vec::new();
    let mut total_violations = 0usize;
    for suite in suites {
        let report = risk::verify_inequalities_with(suite, cfg.reps, cfg.seed, cfg.constant)?;
        let verdict = if report.violations == 0 {
            "pass"
        } else {
            "FAIL"
        };
        println!(
            "{}: {} ({} trials, {} violations)",
            suite.name(),
            verdict,
            report.replications,
            report.violations
        );
        total_violations += report.violations;
        reports.push((suite.name().to_string(), report));
    }
    if let Some(output) = &cfg.output {
        io::write_suite_reports(output, &reports)?;
    }
    if total_violations > 0 {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Cmd::Estimate(args) => resolve(args).and_then(run_estimate),
        Cmd::Simulate(args) => resolve(args).and_then(run_simulate),
        Cmd::Verify(args) => resolve(args).and_then(run_verify),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
