//! Data generators and the Monte Carlo harness that exercises the
//! estimator's deterministic inequalities and risk bounds at desk scale.
//!
//! Determinism contract: every replication derives its own ChaCha stream
//! from `(seed, replication index)`, so reports are bit-identical across
//! runs and independent of evaluation order; aggregation uses compensated
//! summation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use shapefit_core::error::{Error, Result};
use shapefit_core::estimators::{
    constant_rate_mle, cumulative_estimate, fit, CensoredRecord, CensoredSample, Data, EventLog,
    Model, RegressionData, Sample,
};
use shapefit_core::histogram::{
    best_step_distance, fluctuation_ratio, histogram_estimate, risk_bracket, z_cell_stats,
    DistanceMethod, ZCellStats, DEFAULT_BRACKET_CONSTANT,
};
use shapefit_core::numeric::KahanSum;
use shapefit_core::regularize::{regularize_at, shape_map, shape_map_at, slope, ShapeKind};
use shapefit_core::stepfn::{
    cumulative, interval_stats, l1_distance, signed_sup, sup_distance, Interval, Partition,
    PiecewiseAffine, PiecewiseCurve, StepFunction,
};

/// Ground truth for one simulation scenario. The truth `g` is piecewise
/// constant on the estimation interval; its domain doubles as the horizon.
#[derive(Debug, Clone)]
pub struct TruthSpec {
    model: Model,
    shape: ShapeKind,
    g: StepFunction,
    sigma: f64,
    censor_cdf: Option<StepFunction>,
}

impl TruthSpec {
    pub fn new(
        model: Model,
        shape: ShapeKind,
        g: StepFunction,
        sigma: f64,
        censor_cdf: Option<StepFunction>,
    ) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::domain("noise level must be nonnegative and finite"));
        }
        let dom = g.domain();
        match model {
            Model::Density | Model::Hazard | Model::Nhpp => {
                if g.values().iter().any(|&v| v < 0.0) {
                    return Err(Error::domain("rate/density truths must be nonnegative"));
                }
            }
            Model::Regression => {}
        }
        if model == Model::Density && (g.integral() - 1.0).abs() > 1e-8 {
            return Err(Error::domain("density truth must integrate to 1"));
        }
        if matches!(model, Model::Hazard | Model::Nhpp) && dom.a() != 0.0 {
            return Err(Error::domain("hazard/failure-rate truths live on [0, c]"));
        }
        if model == Model::Regression && (dom.a() != 0.0 || dom.b() != 1.0) {
            return Err(Error::domain("regression truths live on [0, 1]"));
        }
        if !shape_matches(&g, shape) {
            return Err(Error::domain("truth does not have the declared shape"));
        }
        if let Some(h) = &censor_cdf {
            if !h.is_nondecreasing() || h.values().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::domain("censoring distribution must be a CDF"));
            }
        }
        Ok(TruthSpec {
            model,
            shape,
            g,
            sigma,
            censor_cdf,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn shape(&self) -> ShapeKind {
        self.shape
    }

    pub fn truth(&self) -> &StepFunction {
        &self.g
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> Interval {
        self.g.domain()
    }
}

fn shape_matches(g: &StepFunction, shape: ShapeKind) -> bool {
    let v = g.values();
    let nonincreasing = |s: &[f64]| s.windows(2).all(|w| w[0] >= w[1]);
    let nondecreasing = |s: &[f64]| s.windows(2).all(|w| w[0] <= w[1]);
    match shape {
        ShapeKind::Nonincreasing => nonincreasing(v),
        ShapeKind::Nondecreasing => nondecreasing(v),
        ShapeKind::UShaped => {
            (0..v.len()).any(|k| nonincreasing(&v[..=k]) && nondecreasing(&v[k..]))
        }
        ShapeKind::Unimodal => {
            (0..v.len()).any(|k| nondecreasing(&v[..=k]) && nonincreasing(&v[k..]))
        }
    }
}

/// Inverse of a continuous nondecreasing piecewise-affine function at
/// `target`; used for exact inverse-CDF and inverse-cumulative-hazard
/// sampling from piecewise-constant truths.
fn invert_nondecreasing(curve: &PiecewiseAffine, target: f64) -> f64 {
    let values = curve.knot_values();
    let knots = curve.knots();
    let idx = values.partition_point(|&v| v < target);
    if idx == 0 {
        return knots[0];
    }
    if idx >= values.len() {
        return *knots.last().unwrap();
    }
    let (v0, v1) = (values[idx - 1], values[idx]);
    let (k0, k1) = (knots[idx - 1], knots[idx]);
    // partition_point guarantees v0 < target <= v1, so the segment rises.
    k0 + (target - v0) / (v1 - v0) * (k1 - k0)
}

/// Smallest time where a discrete CDF reaches `u`; beyond-support draws are
/// mapped past the horizon (never censored inside the window).
fn sample_discrete_cdf(cdf: &StepFunction, u: f64, beyond: f64) -> f64 {
    let values = cdf.values();
    if values[0] >= u {
        return cdf.domain().a();
    }
    let idx = values.partition_point(|&v| v < u);
    if idx >= values.len() {
        beyond
    } else {
        cdf.breakpoints()[idx - 1]
    }
}

fn check_count(n_or_t: f64) -> Result<usize> {
    if !(n_or_t >= 1.0) || !n_or_t.is_finite() {
        return Err(Error::domain("sample size must be at least 1"));
    }
    Ok(n_or_t as usize)
}

/// Per-replication generator stream.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64 + 1);
    rng
}

/// Draws one data set from the scenario. Density samples come from exact
/// inverse-CDF inversion of the piecewise-affine cumulative; lifetimes from
/// inverse cumulative hazard against unit exponentials; counting paths from
/// thinning against the constant majorant `sup g`.
pub fn generate(spec: &TruthSpec, n_or_t: f64, seed: u64) -> Result<Data> {
    generate_with(spec, n_or_t, &mut ChaCha12Rng::seed_from_u64(seed))
}

pub fn generate_with(spec: &TruthSpec, n_or_t: f64, rng: &mut ChaCha12Rng) -> Result<Data> {
    let dom = spec.horizon();
    match spec.model {
        Model::Density => {
            let n = check_count(n_or_t)?;
            let big = cumulative(&spec.g);
            let total = big.value_right(dom.b());
            if !(total > 0.0) {
                return Err(Error::domain("density truth carries no mass"));
            }
            let values: Vec<f64> = (0..n)
                .map(|_| invert_nondecreasing(&big, rng.gen::<f64>() * total))
                .collect();
            Ok(Data::Sample(Sample::new(values, dom)?))
        }
        Model::Regression => {
            let n = check_count(n_or_t)?;
            let pairs: Vec<(f64, f64)> = (1..=n)
                .map(|i| {
                    let x = i as f64 / n as f64;
                    let noise: f64 = StandardNormal.sample(rng);
                    (x, spec.g.value_right(x) + spec.sigma * noise)
                })
                .collect();
            Ok(Data::Regression(RegressionData::new(pairs)?))
        }
        Model::Hazard => {
            let n = check_count(n_or_t)?;
            let cum_hazard = cumulative(&spec.g);
            let top = cum_hazard.value_right(dom.b());
            let beyond = dom.b() + 1.0;
            let records: Vec<CensoredRecord> = (0..n)
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    let death = if e >= top {
                        beyond
                    } else {
                        invert_nondecreasing(&cum_hazard, e)
                    };
                    let censor = match &spec.censor_cdf {
                        Some(h) => sample_discrete_cdf(h, rng.gen::<f64>(), beyond),
                        None => beyond,
                    };
                    CensoredRecord {
                        time: death.min(censor),
                        event: death <= censor,
                    }
                })
                .collect();
            Ok(Data::Censored(CensoredSample::new(records, dom.b())?))
        }
        Model::Nhpp => {
            let horizon = dom.b();
            if (n_or_t - horizon).abs() > 1e-9 * horizon.max(1.0) {
                return Err(Error::usage(
                    "nhpp observation window is the truth's domain [0, T]",
                ));
            }
            let majorant = spec.g.values().iter().fold(0.0f64, |m, &v| m.max(v));
            let mut times = Vec::new();
            if majorant > 0.0 {
                let mut t = 0.0f64;
                loop {
                    let e: f64 = Exp1.sample(rng);
                    t += e / majorant;
                    if t > horizon {
                        break;
                    }
                    if rng.gen::<f64>() * majorant <= spec.g.value_right(t)
                        && times.last() != Some(&t)
                    {
                        times.push(t);
                    }
                }
            }
            Ok(Data::Events(EventLog::new(times, horizon)?))
        }
    }
}

/// Which estimator the Monte Carlo loop evaluates.
#[derive(Debug, Clone)]
pub enum EstimatorKind {
    /// Shape-respecting pipeline with searched valley/mode.
    ShapeMap,
    /// Fixed-partition histogram comparator.
    Histogram(Partition),
    /// Shape-respecting pipeline with the valley/mode pinned.
    KnownMode(f64),
    /// Constant-rate maximum likelihood (event logs only).
    ConstantMle,
}

/// Aggregated Monte Carlo output. For verification suites `mean_l1` carries
/// the suite's primary quantity and `violations` counts failed inequalities.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub mean_l1: f64,
    pub stderr: f64,
    pub replications: usize,
    pub per_rep: Option<Vec<f64>>,
    pub violations: usize,
    /// Additional named metrics emitted into the CSV report.
    pub extra: Vec<(String, f64)>,
}

impl RiskReport {
    fn from_losses(losses: Vec<f64>, keep_per_rep: bool) -> Self {
        let n = losses.len();
        let mean = losses.iter().copied().collect::<KahanSum>().total() / n as f64;
        let var = if n > 1 {
            losses
                .iter()
                .map(|x| (x - mean) * (x - mean))
                .collect::<KahanSum>()
                .total()
                / (n - 1) as f64
        } else {
            0.0
        };
        RiskReport {
            mean_l1: mean,
            stderr: (var / n as f64).sqrt(),
            replications: n,
            per_rep: keep_per_rep.then_some(losses),
            violations: 0,
            extra: Vec::new(),
        }
    }
}

fn estimate_for(spec: &TruthSpec, estimator: &EstimatorKind, data: &Data) -> Result<StepFunction> {
    match estimator {
        EstimatorKind::ShapeMap => Ok(fit(data, spec.model, spec.shape, None)?.estimate),
        EstimatorKind::KnownMode(m) => Ok(fit(data, spec.model, spec.shape, Some(*m))?.estimate),
        EstimatorKind::Histogram(pi) => {
            let g_hat = cumulative_estimate(data, spec.model)?;
            histogram_estimate(&g_hat, pi)
        }
        EstimatorKind::ConstantMle => match data {
            Data::Events(log) => StepFunction::constant(log.domain(), constant_rate_mle(log)),
            _ => Err(Error::usage("constant-rate MLE applies to event logs only")),
        },
    }
}

/// Mean and standard error of the L1 loss over independent replications.
/// The loss is normalized by the window length for failure-rate scenarios.
pub fn monte_carlo_risk(
    spec: &TruthSpec,
    estimator: &EstimatorKind,
    n_or_t: f64,
    reps: usize,
    seed: u64,
) -> Result<RiskReport> {
    if reps < 2 {
        return Err(Error::usage(
            "monte carlo risk needs at least 2 replications",
        ));
    }
    let norm = if spec.model == Model::Nhpp {
        spec.horizon().length()
    } else {
        1.0
    };
    let mut losses = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = replication_rng(seed, rep);
        let data = generate_with(spec, n_or_t, &mut rng)?;
        let est = estimate_for(spec, estimator, &data)?;
        losses.push(l1_distance(&est, &spec.g, spec.horizon())? / norm);
    }
    let mut report = RiskReport::from_losses(losses, true);
    if spec.model == Model::Nhpp {
        // The normalized distance is the headline number; the plain L1 is
        // reported alongside so both conventions are on record.
        report
            .extra
            .push(("plain_mean_l1".into(), report.mean_l1 * norm));
    }
    Ok(report)
}

/// The named verification suites. Each checks one inequality or identity
/// of the estimator's analysis on randomized instances; the string tokens
/// are the stable CLI names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Per-realization risk bracket with the default constant 49.
    RiskBracket,
    /// Stability of the estimate in the valley point: pinning the true
    /// valley moves the estimate by at most 4 sup |Z|.
    ModeStability,
    /// Oscillation identity for nonincreasing step functions.
    Oscillation,
    /// Exact distance between regularizations at two valley points.
    RegularizationDistance,
    /// Marshall-type envelope contraction.
    Marshall,
    /// Histogram loss sandwiched between endpoint and sup fluctuations.
    HistogramSandwich,
    /// Constant-rate MLE bound and the factor-8 fluctuation-ratio bound.
    RateBounds,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::RiskBracket,
        Suite::ModeStability,
        Suite::Oscillation,
        Suite::RegularizationDistance,
        Suite::Marshall,
        Suite::HistogramSandwich,
        Suite::RateBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RiskBracket => "theorem1",
            Suite::ModeStability => "lemma2",
            Suite::Oscillation => "lemma4",
            Suite::RegularizationDistance => "lemma5",
            Suite::Marshall => "marshall",
            Suite::HistogramSandwich => "eq5_sandwich",
            Suite::RateBounds => "prop_bounds",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }
}

// ---- randomized instances ------------------------------------------------

fn random_cuts(rng: &mut ChaCha12Rng, dom: Interval, count: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..count)
        .map(|_| dom.a() + dom.length() * rng.gen_range(0.02..0.98))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-6 * dom.length());
    cuts
}

/// U-shaped piecewise-constant truth with 3-12 pieces, values in [lo, hi],
/// valley position uniform; returns the function and a valley point.
pub fn random_ushaped(
    rng: &mut ChaCha12Rng,
    dom: Interval,
    lo: f64,
    hi: f64,
) -> (StepFunction, f64) {
    let pieces = rng.gen_range(3..=12usize);
    let cuts = random_cuts(rng, dom, pieces - 1);
    let n = cuts.len() + 1;
    let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let valley = rng.gen_range(0..n);
    values[..=valley].sort_by(|x, y| y.total_cmp(x));
    values[valley..].sort_by(f64::total_cmp);
    let g = StepFunction::new(dom, cuts, values, false).unwrap();
    let (clo, chi, _) = g.cell(valley);
    (g, 0.5 * (clo + chi))
}

/// Unimodal counterpart of [`random_ushaped`].
pub fn random_unimodal(
    rng: &mut ChaCha12Rng,
    dom: Interval,
    lo: f64,
    hi: f64,
) -> (StepFunction, f64) {
    let pieces = rng.gen_range(3..=12usize);
    let cuts = random_cuts(rng, dom, pieces - 1);
    let n = cuts.len() + 1;
    let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let peak = rng.gen_range(0..n);
    values[..=peak].sort_by(f64::total_cmp);
    values[peak..].sort_by(|x, y| y.total_cmp(x));
    let g = StepFunction::new(dom, cuts, values, false).unwrap();
    let (clo, chi, _) = g.cell(peak);
    (g, 0.5 * (clo + chi))
}

/// Unimodal density on `dom` (normalized to unit mass).
pub fn random_unimodal_density(rng: &mut ChaCha12Rng, dom: Interval) -> StepFunction {
    let (g, _) = random_unimodal(rng, dom, 0.05, 10.0);
    let mass = g.integral();
    StepFunction::new(
        dom,
        g.breakpoints().to_vec(),
        g.values().iter().map(|v| v / mass).collect(),
        false,
    )
    .unwrap()
}

/// Arbitrary nondecreasing cadlag step function.
pub fn random_nondecreasing(rng: &mut ChaCha12Rng, dom: Interval, jumps: usize) -> StepFunction {
    let cuts = random_cuts(rng, dom, jumps);
    let mut acc = rng.gen_range(0.0..1.0);
    let mut values = vec![acc];
    for _ in 0..cuts.len() {
        acc += rng.gen_range(0.0..2.0);
        values.push(acc);
    }
    StepFunction::new(dom, cuts, values, true).unwrap()
}

/// Random partition of `dom` with 1 to `max_cells` cells.
pub fn random_partition(rng: &mut ChaCha12Rng, dom: Interval, max_cells: usize) -> Partition {
    let cells = rng.gen_range(1..=max_cells);
    let mut ends = vec![dom.a()];
    ends.extend(random_cuts(rng, dom, cells - 1));
    ends.push(dom.b());
    Partition::new(ends).unwrap()
}

/// Random scenario for the per-realization bracket checks, cycling through
/// the four data models.
fn random_scenario(rng: &mut ChaCha12Rng, which: usize) -> Result<(TruthSpec, f64)> {
    match which % 4 {
        0 => {
            let dom = Interval::new(0.0, 1.0)?;
            let g = random_unimodal_density(rng, dom);
            let n = rng.gen_range(50..=400) as f64;
            Ok((
                TruthSpec::new(Model::Density, ShapeKind::Unimodal, g, 0.0, None)?,
                n,
            ))
        }
        1 => {
            let dom = Interval::new(0.0, 1.0)?;
            let (g, _) = random_unimodal(rng, dom, 0.0, 10.0);
            let sigma = rng.gen_range(0.2..2.0);
            let n = rng.gen_range(50..=400) as f64;
            Ok((
                TruthSpec::new(Model::Regression, ShapeKind::Unimodal, g, sigma, None)?,
                n,
            ))
        }
        2 => {
            let c = rng.gen_range(1.0..3.0);
            let dom = Interval::new(0.0, c)?;
            let (g, _) = random_ushaped(rng, dom, 0.1, 4.0);
            let censor = if rng.gen_bool(0.5) {
                let cuts = vec![0.25 * c, 0.5 * c, 0.75 * c];
                let mut mass = 0.0;
                let mut values = vec![0.0];
                for _ in 0..3 {
                    mass += rng.gen_range(0.05..0.25);
                    values.push(mass);
                }
                Some(StepFunction::new(dom, cuts, values, true).unwrap())
            } else {
                None
            };
            let n = rng.gen_range(50..=300) as f64;
            Ok((
                TruthSpec::new(Model::Hazard, ShapeKind::UShaped, g, 0.0, censor)?,
                n,
            ))
        }
        _ => {
            let t = rng.gen_range(10.0..40.0);
            let dom = Interval::new(0.0, t)?;
            let (g, _) = random_ushaped(rng, dom, 0.2, 4.0);
            Ok((
                TruthSpec::new(Model::Nhpp, ShapeKind::UShaped, g, 0.0, None)?,
                t,
            ))
        }
    }
}

/// Runs a named suite of randomized inequality checks. Deterministic
/// (per-realization) inequalities count violations beyond their stated
/// tolerance; the Monte Carlo suite checks its expectation bounds at three
/// standard errors.
pub fn verify_inequalities(suite: Suite, trials: usize, seed: u64) -> Result<RiskReport> {
    verify_inequalities_with(suite, trials, seed, DEFAULT_BRACKET_CONSTANT)
}

/// [`verify_inequalities`] with an explicit bracket constant (only the
/// per-realization bracket suite uses it).
pub fn verify_inequalities_with(
    suite: Suite,
    trials: usize,
    seed: u64,
    constant: f64,
) -> Result<RiskReport> {
    if trials < 1 {
        return Err(Error::usage("verification needs at least one trial"));
    }
    match suite {
        Suite::Oscillation => verify_oscillation(trials, seed),
        Suite::RegularizationDistance => verify_regularization_distance(trials, seed),
        Suite::Marshall => verify_marshall(trials, seed),
        Suite::ModeStability => verify_mode_stability(trials, seed),
        Suite::RiskBracket => verify_risk_bracket(trials, seed, constant),
        Suite::HistogramSandwich => verify_histogram_sandwich(trials, seed),
        Suite::RateBounds => verify_rate_bounds(trials, seed),
    }
}

fn suite_report(values: Vec<f64>, violations: usize, extra: Vec<(String, f64)>) -> RiskReport {
    let mut report = RiskReport::from_losses(values, false);
    report.violations = violations;
    report.extra = extra;
    report
}

fn verify_oscillation(trials: usize, seed: u64) -> Result<RiskReport> {
    let mut gaps = Vec::with_capacity(trials);
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let len = rng.gen_range(0.5..4.0);
        let dom = Interval::new(0.0, len)?;
        let pieces = rng.gen_range(0..10);
        let cuts = random_cuts(&mut rng, dom, pieces);
        let mut acc = rng.gen_range(0.0..10.0);
        let mut values = vec![acc];
        for _ in 0..cuts.len() {
            acc -= rng.gen_range(0.0..3.0);
            values.push(acc);
        }
        let h = StepFunction::new(dom, cuts, values, false)?;
        let lo = dom.length() * rng.gen_range(0.0..0.45);
        let hi = dom.length() * rng.gen_range(0.55..1.0);
        let j = Interval::new(lo, hi)?;
        let (mean, osc) = interval_stats(&h, j)?;
        let big = cumulative(&h);
        let anchor = big.value_right(j.a());
        let chord = PiecewiseAffine::affine(j, anchor, anchor + mean * j.length())?;
        let rhs = 2.0 * signed_sup(&big, &chord, j)?;
        let gap = (osc - rhs).abs();
        if gap > 1e-10 {
            violations += 1;
        }
        gaps.push(gap);
    }
    Ok(suite_report(gaps, violations, vec![]))
}

fn verify_regularization_distance(trials: usize, seed: u64) -> Result<RiskReport> {
    let mut gaps = Vec::with_capacity(trials);
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let dom = Interval::new(0.0, rng.gen_range(0.5..3.0))?;
        let jumps = rng.gen_range(1..15);
        let f = random_nondecreasing(&mut rng, dom, jumps);
        let (mut fr, mut fs): (f64, f64) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        if fr > fs {
            std::mem::swap(&mut fr, &mut fs);
        }
        if fs - fr < 1e-6 {
            fs = (fr + 0.05).min(0.99);
        }
        let r = dom.a() + dom.length() * fr;
        let s = dom.a() + dom.length() * fs;
        let reg_r = regularize_at(&f, r, ShapeKind::UShaped)?;
        let reg_s = regularize_at(&f, s, ShapeKind::UShaped)?;
        let lhs = l1_distance(&slope(&reg_r.envelope), &slope(&reg_s.envelope), dom)?;
        let span = Interval::new(r, s)?;
        let rhs = 2.0
            * signed_sup(&f, &reg_r.envelope, span)?
                .max(signed_sup(&reg_s.envelope, &f, span)?)
                .max(0.0);
        let gap = (lhs - rhs).abs();
        if gap > 1e-9 {
            violations += 1;
        }
        gaps.push(gap);
    }
    Ok(suite_report(gaps, violations, vec![]))
}

fn verify_marshall(trials: usize, seed: u64) -> Result<RiskReport> {
    let mut slacks = Vec::with_capacity(trials);
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let dom = Interval::new(0.0, rng.gen_range(0.5..3.0))?;
        let (g, m) = random_ushaped(&mut rng, dom, 0.0, 10.0);
        let big_g = cumulative(&g);
        let jumps = rng.gen_range(1..15);
        let f = random_nondecreasing(&mut rng, dom, jumps);
        let env = regularize_at(&f, m, ShapeKind::UShaped)?.envelope;
        let lhs = sup_distance(&big_g, &env, dom)?;
        let rhs = sup_distance(&big_g, &f, dom)?;
        if lhs > rhs + 1e-12 {
            violations += 1;
        }
        slacks.push(rhs - lhs);
    }
    Ok(suite_report(slacks, violations, vec![]))
}

fn verify_mode_stability(trials: usize, seed: u64) -> Result<RiskReport> {
    let mut slacks = Vec::with_capacity(trials);
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let dom = Interval::new(0.0, rng.gen_range(0.5..3.0))?;
        let (g, m) = random_ushaped(&mut rng, dom, 0.0, 10.0);
        let big_g = cumulative(&g);
        let jumps = rng.gen_range(1..15);
        let f = random_nondecreasing(&mut rng, dom, jumps);
        let pinned = shape_map_at(&f, ShapeKind::UShaped, m)?;
        let searched = shape_map(&f, ShapeKind::UShaped)?;
        let lhs = l1_distance(&pinned.estimate, &searched.estimate, dom)?;
        let rhs = 4.0 * sup_distance(&f, &big_g, dom)?;
        if lhs > rhs + 1e-10 {
            violations += 1;
        }
        slacks.push(rhs - lhs);
    }
    Ok(suite_report(slacks, violations, vec![]))
}

fn verify_risk_bracket(trials: usize, seed: u64, constant: f64) -> Result<RiskReport> {
    let mut ratios = Vec::with_capacity(trials);
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let (spec, n_or_t) = random_scenario(&mut rng, trial)?;
        let data = generate_with(&spec, n_or_t, &mut rng)?;
        let g_hat = cumulative_estimate(&data, spec.model())?;
        let estimate = shape_map(&g_hat, spec.shape())?.estimate;
        let loss = l1_distance(&estimate, spec.truth(), spec.horizon())?;
        let pi = random_partition(&mut rng, spec.horizon(), 8);
        let bracket = risk_bracket(
            spec.truth(),
            &cumulative(spec.truth()),
            &g_hat,
            &pi,
            constant,
        )?;
        if loss > bracket.total + 1e-10 {
            violations += 1;
        }
        ratios.push(if bracket.total > 0.0 {
            loss / bracket.total
        } else {
            0.0
        });
    }
    Ok(suite_report(ratios, violations, vec![]))
}

fn verify_histogram_sandwich(trials: usize, seed: u64) -> Result<RiskReport> {
    let mut slacks = Vec::with_capacity(trials);
    let mut violations = 0usize;
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let (spec, n_or_t) = random_scenario(&mut rng, trial)?;
        let data = generate_with(&spec, n_or_t, &mut rng)?;
        let g_hat = cumulative_estimate(&data, spec.model())?;
        let pi = random_partition(&mut rng, spec.horizon(), 8);
        let hist = histogram_estimate(&g_hat, &pi)?;
        let loss = l1_distance(&hist, spec.truth(), spec.horizon())?;
        let stats = z_cell_stats(&g_hat, &cumulative(spec.truth()), &pi)?;
        let lower: f64 = stats
            .iter()
            .map(|s| s.abs_endpoint_increment)
            .collect::<KahanSum>()
            .total();
        let sups: f64 = stats
            .iter()
            .map(|s| s.sup_increment)
            .collect::<KahanSum>()
            .total();
        let upper =
            2.0 * best_step_distance(spec.truth(), &pi, DistanceMethod::ExactMedian)? + sups;
        if loss < lower - 1e-10 || loss > upper + 1e-10 {
            violations += 1;
        }
        slacks.push((loss - lower).min(upper - loss));
    }
    Ok(suite_report(slacks, violations, vec![]))
}

/// Ratio-of-means standard error by the delta method.
fn ratio_stderr(nums: &[f64], dens: &[f64]) -> f64 {
    let n = nums.len() as f64;
    let mn = nums.iter().copied().collect::<KahanSum>().total() / n;
    let md = dens.iter().copied().collect::<KahanSum>().total() / n;
    let mut var_n = KahanSum::new();
    let mut var_d = KahanSum::new();
    let mut cov = KahanSum::new();
    for (&x, &y) in nums.iter().zip(dens) {
        var_n.add((x - mn) * (x - mn));
        var_d.add((y - md) * (y - md));
        cov.add((x - mn) * (y - md));
    }
    let scale = 1.0 / (n - 1.0);
    let (vn, vd, cv) = (
        var_n.total() * scale,
        var_d.total() * scale,
        cov.total() * scale,
    );
    let ratio = mn / md;
    ((vn / (mn * mn) + vd / (md * md) - 2.0 * cv / (mn * md)) * ratio * ratio / n)
        .abs()
        .sqrt()
}

/// Paper-derivable expectation bounds on the constant-rate scenario: the
/// parametric MLE satisfies `E |N(T)/T - lambda| <= sqrt(lambda / T)`, and
/// the per-cell sup-vs-endpoint fluctuation ratio stays below 8.
fn verify_rate_bounds(trials: usize, seed: u64) -> Result<RiskReport> {
    let lambda = 5.0;
    let horizon = 100.0;
    let dom = Interval::new(0.0, horizon)?;
    let g = StepFunction::constant(dom, lambda)?;
    let spec = TruthSpec::new(Model::Nhpp, ShapeKind::UShaped, g, 0.0, None)?;
    let pi = Partition::uniform(dom, 4)?;
    let line = cumulative(spec.truth());

    let mut losses = Vec::with_capacity(trials);
    let mut rep_stats: Vec<Vec<ZCellStats>> = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = replication_rng(seed, trial);
        let data = generate_with(&spec, horizon, &mut rng)?;
        let log = match &data {
            Data::Events(log) => log,
            _ => unreachable!(),
        };
        losses.push((constant_rate_mle(log) - lambda).abs());
        let path = cumulative_estimate(&data, Model::Nhpp)?;
        rep_stats.push(z_cell_stats(&path, &line, &pi)?);
    }

    let mut report = RiskReport::from_losses(losses, false);
    let mle_bound = (lambda / horizon).sqrt();
    let mut violations = 0usize;
    if report.mean_l1 > mle_bound + 3.0 * report.stderr {
        violations += 1;
    }
    let worst_ratio = fluctuation_ratio(&rep_stats, &pi)?;
    let mut worst_limit = f64::INFINITY;
    let mut widest = f64::NEG_INFINITY;
    for k in 0..pi.cell_count() {
        let sups: Vec<f64> = rep_stats.iter().map(|r| r[k].sup_increment).collect();
        let ends: Vec<f64> = rep_stats
            .iter()
            .map(|r| r[k].abs_endpoint_increment)
            .collect();
        // Same accumulation as fluctuation_ratio, so the worst cell's
        // limit lines up with the reported ratio.
        let ratio = sups.iter().copied().collect::<KahanSum>().total()
            / ends.iter().copied().collect::<KahanSum>().total();
        let se = ratio_stderr(&sups, &ends);
        if ratio > 8.0 + 3.0 * se {
            violations += 1;
        }
        if ratio > widest {
            widest = ratio;
            worst_limit = 8.0 + 3.0 * se;
        }
    }
    report.violations = violations;
    report.extra = vec![
        ("mle_bound".into(), mle_bound),
        ("fluctuation_ratio".into(), worst_ratio),
        ("fluctuation_limit".into(), worst_limit),
    ];
    Ok(report)
}
