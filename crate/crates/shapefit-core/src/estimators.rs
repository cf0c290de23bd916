//! Cumulative-estimate step functions built from raw observations, and the
//! pipeline feeding them through the shape-respecting mapping.
//!
//! Each data container validates its invariants at construction; the
//! builders here are then total functions. Ties in censored data follow the
//! standard survival convention (deaths before censorings at equal times).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::regularize::{shape_map, shape_map_at, ShapeEstimate, ShapeKind};
use crate::stepfn::{Interval, StepFunction};

/// i.i.d. observations confined to a bounded estimation interval.
#[derive(Debug, Clone)]
pub struct Sample {
    values: Vec<f64>,
    domain: Interval,
}

impl Sample {
    pub fn new(values: Vec<f64>, domain: Interval) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample must not be empty"));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !v.is_finite() || !domain.contains(**v))
        {
            return Err(Error::domain(format!(
                "observation {v} outside estimation interval [{}, {}]",
                domain.a(),
                domain.b()
            )));
        }
        Ok(Sample { values, domain })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One right-censored observation: the observed time and whether it was an
/// event (`true`) or a censoring (`false`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredRecord {
    pub time: f64,
    pub event: bool,
}

/// Right-censored lifetimes with an estimation horizon `[0, c]`.
/// Observations beyond the horizon are kept: they still contribute to risk
/// sets before `c`.
#[derive(Debug, Clone)]
pub struct CensoredSample {
    records: Vec<CensoredRecord>,
    horizon: f64,
}

impl CensoredSample {
    pub fn new(mut records: Vec<CensoredRecord>, horizon: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::domain("censored sample must not be empty"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::domain("horizon must be positive and finite"));
        }
        if records
            .iter()
            .any(|r| !(r.time >= 0.0) || !r.time.is_finite())
        {
            return Err(Error::domain(
                "censored times must be nonnegative and finite",
            ));
        }
        records.sort_by(|x, y| x.time.total_cmp(&y.time));
        Ok(CensoredSample { records, horizon })
    }

    pub fn records(&self) -> &[CensoredRecord] {
        &self.records
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn domain(&self) -> Interval {
        Interval::new(0.0, self.horizon).expect("horizon validated positive")
    }

    /// Number of subjects still under observation at the horizon. The
    /// hazard pipeline's risk guarantee needs the observable window to
    /// reach the horizon, so callers may warn when this is zero.
    pub fn at_risk_at_horizon(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.time >= self.horizon)
            .count()
    }
}

/// Fixed-design regression observations on `[0, 1]`, sorted by abscissa.
#[derive(Debug, Clone)]
pub struct RegressionData {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl RegressionData {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("regression data must not be empty"));
        }
        if pairs
            .iter()
            .any(|(x, y)| !x.is_finite() || !y.is_finite() || !(0.0..=1.0).contains(x))
        {
            return Err(Error::domain(
                "design points must be finite and inside [0, 1]",
            ));
        }
        let mut pairs = pairs;
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (xs, ys) = pairs.into_iter().unzip();
        Ok(RegressionData { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    /// Largest deviation of the sorted design from the uniform grid `i/n`;
    /// a diagnostic for the approximately-uniform-design assumption.
    pub fn uniformity_gap(&self) -> f64 {
        let n = self.xs.len() as f64;
        self.xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - (i + 1) as f64 / n).abs())
            .fold(0.0, f64::max)
    }
}

/// Event times of a single counting-process path observed on `[0, T]`.
#[derive(Debug, Clone)]
pub struct EventLog {
    times: Vec<f64>,
    horizon: f64,
}

impl EventLog {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::domain("horizon must be positive and finite"));
        }
        if times
            .iter()
            .any(|t| !(*t > 0.0) || !t.is_finite() || *t > horizon)
        {
            return Err(Error::domain(
                "event times must be positive, finite, and at most the horizon",
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("event times must be strictly increasing"));
        }
        Ok(EventLog { times, horizon })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn count(&self) -> usize {
        self.times.len()
    }

    pub fn domain(&self) -> Interval {
        Interval::new(0.0, self.horizon).expect("horizon validated positive")
    }
}

/// The four estimation pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Density,
    Regression,
    Hazard,
    Nhpp,
}

impl Model {
    /// Default shape constraint per pipeline: unimodal for density and
    /// regression, U-shaped for hazard and failure rates.
    pub fn default_shape(self) -> ShapeKind {
        match self {
            Model::Density | Model::Regression => ShapeKind::Unimodal,
            Model::Hazard | Model::Nhpp => ShapeKind::UShaped,
        }
    }
}

/// Raw observations for any of the four pipelines.
#[derive(Debug, Clone)]
pub enum Data {
    Sample(Sample),
    Censored(CensoredSample),
    Regression(RegressionData),
    Events(EventLog),
}

impl Data {
    pub fn domain(&self) -> Interval {
        match self {
            Data::Sample(s) => s.domain(),
            Data::Censored(c) => c.domain(),
            Data::Regression(r) => r.domain(),
            Data::Events(e) => e.domain(),
        }
    }
}

/// Empirical distribution function: nondecreasing cadlag step from 0 with a
/// jump of (multiplicity / n) at each distinct observation.
pub fn ecdf(sample: &Sample) -> StepFunction {
    let n = sample.len();
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut seen = 0usize;
    let mut i = 0usize;
    while i < n {
        let t = sorted[i];
        let mut j = i;
        while j < n && sorted[j] == t {
            j += 1;
        }
        seen += j - i;
        points.push((t, seen as f64 / n as f64));
        i = j;
    }
    StepFunction::from_values_at(sample.domain(), 0.0, &points, true)
        .expect("sorted distinct observations form a valid step function")
}

/// Cumulative regression process: jump `y_i / n` at each design point. Not
/// nondecreasing in general.
pub fn cumulative_regression(data: &RegressionData) -> StepFunction {
    let n = data.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut acc = 0.0f64;
    let mut i = 0usize;
    while i < data.len() {
        let x = data.xs()[i];
        let mut j = i;
        while j < data.len() && data.xs()[j] == x {
            acc += data.ys()[j] / n;
            j += 1;
        }
        points.push((x, acc));
        i = j;
    }
    StepFunction::from_values_at(data.domain(), 0.0, &points, false)
        .expect("sorted design points form a valid step function")
}

/// Per-distinct-time counts used by the survival estimators:
/// `(time, deaths, at_risk)` for every distinct observed time.
fn death_table(cs: &CensoredSample) -> Vec<(f64, usize, usize)> {
    let records = cs.records();
    let n = records.len();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < n {
        let t = records[i].time;
        let mut deaths = 0usize;
        let mut j = i;
        while j < n && records[j].time == t {
            if records[j].event {
                deaths += 1;
            }
            j += 1;
        }
        // Records are sorted, so everyone from index i on is still at risk.
        out.push((t, deaths, n - i));
        i = j;
    }
    out
}

/// Kaplan-Meier product-limit estimate of the lifetime distribution
/// function on `[0, horizon]`.
pub fn kaplan_meier(cs: &CensoredSample) -> StepFunction {
    let mut survival = 1.0f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (t, deaths, at_risk) in death_table(cs) {
        if deaths > 0 && t <= cs.horizon() {
            survival *= 1.0 - deaths as f64 / at_risk as f64;
            points.push((t, 1.0 - survival));
        }
    }
    StepFunction::from_values_at(cs.domain(), 0.0, &points, true)
        .expect("product-limit values are nondecreasing")
}

/// Nelson-Aalen cumulative-hazard estimate on `[0, horizon]`: increment
/// `deaths / at_risk` at each uncensored time, which coincides with the
/// integral of `dF_hat / (1 - F_hat^-)` built from the product-limit
/// estimator. Increments at empty risk sets cannot occur for observed times
/// and are skipped defensively.
pub fn nelson_aalen(cs: &CensoredSample) -> StepFunction {
    let mut acc = 0.0f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (t, deaths, at_risk) in death_table(cs) {
        if deaths > 0 && t <= cs.horizon() && at_risk > 0 {
            acc += deaths as f64 / at_risk as f64;
            points.push((t, acc));
        }
    }
    StepFunction::from_values_at(cs.domain(), 0.0, &points, true)
        .expect("cumulative hazard increments are nonnegative")
}

/// Counting path `N(t)` of an event log: unit jumps on `[0, T]`.
pub fn nhpp_counting(log: &EventLog) -> StepFunction {
    let points: Vec<(f64, f64)> = log
        .times()
        .iter()
        .enumerate()
        .map(|(k, &t)| (t, (k + 1) as f64))
        .collect();
    StepFunction::from_values_at(log.domain(), 0.0, &points, true)
        .expect("strictly increasing unit jumps form a valid counting path")
}

/// Parametric maximum-likelihood estimate of a constant failure rate.
pub fn constant_rate_mle(log: &EventLog) -> f64 {
    log.count() as f64 / log.horizon()
}

/// Builds the cumulative-estimate step function for a model, checking that
/// the data container matches.
pub fn cumulative_estimate(data: &Data, model: Model) -> Result<StepFunction> {
    match (data, model) {
        (Data::Sample(s), Model::Density) => Ok(ecdf(s)),
        (Data::Regression(r), Model::Regression) => Ok(cumulative_regression(r)),
        (Data::Censored(c), Model::Hazard) => Ok(nelson_aalen(c)),
        (Data::Events(e), Model::Nhpp) => Ok(nhpp_counting(e)),
        (data, model) => Err(Error::usage(format!(
            "model {model:?} does not accept {} data",
            match data {
                Data::Sample(_) => "sample",
                Data::Censored(_) => "censored",
                Data::Regression(_) => "regression",
                Data::Events(_) => "event-log",
            }
        ))),
    }
}

/// Full pipeline: cumulative estimate, then the shape-respecting mapping
/// (with a fixed valley/mode when one is supplied).
pub fn fit(
    data: &Data,
    model: Model,
    shape: ShapeKind,
    mode: Option<f64>,
) -> Result<ShapeEstimate> {
    let g_hat = cumulative_estimate(data, model)?;
    match mode {
        Some(m) => shape_map_at(&g_hat, shape, m),
        None => shape_map(&g_hat, shape),
    }
}
