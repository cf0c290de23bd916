//! Exact representation and integral/sup geometry of cadlag step functions
//! and piecewise-affine functions on a bounded interval.
//!
//! `StepFunction` stores values on half-open cells `[t_{k-1}, t_k)` with the
//! final cell closed at the right endpoint; a breakpoint placed exactly at
//! the right endpoint represents a jump there. `PiecewiseAffine` is
//! continuous except for at most one interior jump (the unimodal
//! regularization can be discontinuous at its mode). All arithmetic is plain
//! binary floating point with explicit tolerances: breakpoints closer than
//! `1e-12 * (b - a)` are merged at construction and integral identities are
//! asserted at `1e-10`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Relative tolerance for treating two breakpoints as equal.
pub const BREAKPOINT_TOL: f64 = 1e-12;

/// Evaluation side: cadlag value or left-hand limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// A compact interval `[a, b]` with `a < b`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("interval endpoints must be finite"));
        }
        if !(a < b) {
            return Err(Error::domain(format!(
                "interval requires a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }

    /// True when `other` lies inside `self`.
    pub fn covers(&self, other: Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }
}

/// A finite interval partition `a = t_0 < ... < t_D = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    endpoints: Vec<f64>,
}

impl Partition {
    pub fn new(endpoints: Vec<f64>) -> Result<Self> {
        if endpoints.len() < 2 {
            return Err(Error::domain("partition needs at least two endpoints"));
        }
        if endpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("partition endpoints must be finite"));
        }
        if endpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(
                "partition endpoints must be strictly increasing",
            ));
        }
        Ok(Partition { endpoints })
    }

    /// Uniform partition of `span` into `cells` cells.
    pub fn uniform(span: Interval, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::domain("partition needs at least one cell"));
        }
        let mut endpoints = Vec::with_capacity(cells + 1);
        for k in 0..=cells {
            let frac = k as f64 / cells as f64;
            endpoints.push(span.a() + frac * span.length());
        }
        endpoints[cells] = span.b();
        Partition::new(endpoints)
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn cell_count(&self) -> usize {
        self.endpoints.len() - 1
    }

    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.endpoints[k], self.endpoints[k + 1])
    }

    pub fn span(&self) -> Interval {
        Interval {
            a: self.endpoints[0],
            b: *self.endpoints.last().unwrap(),
        }
    }

    /// Checks that the partition spans `domain` up to breakpoint tolerance.
    pub fn spans(&self, domain: Interval) -> bool {
        let tol = BREAKPOINT_TOL * domain.length();
        (self.endpoints[0] - domain.a()).abs() <= tol
            && (self.endpoints.last().unwrap() - domain.b()).abs() <= tol
    }
}

/// Common access surface for the two piecewise representations, enough to
/// evaluate, merge grids and build hulls generically.
pub trait PiecewiseCurve {
    fn domain(&self) -> Interval;

    /// Cadlag value at `t`; `t` is assumed to lie in the domain.
    fn value_right(&self, t: f64) -> f64;

    /// Left-hand limit at `t`; at the left endpoint this is the value itself.
    fn value_left(&self, t: f64) -> f64;

    /// Sorted locations where the description can change (breakpoints or
    /// knots). May include the domain endpoints.
    fn grid(&self) -> &[f64];

    /// Exact monotonicity check for membership in the nondecreasing cone.
    fn is_nondecreasing(&self) -> bool;

    /// Checked evaluation with one-sided semantics.
    fn eval(&self, t: f64, side: Side) -> Result<f64> {
        if !self.domain().contains(t) {
            return Err(Error::domain(format!(
                "evaluation point {t} outside domain [{}, {}]",
                self.domain().a(),
                self.domain().b()
            )));
        }
        Ok(match side {
            Side::Right => self.value_right(t),
            Side::Left => self.value_left(t),
        })
    }
}

/// Right-continuous step function on a bounded interval.
///
/// Breakpoints are strictly increasing and lie in `(a, b]`; `values` has one
/// more entry than `breakpoints` and holds the constant on each half-open
/// cell. The `nondecreasing` tag marks membership in the cone of
/// nondecreasing cadlag step functions and is verified at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    domain: Interval,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    nondecreasing: bool,
}

impl StepFunction {
    pub fn new(
        domain: Interval,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        nondecreasing: bool,
    ) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::domain(format!(
                "need one more value than breakpoints, got {} values for {} breakpoints",
                values.len(),
                breakpoints.len()
            )));
        }
        if values
            .iter()
            .chain(breakpoints.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Error::domain("step function data must be finite"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("breakpoints must be strictly increasing"));
        }

        let tol = BREAKPOINT_TOL * domain.length();
        let mut merged_t: Vec<f64> = Vec::with_capacity(breakpoints.len());
        let mut merged_v: Vec<f64> = Vec::with_capacity(values.len());
        merged_v.push(values[0]);
        for (i, &t) in breakpoints.iter().enumerate() {
            let v = values[i + 1];
            if t <= domain.a() + tol {
                // Zero-width initial cell: the jump happens at (or before) a.
                if t <= domain.a() && t != domain.a() {
                    return Err(Error::domain(format!("breakpoint {t} left of domain")));
                }
                *merged_v.last_mut().unwrap() = v;
                continue;
            }
            if t > domain.b() {
                return Err(Error::domain(format!(
                    "breakpoint {t} beyond right endpoint {}",
                    domain.b()
                )));
            }
            // Snap near-b breakpoints onto b so the final cell is exactly {b}.
            let t = if (domain.b() - t).abs() <= tol {
                domain.b()
            } else {
                t
            };
            match merged_t.last() {
                Some(&prev) if t - prev <= tol => {
                    // Collapse the sliver cell, keeping the later value.
                    *merged_v.last_mut().unwrap() = v;
                }
                _ => {
                    merged_t.push(t);
                    merged_v.push(v);
                }
            }
        }

        if nondecreasing && merged_v.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain(
                "values are not nondecreasing but the nondecreasing tag was requested",
            ));
        }

        Ok(StepFunction {
            domain,
            breakpoints: merged_t,
            values: merged_v,
            nondecreasing,
        })
    }

    pub fn constant(domain: Interval, value: f64) -> Result<Self> {
        StepFunction::new(domain, Vec::new(), vec![value], true)
    }

    /// Builds from post-jump values: `points` holds `(t, value from t on)`,
    /// sorted by `t`. Jumps at or before `a` fold into the initial value.
    pub fn from_values_at(
        domain: Interval,
        initial: f64,
        points: &[(f64, f64)],
        nondecreasing: bool,
    ) -> Result<Self> {
        let mut breakpoints = Vec::with_capacity(points.len());
        let mut values = Vec::with_capacity(points.len() + 1);
        values.push(initial);
        for &(t, v) in points {
            breakpoints.push(t);
            values.push(v);
        }
        StepFunction::new(domain, breakpoints, values, nondecreasing)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nondecreasing_tag(&self) -> bool {
        self.nondecreasing
    }

    /// Number of constant cells (breakpoints + 1).
    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// Cell `k` as `(lo, hi, value)`; the last cell ends at `b`.
    pub fn cell(&self, k: usize) -> (f64, f64, f64) {
        let lo = if k == 0 {
            self.domain.a()
        } else {
            self.breakpoints[k - 1]
        };
        let hi = if k == self.breakpoints.len() {
            self.domain.b()
        } else {
            self.breakpoints[k]
        };
        (lo, hi, self.values[k])
    }

    /// Exact integral over the whole domain.
    pub fn integral(&self) -> f64 {
        let mut acc = KahanSum::new();
        for k in 0..self.cell_count() {
            let (lo, hi, v) = self.cell(k);
            acc.add(v * (hi - lo));
        }
        acc.total()
    }

    /// Rescales time by `lambda > 0`: breakpoints scale by `lambda`,
    /// values by `1/lambda` (density-style equivariance).
    pub fn scale_time(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::domain("time scale must be positive"));
        }
        StepFunction::new(
            Interval::new(self.domain.a() * lambda, self.domain.b() * lambda)?,
            self.breakpoints.iter().map(|t| t * lambda).collect(),
            self.values.iter().map(|v| v / lambda).collect(),
            self.nondecreasing,
        )
    }
}

impl PiecewiseCurve for StepFunction {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn value_right(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&x| x <= t);
        self.values[idx]
    }

    fn value_left(&self, t: f64) -> f64 {
        if t <= self.domain.a() {
            return self.values[0];
        }
        let idx = self.breakpoints.partition_point(|&x| x < t);
        self.values[idx]
    }

    fn grid(&self) -> &[f64] {
        &self.breakpoints
    }

    fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Interior jump of a piecewise-affine function (unimodal regularizations
/// are discontinuous at the mode whenever the input jumps there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub at: f64,
    pub left_value: f64,
}

/// Piecewise-affine function on a bounded interval, continuous except for an
/// optional single interior jump. Knots run from `a` to `b`; `values[i]` is
/// the value at `knots[i]` taken from the right (cadlag).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    domain: Interval,
    knots: Vec<f64>,
    values: Vec<f64>,
    jump: Option<Jump>,
}

impl PiecewiseAffine {
    pub fn new(
        domain: Interval,
        knots: Vec<f64>,
        values: Vec<f64>,
        jump: Option<Jump>,
    ) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::domain(
                "need matching knots/values with at least two knots",
            ));
        }
        if knots.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::domain("piecewise-affine data must be finite"));
        }
        if knots[0] != domain.a() || *knots.last().unwrap() != domain.b() {
            return Err(Error::domain("knots must start at a and end at b"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("knots must be strictly increasing"));
        }
        if let Some(j) = jump {
            let interior = &knots[1..knots.len() - 1];
            if !interior.contains(&j.at) {
                return Err(Error::domain("jump must sit on an interior knot"));
            }
            if !j.left_value.is_finite() {
                return Err(Error::domain("jump value must be finite"));
            }
        }
        Ok(PiecewiseAffine {
            domain,
            knots,
            values,
            jump,
        })
    }

    /// The affine function through `(a, va)` and `(b, vb)`.
    pub fn affine(domain: Interval, va: f64, vb: f64) -> Result<Self> {
        PiecewiseAffine::new(domain, vec![domain.a(), domain.b()], vec![va, vb], None)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    pub fn jump(&self) -> Option<Jump> {
        self.jump
    }

    /// Value at the right end of segment `i` approached from inside the
    /// segment (differs from `values[i + 1]` only across the jump).
    fn segment_end_value(&self, i: usize) -> f64 {
        let hi = self.knots[i + 1];
        match self.jump {
            Some(j) if j.at == hi => j.left_value,
            _ => self.values[i + 1],
        }
    }

    /// Slope of segment `i`.
    pub fn segment_slope(&self, i: usize) -> f64 {
        let run = self.knots[i + 1] - self.knots[i];
        (self.segment_end_value(i) - self.values[i]) / run
    }
}

impl PiecewiseCurve for PiecewiseAffine {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn value_right(&self, t: f64) -> f64 {
        let n = self.knots.len();
        let pos = self.knots.partition_point(|&x| x <= t);
        if pos == 0 {
            return self.values[0];
        }
        if pos < n && self.knots[pos - 1] == t {
            return self.values[pos - 1];
        }
        if pos == n {
            return self.values[n - 1];
        }
        let i = pos - 1;
        let frac = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
        let end = self.segment_end_value(i);
        self.values[i] + frac * (end - self.values[i])
    }

    fn value_left(&self, t: f64) -> f64 {
        if t <= self.domain.a() {
            return self.values[0];
        }
        let n = self.knots.len();
        // Segment whose closure contains t from the left: knots[i] < t <= knots[i+1].
        let pos = self.knots.partition_point(|&x| x < t);
        let i = pos.saturating_sub(1).min(n - 2);
        if t == self.knots[i + 1] {
            return self.segment_end_value(i);
        }
        let frac = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
        let end = self.segment_end_value(i);
        self.values[i] + frac * (end - self.values[i])
    }

    fn grid(&self) -> &[f64] {
        &self.knots
    }

    fn is_nondecreasing(&self) -> bool {
        let segments_ok =
            (0..self.knots.len() - 1).all(|i| self.segment_end_value(i) >= self.values[i]);
        let jump_ok = match self.jump {
            Some(j) => j.left_value <= self.value_right(j.at),
            None => true,
        };
        segments_ok && jump_ok
    }
}

/// Merged evaluation grid of both curves restricted to `j`, including both
/// endpoints of `j`. Input grids are sorted, so this is a linear merge.
pub fn merged_grid(
    f: &(impl PiecewiseCurve + ?Sized),
    g: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
) -> Vec<f64> {
    let (fa, fb) = (f.grid(), g.grid());
    let mut out = Vec::with_capacity(fa.len() + fb.len() + 2);
    out.push(j.a());
    let (mut i, mut k) = (0usize, 0usize);
    let inside = |t: f64| t > j.a() && t < j.b();
    while i < fa.len() || k < fb.len() {
        let t = match (fa.get(i), fb.get(k)) {
            (Some(&x), Some(&y)) if x <= y => {
                i += 1;
                if x == y {
                    k += 1;
                }
                x
            }
            (Some(_), Some(&y)) => {
                k += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                k += 1;
                y
            }
            (None, None) => break,
        };
        if inside(t) && *out.last().unwrap() != t {
            out.push(t);
        }
    }
    out.push(j.b());
    out
}

fn check_covers(
    f: &(impl PiecewiseCurve + ?Sized),
    g: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
) -> Result<()> {
    if !f.domain().covers(j) || !g.domain().covers(j) {
        return Err(Error::domain(format!(
            "interval [{}, {}] not covered by both function domains",
            j.a(),
            j.b()
        )));
    }
    Ok(())
}

/// Exact integral of `|d0 -> d1|` (affine) over a cell of width `w`.
fn cell_abs_integral(d0: f64, d1: f64, w: f64) -> f64 {
    if d0 == 0.0 && d1 == 0.0 {
        0.0
    } else if d0 * d1 >= 0.0 {
        0.5 * (d0.abs() + d1.abs()) * w
    } else {
        // Sign change: split at the root of the affine difference.
        0.5 * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs()) * w
    }
}

/// `∫_J |f - g|`, computed exactly on the merged breakpoint/knot grid.
pub fn l1_distance(
    f: &(impl PiecewiseCurve + ?Sized),
    g: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
) -> Result<f64> {
    check_covers(f, g, j)?;
    let grid = merged_grid(f, g, j);
    let mut acc = KahanSum::new();
    for w in grid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let d0 = f.value_right(lo) - g.value_right(lo);
        let d1 = f.value_left(hi) - g.value_left(hi);
        acc.add(cell_abs_integral(d0, d1, hi - lo));
    }
    Ok(acc.total())
}

/// `sup_J |f - g|`, exact: the difference is affine between merged grid
/// points, so extrema occur at one-sided limits of the grid points.
pub fn sup_distance(
    f: &(impl PiecewiseCurve + ?Sized),
    g: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
) -> Result<f64> {
    check_covers(f, g, j)?;
    let grid = merged_grid(f, g, j);
    let mut best = 0.0f64;
    for (i, &t) in grid.iter().enumerate() {
        let right = (f.value_right(t) - g.value_right(t)).abs();
        best = best.max(right);
        if i > 0 {
            // Left limits at j.a belong to history outside J.
            let left = (f.value_left(t) - g.value_left(t)).abs();
            best = best.max(left);
        }
    }
    Ok(best)
}

/// Signed supremum `sup_J (f - g)`; same grid logic as [`sup_distance`].
pub fn signed_sup(
    f: &(impl PiecewiseCurve + ?Sized),
    g: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
) -> Result<f64> {
    check_covers(f, g, j)?;
    let grid = merged_grid(f, g, j);
    let mut best = f64::NEG_INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        best = best.max(f.value_right(t) - g.value_right(t));
        if i > 0 {
            best = best.max(f.value_left(t) - g.value_left(t));
        }
    }
    Ok(best)
}

/// Mean and absolute oscillation of a step function over a subinterval:
/// returns `(mean, ∫_J |g - mean|)`, both exact.
pub fn interval_stats(g: &StepFunction, j: Interval) -> Result<(f64, f64)> {
    if !g.domain().covers(j) {
        return Err(Error::domain("interval not covered by the function domain"));
    }
    if !(j.length() > 0.0) {
        return Err(Error::domain("degenerate interval"));
    }
    let grid = merged_grid(g, g, j);
    let mut mass = KahanSum::new();
    for w in grid.windows(2) {
        if w[1] > w[0] {
            mass.add(g.value_right(w[0]) * (w[1] - w[0]));
        }
    }
    let mean = mass.total() / j.length();
    let mut osc = KahanSum::new();
    for w in grid.windows(2) {
        if w[1] > w[0] {
            osc.add((g.value_right(w[0]) - mean).abs() * (w[1] - w[0]));
        }
    }
    Ok((mean, osc.total()))
}

/// Continuous piecewise-affine antiderivative of `f`, anchored at 0 at `a`.
/// A zero-width jump cell at `b` carries no mass and is dropped.
pub fn cumulative(f: &StepFunction) -> PiecewiseAffine {
    let domain = f.domain();
    let mut knots = Vec::with_capacity(f.cell_count() + 1);
    let mut values = Vec::with_capacity(f.cell_count() + 1);
    knots.push(domain.a());
    values.push(0.0);
    let mut acc = 0.0f64;
    for k in 0..f.cell_count() {
        let (lo, hi, v) = f.cell(k);
        if hi <= lo {
            continue;
        }
        acc += v * (hi - lo);
        knots.push(hi);
        values.push(acc);
    }
    if *knots.last().unwrap() != domain.b() {
        knots.push(domain.b());
        values.push(acc);
    }
    PiecewiseAffine::new(domain, knots, values, None)
        .expect("cumulative of a valid step function is well formed")
}
