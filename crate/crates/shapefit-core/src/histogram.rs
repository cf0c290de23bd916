//! Variable-binwidth histogram comparator, L2 projections onto a partition,
//! the exact L1 distance to partition-based step functions, and the
//! per-realization risk bracket.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::stepfn::{
    interval_stats, merged_grid, Interval, Partition, PiecewiseAffine, PiecewiseCurve, StepFunction,
};

/// Default constant of the risk bracket.
pub const DEFAULT_BRACKET_CONSTANT: f64 = 49.0;

/// Per-realization risk bracket: `4 d(g, H_pi) + C * sum of per-cell sup
/// fluctuations of Z`.
#[derive(Debug, Clone)]
pub struct RiskBracket {
    pub partition: Partition,
    /// `4 d(g, H_pi)` with the exact weighted-median distance.
    pub bias_term: f64,
    /// `C * sum_k sup_{t in I_k} |Z(t) - Z(t_{k-1})|`.
    pub fluctuation_term: f64,
    pub total: f64,
    pub constant: f64,
}

/// Histogram estimate on a partition: each cell carries the increment of
/// the cumulative estimate over the cell divided by the cell length.
pub fn histogram_estimate(
    g_hat: &(impl PiecewiseCurve + ?Sized),
    pi: &Partition,
) -> Result<StepFunction> {
    let domain = g_hat.domain();
    if !pi.spans(domain) {
        return Err(Error::domain(
            "partition does not span the estimate's domain",
        ));
    }
    let mut values = Vec::with_capacity(pi.cell_count());
    for k in 0..pi.cell_count() {
        let (lo, hi) = pi.cell(k);
        let lo_c = lo.max(domain.a());
        let hi_c = hi.min(domain.b());
        values.push((g_hat.value_right(hi_c) - g_hat.value_right(lo_c)) / (hi - lo));
    }
    let interior = pi.endpoints()[1..pi.endpoints().len() - 1].to_vec();
    StepFunction::new(domain, interior, values, false)
}

/// L2-orthogonal projection onto the step functions based on `pi`: the
/// cell-mean function.
pub fn projection(g: &StepFunction, pi: &Partition) -> Result<StepFunction> {
    let domain = g.domain();
    if !pi.spans(domain) {
        return Err(Error::domain(
            "partition does not span the function's domain",
        ));
    }
    let mut values = Vec::with_capacity(pi.cell_count());
    for k in 0..pi.cell_count() {
        let (lo, hi) = pi.cell(k);
        let cell = Interval::new(lo.max(domain.a()), hi.min(domain.b()))?;
        values.push(interval_stats(g, cell)?.0);
    }
    let interior = pi.endpoints()[1..pi.endpoints().len() - 1].to_vec();
    StepFunction::new(domain, interior, values, false)
}

/// How to measure the distance from `g` to the step functions on a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMethod {
    /// True infimum: the best constant per cell in L1 is a weighted median
    /// of the cell's piece values.
    ExactMedian,
    /// `|| p_pi g - g ||`; overestimates the infimum by at most a factor 2.
    ProjectionBound,
}

/// Pieces `(value, width)` of `g` restricted to a cell.
fn cell_pieces(g: &StepFunction, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let cell = match Interval::new(lo, hi) {
        Ok(c) => c,
        Err(_) => return Vec::new(),
    };
    let grid = merged_grid(g, g, cell);
    grid.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (g.value_right(w[0]), w[1] - w[0]))
        .collect()
}

fn weighted_median_distance(pieces: &mut [(f64, f64)]) -> f64 {
    if pieces.is_empty() {
        return 0.0;
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = pieces.iter().map(|p| p.1).collect::<KahanSum>().total();
    let mut cum = 0.0;
    let mut median = pieces[0].0;
    for &(v, w) in pieces.iter() {
        cum += w;
        if cum >= 0.5 * total {
            median = v;
            break;
        }
    }
    let mut acc = KahanSum::new();
    for &(v, w) in pieces.iter() {
        acc.add((v - median).abs() * w);
    }
    acc.total()
}

/// Distance from a piecewise-constant `g` to the set of step functions on
/// `pi`, by the exact per-cell weighted median or by the projection bound.
pub fn best_step_distance(g: &StepFunction, pi: &Partition, method: DistanceMethod) -> Result<f64> {
    let domain = g.domain();
    if !pi.spans(domain) {
        return Err(Error::domain(
            "partition does not span the function's domain",
        ));
    }
    match method {
        DistanceMethod::ExactMedian => {
            let mut acc = KahanSum::new();
            for k in 0..pi.cell_count() {
                let (lo, hi) = pi.cell(k);
                let mut pieces = cell_pieces(g, lo.max(domain.a()), hi.min(domain.b()));
                acc.add(weighted_median_distance(&mut pieces));
            }
            Ok(acc.total())
        }
        DistanceMethod::ProjectionBound => {
            let p = projection(g, pi)?;
            crate::stepfn::l1_distance(&p, g, domain)
        }
    }
}

/// Per-cell fluctuation statistics of `Z = G_hat - G` on a partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZCellStats {
    /// `sup_{t in [t_{k-1}, t_k]} |Z(t) - Z(t_{k-1})|`.
    pub sup_increment: f64,
    /// `|Z(t_k) - Z(t_{k-1})|`.
    pub abs_endpoint_increment: f64,
}

/// Exact per-cell sup and endpoint increments of `Z = G_hat - G`; `Z` is
/// affine between merged grid points, so the sup is attained at one-sided
/// limits of grid points inside the closed cell.
pub fn z_cell_stats(
    g_hat: &(impl PiecewiseCurve + ?Sized),
    g_cum: &(impl PiecewiseCurve + ?Sized),
    pi: &Partition,
) -> Result<Vec<ZCellStats>> {
    let domain = g_hat.domain();
    if !pi.spans(domain) || !pi.spans(g_cum.domain()) {
        return Err(Error::domain("partition does not span both domains"));
    }
    let z = |t: f64, left: bool| {
        if left {
            g_hat.value_left(t) - g_cum.value_left(t)
        } else {
            g_hat.value_right(t) - g_cum.value_right(t)
        }
    };
    let mut out = Vec::with_capacity(pi.cell_count());
    for k in 0..pi.cell_count() {
        let (lo, hi) = pi.cell(k);
        let cell = Interval::new(lo.max(domain.a()), hi.min(domain.b()))?;
        let z0 = z(cell.a(), false);
        let grid = merged_grid(g_hat, g_cum, cell);
        let mut sup = 0.0f64;
        for (i, &t) in grid.iter().enumerate() {
            sup = sup.max((z(t, false) - z0).abs());
            if i > 0 {
                sup = sup.max((z(t, true) - z0).abs());
            }
        }
        out.push(ZCellStats {
            sup_increment: sup,
            abs_endpoint_increment: (z(cell.b(), false) - z0).abs(),
        });
    }
    Ok(out)
}

/// Assembles the per-realization risk bracket for truth `g`, its cumulative
/// `g_cum`, a cumulative estimate `g_hat`, and a partition.
pub fn risk_bracket(
    g: &StepFunction,
    g_cum: &PiecewiseAffine,
    g_hat: &StepFunction,
    pi: &Partition,
    constant: f64,
) -> Result<RiskBracket> {
    if !(constant >= 1.0) {
        return Err(Error::domain("bracket constant must be at least 1"));
    }
    let bias_term = 4.0 * best_step_distance(g, pi, DistanceMethod::ExactMedian)?;
    let stats = z_cell_stats(g_hat, g_cum, pi)?;
    let fluct: KahanSum = stats.iter().map(|s| s.sup_increment).collect();
    let fluctuation_term = constant * fluct.total();
    Ok(RiskBracket {
        partition: pi.clone(),
        bias_term,
        fluctuation_term,
        total: bias_term + fluctuation_term,
        constant,
    })
}

/// Empirical constant for the sup-vs-endpoint fluctuation comparison: the
/// maximum over cells of (mean sup increment) / (mean endpoint increment)
/// across replications. Cells with no fluctuation at all count as 1.
pub fn fluctuation_ratio(reps: &[Vec<ZCellStats>], pi: &Partition) -> Result<f64> {
    if reps.len() < 2 {
        return Err(Error::usage(
            "the fluctuation ratio needs at least 2 replications",
        ));
    }
    let cells = pi.cell_count();
    if reps.iter().any(|r| r.len() != cells) {
        return Err(Error::usage(format!(
            "every replication must carry {cells} cell statistics"
        )));
    }
    let mut worst = 0.0f64;
    for k in 0..cells {
        let sup: KahanSum = reps.iter().map(|r| r[k].sup_increment).collect();
        let end: KahanSum = reps.iter().map(|r| r[k].abs_endpoint_increment).collect();
        let ratio = if end.total() > 0.0 {
            sup.total() / end.total()
        } else if sup.total() == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
    }
    Ok(worst)
}
