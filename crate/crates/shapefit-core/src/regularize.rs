//! PAVA, least concave majorant / greatest convex minorant, U-shaped and
//! unimodal regularizations, data-driven valley/mode selection, and slope
//! extraction.
//!
//! Hull construction includes both one-sided values at every interior jump
//! and at the right end of the hull interval, while the left end contributes
//! only the restriction's own (cadlag) value. With that convention the
//! glued U-shaped envelope is continuous for nondecreasing inputs, the
//! unimodal envelope jumps at the mode exactly when the input does, and the
//! stability/oscillation identities exercised by the test suite hold on
//! discontinuous inputs.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stepfn::{sup_distance, Interval, Jump, PiecewiseAffine, PiecewiseCurve, StepFunction};

/// Tolerance for treating two values of the step profile `d_S` as tied.
const TIE_TOL: f64 = 1e-12;

/// Candidate-count threshold below which mode selection scans exhaustively
/// (preserving the exact leftmost-tie rule) instead of binary searching.
const EXHAUSTIVE_LIMIT: usize = 64;

/// Shape constraint for the regularized estimate. Monotone kinds are the
/// endpoint cases of the U-shaped mapping (valley pinned at `b` or `a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    UShaped,
    Unimodal,
    Nonincreasing,
    Nondecreasing,
}

impl ShapeKind {
    pub fn searches_mode(self) -> bool {
        matches!(self, ShapeKind::UShaped | ShapeKind::Unimodal)
    }
}

/// Monotonicity direction for [`pava`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

/// Weighted L2 projection onto the monotone cone by pooling adjacent
/// violators into their weighted means. Block-constant output of the same
/// length; the weighted sum is preserved.
pub fn pava(values: &[f64], weights: &[f64], direction: Direction) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::domain("pava needs at least one value"));
    }
    if weights.len() != values.len() {
        return Err(Error::domain("pava values/weights length mismatch"));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::domain("pava weights must be positive and finite"));
    }
    let sign = match direction {
        Direction::Nondecreasing => 1.0,
        Direction::Nonincreasing => -1.0,
    };
    // (weighted sum, weight, run length) per block.
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((sign * v * w, w, 1));
        while blocks.len() >= 2 {
            let (s2, w2, c2) = blocks[blocks.len() - 1];
            let (s1, w1, c1) = blocks[blocks.len() - 2];
            if s1 / w1 > s2 / w2 {
                blocks.pop();
                blocks.pop();
                blocks.push((s1 + s2, w1 + w2, c1 + c2));
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, w, c) in blocks {
        let mean = sign * (s / w);
        out.extend(core::iter::repeat_n(mean, c));
    }
    Ok(out)
}

/// Two-sided point set for hull construction over `j`. At the left end only
/// the restriction's value enters; interior jumps and the right end
/// contribute both one-sided values, collapsed per abscissa (max for the
/// upper hull, min for the lower).
fn hull_points(f: &(impl PiecewiseCurve + ?Sized), j: Interval, upper: bool) -> Vec<(f64, f64)> {
    let combine = |l: f64, r: f64| if upper { l.max(r) } else { l.min(r) };
    let mut pts = Vec::with_capacity(f.grid().len() + 2);
    pts.push((j.a(), f.value_right(j.a())));
    for &t in f.grid() {
        if t > j.a() && t < j.b() {
            pts.push((t, combine(f.value_left(t), f.value_right(t))));
        }
    }
    pts.push((j.b(), combine(f.value_left(j.b()), f.value_right(j.b()))));
    pts
}

fn cross(o: (f64, f64), p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
}

/// Monotone-chain hull over points sorted by strictly increasing abscissa.
fn chain_hull(pts: &[(f64, f64)], upper: bool) -> (Vec<f64>, Vec<f64>) {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let c = cross(hull[hull.len() - 2], hull[hull.len() - 1], p);
            let pop = if upper { c >= 0.0 } else { c <= 0.0 };
            if pop {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.into_iter().unzip()
}

fn hull_envelope(
    f: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
    upper: bool,
) -> Result<PiecewiseAffine> {
    if !f.domain().covers(j) {
        return Err(Error::domain(
            "hull interval not covered by the function domain",
        ));
    }
    let pts = hull_points(f, j, upper);
    let (knots, values) = chain_hull(&pts, upper);
    PiecewiseAffine::new(j, knots, values, None)
}

/// Least concave majorant of the restriction of `f` to `j`: the smallest
/// concave function dominating `f` there, touching it at every hull vertex.
pub fn concave_majorant(
    f: &(impl PiecewiseCurve + ?Sized),
    j: Interval,
) -> Result<PiecewiseAffine> {
    hull_envelope(f, j, true)
}

/// Greatest convex minorant of the restriction of `f` to `j`.
pub fn convex_minorant(f: &(impl PiecewiseCurve + ?Sized), j: Interval) -> Result<PiecewiseAffine> {
    hull_envelope(f, j, false)
}

/// A shape regularization at a fixed valley/mode, with its sup-distance to
/// the input split by side (the side sups drive the mode search: the left
/// one is nondecreasing in `m`, the right one nonincreasing).
#[derive(Debug, Clone)]
pub struct Regularization {
    pub envelope: PiecewiseAffine,
    /// `sup_I |F - envelope|`.
    pub sup_dist: f64,
    /// `sup_{[a, m]} |F - envelope|` (0 when `m = a`).
    pub left_sup: f64,
    /// `sup_{[m, b]} |F - envelope|` (0 when `m = b`).
    pub right_sup: f64,
}

fn glue(
    left: Option<PiecewiseAffine>,
    right: Option<PiecewiseAffine>,
    domain: Interval,
) -> Result<PiecewiseAffine> {
    match (left, right) {
        (Some(l), None) => Ok(l),
        (None, Some(r)) => Ok(r),
        (Some(l), Some(r)) => {
            let m = *l.knots().last().unwrap();
            let left_end = *l.knot_values().last().unwrap();
            let right_start = r.knot_values()[0];
            let continuous = left_end == right_start;
            // The glue point is redundant when the envelope is continuous
            // there and both sides arrive with the same slope.
            let ln = l.knots().len();
            let collinear = continuous && l.segment_slope(ln - 2) == r.segment_slope(0);
            let mut knots = l.knots()[..ln - 1].to_vec();
            let mut values = l.knot_values()[..ln - 1].to_vec();
            let skip = if collinear { 1 } else { 0 };
            knots.extend_from_slice(&r.knots()[skip..]);
            values.extend_from_slice(&r.knot_values()[skip..]);
            let jump = (!continuous).then_some(Jump {
                at: m,
                left_value: left_end,
            });
            PiecewiseAffine::new(domain, knots, values, jump)
        }
        (None, None) => Err(Error::domain("empty regularization")),
    }
}

/// U-shaped or unimodal regularization of `f` at `m`, together with the
/// sup-distance `d(m)` between `f` and the envelope.
///
/// U-shaped: least concave majorant on `[a, m]` glued to the greatest convex
/// minorant on `[m, b]` (continuous for nondecreasing `f`). Unimodal: the
/// symmetric construction, possibly discontinuous at `m` when `f` jumps
/// there. The monotone kinds pin `m` at the matching endpoint.
pub fn regularize_at(
    f: &(impl PiecewiseCurve + ?Sized),
    m: f64,
    shape: ShapeKind,
) -> Result<Regularization> {
    let domain = f.domain();
    let (m, left_upper) = match shape {
        ShapeKind::UShaped => (m, true),
        ShapeKind::Unimodal => (m, false),
        ShapeKind::Nonincreasing => (domain.b(), true),
        ShapeKind::Nondecreasing => (domain.a(), true),
    };
    if !domain.contains(m) {
        return Err(Error::domain(format!(
            "valley/mode {m} outside domain [{}, {}]",
            domain.a(),
            domain.b()
        )));
    }

    let left = if m > domain.a() {
        Some(hull_envelope(f, Interval::new(domain.a(), m)?, left_upper)?)
    } else {
        None
    };
    let right = if m < domain.b() {
        Some(hull_envelope(
            f,
            Interval::new(m, domain.b())?,
            !left_upper,
        )?)
    } else {
        None
    };
    let envelope = glue(left, right, domain)?;

    let left_sup = if m > domain.a() {
        sup_distance(f, &envelope, Interval::new(domain.a(), m)?)?
    } else {
        0.0
    };
    let right_sup = if m < domain.b() {
        sup_distance(f, &envelope, Interval::new(m, domain.b())?)?
    } else {
        0.0
    };
    Ok(Regularization {
        envelope,
        sup_dist: left_sup.max(right_sup),
        left_sup,
        right_sup,
    })
}

/// Outcome of the data-driven valley/mode search.
#[derive(Debug, Clone)]
pub struct ModeSelection {
    /// Midpoint of the minimizing interval (U-shaped) or the bisection
    /// limit (unimodal).
    pub mode: f64,
    /// `d(mode)`.
    pub min_value: f64,
    /// Closure of the region where the profile attains its minimum; a pair
    /// because it may degenerate to a single point.
    pub min_interval: (f64, f64),
    /// Evaluated `(m, d(m))` pairs, sorted by `m`.
    pub profile: Vec<(f64, f64)>,
}

struct Candidate {
    m: f64,
    lo: f64,
    hi: f64,
}

fn ushape_candidates(f: &(impl PiecewiseCurve + ?Sized)) -> Vec<Candidate> {
    let domain = f.domain();
    let mut edges = Vec::with_capacity(f.grid().len() + 2);
    edges.push(domain.a());
    for &t in f.grid() {
        if t > domain.a() && t < domain.b() {
            edges.push(t);
        }
    }
    edges.push(domain.b());

    let mut cands = Vec::with_capacity(edges.len() + 1);
    cands.push(Candidate {
        m: domain.a(),
        lo: domain.a(),
        hi: domain.a(),
    });
    for w in edges.windows(2) {
        cands.push(Candidate {
            m: 0.5 * (w[0] + w[1]),
            lo: w[0],
            hi: w[1],
        });
    }
    cands.push(Candidate {
        m: domain.b(),
        lo: domain.b(),
        hi: domain.b(),
    });
    cands
}

/// Selects the valley (U-shaped) or mode (unimodal) minimizing the
/// sup-distance profile `d`.
///
/// The profile is the max of a nondecreasing and a nonincreasing function of
/// `m` (the two side sups), hence quasi-convex. For the U-shaped case `d` is
/// a cadlag step function jumping only at discontinuities of `f`, so it is
/// evaluated per constancy cell (exhaustively for small inputs, by binary
/// search on the side comparison for large ones) and the mode is the
/// midpoint of the closure of the leftmost minimizing run. For the unimodal
/// case `d` is continuous and the side comparison is bisected to
/// `1e-9 * (b - a)` with a 200-iteration cap.
pub fn select_mode(f: &(impl PiecewiseCurve + ?Sized), shape: ShapeKind) -> Result<ModeSelection> {
    match shape {
        ShapeKind::UShaped => select_mode_ushaped(f, shape),
        ShapeKind::Unimodal => select_mode_unimodal(f),
        _ => Err(Error::usage(
            "mode search applies to u-shaped/unimodal only",
        )),
    }
}

fn select_mode_ushaped(
    f: &(impl PiecewiseCurve + ?Sized),
    shape: ShapeKind,
) -> Result<ModeSelection> {
    let cands = ushape_candidates(f);
    let n = cands.len();
    let mut evals: Vec<Option<Regularization>> = (0..n).map(|_| None).collect();

    // Borrow-friendly memoized evaluation.
    macro_rules! eval {
        ($i:expr) => {{
            let i: usize = $i;
            if evals[i].is_none() {
                evals[i] = Some(regularize_at(f, cands[i].m, shape)?);
            }
            evals[i].as_ref().unwrap()
        }};
    }

    let best = if n <= EXHAUSTIVE_LIMIT {
        for i in 0..n {
            let _ = eval!(i);
        }
        let vmin = evals
            .iter()
            .map(|e| e.as_ref().unwrap().sup_dist)
            .fold(f64::INFINITY, f64::min);
        (0..n)
            .find(|&i| evals[i].as_ref().unwrap().sup_dist <= vmin + TIE_TOL)
            .unwrap()
    } else {
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let e = eval!(mid);
            if e.left_sup >= e.right_sup {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (dlo, dhi) = (eval!(lo).sup_dist, eval!(hi).sup_dist);
        let mut best = if dlo <= dhi { lo } else { hi };
        // Walk to the leftmost candidate of the minimizing run.
        let vmin = evals[best].as_ref().unwrap().sup_dist;
        while best > 0 && eval!(best - 1).sup_dist <= vmin + TIE_TOL {
            best -= 1;
        }
        best
    };

    // Extend the run to the right; `best` is already its leftmost member.
    let vmin = evals[best].as_ref().unwrap().sup_dist;
    let mut end = best;
    while end + 1 < n && eval!(end + 1).sup_dist <= vmin + TIE_TOL {
        end += 1;
    }

    let min_interval = (cands[best].lo, cands[end].hi);
    let mode = 0.5 * (min_interval.0 + min_interval.1);
    let min_value = regularize_at(f, mode, shape)?.sup_dist;
    let mut profile: Vec<(f64, f64)> = evals
        .iter()
        .zip(&cands)
        .filter_map(|(e, c)| e.as_ref().map(|e| (c.m, e.sup_dist)))
        .collect();
    profile.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(ModeSelection {
        mode,
        min_value,
        min_interval,
        profile,
    })
}

fn select_mode_unimodal(f: &(impl PiecewiseCurve + ?Sized)) -> Result<ModeSelection> {
    let domain = f.domain();
    let tol = 1e-9 * domain.length();
    let (mut lo, mut hi) = (domain.a(), domain.b());
    let mut profile = Vec::new();
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let e = regularize_at(f, mid, ShapeKind::Unimodal)?;
        profile.push((mid, e.sup_dist));
        if e.left_sup >= e.right_sup {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mode = 0.5 * (lo + hi);
    let min_value = regularize_at(f, mode, ShapeKind::Unimodal)?.sup_dist;
    profile.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(ModeSelection {
        mode,
        min_value,
        min_interval: (lo, hi),
        profile,
    })
}

/// Right-continuous slope of a piecewise-affine envelope. The value at the
/// closed right endpoint is the final segment's slope; an interior jump of
/// the envelope contributes no slope mass.
pub fn slope(e: &PiecewiseAffine) -> StepFunction {
    let n = e.knots().len();
    let mut breakpoints = Vec::with_capacity(n - 2);
    let mut values = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        values.push(e.segment_slope(i));
        if i + 1 < n - 1 {
            breakpoints.push(e.knots()[i + 1]);
        }
    }
    let nondecreasing = values.windows(2).all(|w| w[0] <= w[1]);
    StepFunction::new(e.domain(), breakpoints, values, nondecreasing)
        .expect("slopes of a valid envelope form a valid step function")
}

/// A shape-respecting estimate: the right-continuous slope of a
/// regularization, together with the envelope and selected valley/mode.
#[derive(Debug, Clone)]
pub struct ShapeEstimate {
    pub estimate: StepFunction,
    pub shape: ShapeKind,
    pub mode: f64,
    pub envelope: PiecewiseAffine,
    /// Present when the mode was searched rather than supplied.
    pub selection: Option<ModeSelection>,
    /// Set when the input was not nondecreasing (regression-style inputs);
    /// the construction goes through unchanged but the statistical guarantee
    /// is conjectural.
    pub nonmonotone_input: bool,
}

/// Full shape-respecting mapping: searches the valley/mode (except for the
/// monotone kinds, which pin it at an endpoint) and returns the slope of the
/// regularization at the selected point.
pub fn shape_map(f: &(impl PiecewiseCurve + ?Sized), shape: ShapeKind) -> Result<ShapeEstimate> {
    match shape {
        ShapeKind::Nonincreasing => finish(f, shape, f.domain().b(), None),
        ShapeKind::Nondecreasing => finish(f, shape, f.domain().a(), None),
        _ => {
            let sel = select_mode(f, shape)?;
            let mode = sel.mode;
            finish(f, shape, mode, Some(sel))
        }
    }
}

/// Known-mode variant of [`shape_map`]: regularizes at the supplied point.
/// Monotone kinds ignore `m` and use their pinned endpoint.
pub fn shape_map_at(
    f: &(impl PiecewiseCurve + ?Sized),
    shape: ShapeKind,
    m: f64,
) -> Result<ShapeEstimate> {
    let m = match shape {
        ShapeKind::Nonincreasing => f.domain().b(),
        ShapeKind::Nondecreasing => f.domain().a(),
        _ => m,
    };
    finish(f, shape, m, None)
}

fn finish(
    f: &(impl PiecewiseCurve + ?Sized),
    shape: ShapeKind,
    mode: f64,
    selection: Option<ModeSelection>,
) -> Result<ShapeEstimate> {
    let reg = regularize_at(f, mode, shape)?;
    let estimate = slope(&reg.envelope);
    Ok(ShapeEstimate {
        estimate,
        shape,
        mode,
        envelope: reg.envelope,
        selection,
        nonmonotone_input: !f.is_nondecreasing(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::{cumulative, Side};
    use alloc::vec;

    fn interval(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn ecdf(points: &[f64], dom: Interval) -> StepFunction {
        let n = points.len() as f64;
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        let pts: Vec<(f64, f64)> = sorted
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, (i + 1) as f64 / n))
            .collect();
        StepFunction::from_values_at(dom, 0.0, &pts, true).unwrap()
    }

    #[test]
    fn pava_examples() {
        let w = [1.0, 1.0];
        assert_eq!(
            pava(&[3.0, 1.0], &w, Direction::Nonincreasing).unwrap(),
            vec![3.0, 1.0]
        );
        assert_eq!(
            pava(&[1.0, 3.0], &w, Direction::Nonincreasing).unwrap(),
            vec![2.0, 2.0]
        );
        assert_eq!(
            pava(&[1.0, 4.0, 2.0], &[1.0; 3], Direction::Nonincreasing).unwrap(),
            vec![2.5, 2.5, 2.0]
        );
        assert_eq!(
            pava(&[1.0, 3.0], &w, Direction::Nondecreasing).unwrap(),
            vec![1.0, 3.0]
        );
    }

    #[test]
    fn pava_rejects_bad_input() {
        assert!(pava(&[], &[], Direction::Nonincreasing).is_err());
        assert!(pava(&[1.0], &[0.0], Direction::Nonincreasing).is_err());
        assert!(pava(&[1.0], &[1.0, 2.0], Direction::Nonincreasing).is_err());
    }

    #[test]
    fn pava_preserves_weighted_sum() {
        let v = [2.0, 5.0, 1.0, 4.0, 0.5];
        let w = [1.0, 2.0, 0.5, 1.5, 3.0];
        let out = pava(&v, &w, Direction::Nonincreasing).unwrap();
        let before: f64 = v.iter().zip(&w).map(|(v, w)| v * w).sum();
        let after: f64 = out.iter().zip(&w).map(|(v, w)| v * w).sum();
        assert!((before - after).abs() < 1e-12);
        assert!(out.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn concave_majorant_of_single_jump_ecdf() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.5], dom);
        let env = concave_majorant(&f, dom).unwrap();
        assert_eq!(env.knots(), &[0.0, 0.5, 1.0]);
        assert_eq!(env.knot_values(), &[0.0, 1.0, 1.0]);
        // Idempotence on an already concave input.
        let again = concave_majorant(&env, dom).unwrap();
        assert_eq!(again.knots(), env.knots());
        assert_eq!(again.knot_values(), env.knot_values());
    }

    #[test]
    fn convex_minorant_touches_pre_jump_values() {
        let dom = interval(0.5, 1.0);
        let f = StepFunction::new(dom, vec![0.8], vec![0.5, 1.0], true).unwrap();
        let env = convex_minorant(&f, dom).unwrap();
        assert_eq!(env.knots(), &[0.5, 0.8, 1.0]);
        assert_eq!(env.knot_values(), &[0.5, 0.5, 1.0]);
        let sl = slope(&env);
        assert_eq!(sl.values()[0], 0.0);
        assert!((sl.values()[1] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn hulls_fix_affine_inputs() {
        let dom = interval(0.0, 2.0);
        let line = PiecewiseAffine::affine(dom, 1.0, 3.0).unwrap();
        let up = concave_majorant(&line, dom).unwrap();
        let down = convex_minorant(&line, dom).unwrap();
        assert_eq!(up.knot_values(), &[1.0, 3.0]);
        assert_eq!(down.knot_values(), &[1.0, 3.0]);
        let c = StepFunction::constant(dom, 2.0).unwrap();
        let env = convex_minorant(&c, dom).unwrap();
        assert_eq!(env.knot_values(), &[2.0, 2.0]);
    }

    #[test]
    fn regularize_two_jump_ecdf_at_half() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.2, 0.8], dom);
        let reg = regularize_at(&f, 0.5, ShapeKind::UShaped).unwrap();
        let est = slope(&reg.envelope);
        assert_eq!(est.breakpoints(), &[0.2, 0.8]);
        for (v, want) in est.values().iter().zip([2.5, 0.0, 2.5]) {
            assert!((v - want).abs() < 1e-12);
        }
        assert!((reg.sup_dist - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regularize_affine_is_fixed_point() {
        let dom = interval(0.0, 1.0);
        let line = PiecewiseAffine::affine(dom, 0.0, 1.0).unwrap();
        for m in [0.0, 0.3, 1.0] {
            let reg = regularize_at(&line, m, ShapeKind::UShaped).unwrap();
            assert!(reg.sup_dist <= 1e-15);
        }
    }

    #[test]
    fn regularize_at_endpoint_degenerates_to_single_hull() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.3, 0.6], dom);
        let at_a = regularize_at(&f, 0.0, ShapeKind::UShaped).unwrap();
        let pure_gcm = convex_minorant(&f, dom).unwrap();
        assert_eq!(at_a.envelope, pure_gcm);
        let at_b = regularize_at(&f, 1.0, ShapeKind::UShaped).unwrap();
        let pure_lcm = concave_majorant(&f, dom).unwrap();
        assert_eq!(at_b.envelope, pure_lcm);
        assert!(regularize_at(&f, 1.5, ShapeKind::UShaped).is_err());
    }

    #[test]
    fn unimodal_envelope_jumps_at_discontinuous_mode() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.5], dom);
        let reg = regularize_at(&f, 0.5, ShapeKind::Unimodal).unwrap();
        let j = reg.envelope.jump().expect("expected a jump at the mode");
        assert_eq!(j.at, 0.5);
        assert_eq!(j.left_value, 0.0);
        assert_eq!(reg.envelope.eval(0.5, Side::Right).unwrap(), 1.0);
        assert_eq!(reg.sup_dist, 0.0);
    }

    #[test]
    fn select_mode_symmetric_input_returns_center() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.2, 0.8], dom);
        let sel = select_mode(&f, ShapeKind::UShaped).unwrap();
        assert!((sel.mode - 0.5).abs() < 1e-12);
        assert!((sel.min_value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn select_mode_zero_error_when_slope_already_ushaped() {
        // Cumulative of a U-shaped step: d_S vanishes on the valley cell.
        let dom = interval(0.0, 3.0);
        let g = StepFunction::new(dom, vec![1.0, 2.0], vec![3.0, 0.5, 2.0], false).unwrap();
        let big_g = cumulative(&g);
        let sel = select_mode(&big_g, ShapeKind::UShaped).unwrap();
        assert!(sel.min_value <= 1e-12);
        assert!(sel.mode > 1.0 && sel.mode < 2.0);
        assert!(sel.min_interval.0 >= 1.0 - 1e-12 && sel.min_interval.1 <= 2.0 + 1e-12);
    }

    #[test]
    fn select_mode_constant_input() {
        let dom = interval(0.0, 2.0);
        let f = StepFunction::constant(dom, 1.0).unwrap();
        let sel = select_mode(&f, ShapeKind::UShaped).unwrap();
        assert_eq!(sel.mode, 1.0);
        assert_eq!(sel.min_value, 0.0);
        assert_eq!(sel.min_interval, (0.0, 2.0));
    }

    #[test]
    fn slope_examples() {
        let dom = interval(0.0, 1.0);
        let line = PiecewiseAffine::affine(dom, 0.0, 2.0).unwrap();
        let s = slope(&line);
        assert!(s.breakpoints().is_empty());
        assert_eq!(s.values(), &[2.0]);

        let env =
            PiecewiseAffine::new(dom, vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 1.0], None).unwrap();
        let s = slope(&env);
        assert_eq!(s.breakpoints(), &[0.5]);
        assert_eq!(s.values(), &[2.0, 0.0]);
    }

    #[test]
    fn slope_of_cumulative_round_trips() {
        let dom = interval(0.0, 2.0);
        let f = StepFunction::new(dom, vec![0.5, 1.25], vec![1.0, -0.5, 2.0], false).unwrap();
        let back = slope(&cumulative(&f));
        assert_eq!(back.breakpoints(), f.breakpoints());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_map_grenander_single_point() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.5], dom);
        let est = shape_map(&f, ShapeKind::Nonincreasing).unwrap();
        assert_eq!(est.estimate.breakpoints(), &[0.5]);
        assert_eq!(est.estimate.values(), &[2.0, 0.0]);
        assert_eq!(est.mode, 1.0);
        assert!(!est.nonmonotone_input);
    }

    #[test]
    fn shape_map_affine_input_gives_constant_slope() {
        let dom = interval(0.0, 1.0);
        let line = PiecewiseAffine::affine(dom, 0.0, 0.7).unwrap();
        for shape in [
            ShapeKind::UShaped,
            ShapeKind::Unimodal,
            ShapeKind::Nonincreasing,
            ShapeKind::Nondecreasing,
        ] {
            let est = shape_map(&line, shape).unwrap();
            let vals = est.estimate.values();
            assert!(
                vals.iter().all(|v| (v - 0.7).abs() < 1e-9),
                "shape {shape:?} gave {vals:?}"
            );
        }
    }

    #[test]
    fn shape_map_known_mode_matches_regularize_example() {
        let dom = interval(0.0, 1.0);
        let f = ecdf(&[0.2, 0.8], dom);
        let est = shape_map_at(&f, ShapeKind::UShaped, 0.5).unwrap();
        for (v, want) in est.estimate.values().iter().zip([2.5, 0.0, 2.5]) {
            assert!((v - want).abs() < 1e-12);
        }
        assert_eq!(est.mode, 0.5);
        assert!(est.selection.is_none());
    }

    #[test]
    fn shape_map_flags_nonmonotone_input() {
        let dom = interval(0.0, 1.0);
        let f = StepFunction::new(dom, vec![0.5], vec![0.5, 0.25], false).unwrap();
        let est = shape_map(&f, ShapeKind::Unimodal).unwrap();
        assert!(est.nonmonotone_input);
    }
}
