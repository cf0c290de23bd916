//! Shape-respecting nonparametric estimation on a bounded interval.
//!
//! The crate is built around exact geometry of cadlag step functions and
//! piecewise-affine envelopes: least concave majorants, greatest convex
//! minorants and the pool-adjacent-violators algorithm. On top of that it
//! provides U-shaped / unimodal regularizations with data-driven valley/mode
//! selection, the classical cumulative estimators they are applied to
//! (empirical distribution function, cumulative regression process,
//! Nelson-Aalen, counting paths of a nonhomogeneous Poisson process) and the
//! variable-binwidth histogram comparator with its risk bracket.
//!
//! The crate is `no_std` (with `alloc`); all values are immutable after
//! construction and every operation is a pure function.

#![cfg_attr(not(test), no_std)]
// Validation guards use `!(a < b)` so NaN fails closed; `a >= b` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod histogram;
pub mod numeric;
pub mod regularize;
pub mod stepfn;

pub use error::{Error, Result};

#[cfg(test)]
mod thread_safety {
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn all_values_are_shareable_across_threads() {
        assert_send_sync::<crate::stepfn::StepFunction>();
        assert_send_sync::<crate::stepfn::PiecewiseAffine>();
        assert_send_sync::<crate::stepfn::Partition>();
        assert_send_sync::<crate::regularize::ShapeEstimate>();
        assert_send_sync::<crate::estimators::Data>();
        assert_send_sync::<crate::histogram::RiskBracket>();
    }
}
