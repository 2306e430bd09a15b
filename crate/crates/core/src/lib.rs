//! Partial-transport Lp distances between discrete multi-channel signals.
//!
//! A signal `(f, mu)` is a set of unit-mass samples with positions `x_i` and
//! channel values `f_i`. The transport-Lp distance (TLP) lifts each sample
//! to `[x beta^(-1/p); f(x)]` and solves optimal transport between the
//! lifted clouds. The partial variant (PTLP) lets samples go unmatched at a
//! cost `lambda` each, so signals that only partly correspond can still be
//! compared. Sliced variants average exact 1D solutions over random
//! projections.
//!
//! | Function | Problem | Cost |
//! |----------|---------|------|
//! | [`tlp`] | balanced transport on lifted samples | O(N^3) |
//! | [`ptlp`] | partial transport on lifted samples | O(min(M,N)^2 max(M,N)) |
//! | [`stlp`] | sliced balanced transport | O(L N (d + k + log N)) |
//! | [`sptlp`] | sliced partial transport | O(L (M N + (M + N)(d + k))) |
//! | [`dtw`] | dynamic time warping baseline | O(M N) |
//!
//! ```
//! use ptlp::{ptlp, DiscreteSignal, GroundCostParams};
//!
//! let a = DiscreteSignal::from_series(&[0.0, 1.0, 0.0, 0.0]).unwrap();
//! let b = DiscreteSignal::from_series(&[0.0, 0.0, 1.0, 0.0]).unwrap();
//! let params = GroundCostParams::with_beta(2.0, 1.0, 0.5).unwrap();
//! let d = ptlp(&a, &b, &params).unwrap();
//! assert!(d.root_value > 0.0);
//! assert!(d.plan.is_one_to_one(4, 4));
//! ```

pub mod baselines;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod signal;
pub mod sliced;
pub mod solvers;

pub use baselines::{dtw, dtw_with, lp_distance};
pub use error::{Error, Result};
pub use metrics::{
    cost_matrix, ptlp, ptlp_beta_infinity, ptlp_beta_zero, ptlp_beta_zero_with_tolerance, tlp,
    MetricResult,
};
pub use signal::{
    ground_cost, lift, Beta, DiscreteSignal, GroundCostParams, Matched, SamplePoint, TransportPlan,
};
pub use sliced::{
    opt_1d, ot_1d, sample_slices, slice_lambda_schedule, sptlp, sptlp_estimate, stlp,
    stlp_estimate, SliceSet, SlicedEstimate,
};
pub use solvers::{brute_force_opt, solve_opt, solve_ot, CostMatrix};
