//! Sliced TLP/PTLP: lifted signals are projected onto random directions
//! and compared with exact one-dimensional solvers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::check_compatible;
use crate::signal::{lift_flat, DiscreteSignal, GroundCostParams};

/// Default number of projections.
pub const DEFAULT_SLICES: usize = 50;

/// Relative floor applied to per-slice penalties, as a fraction of the
/// reference penalty.
pub const LAMBDA_FLOOR: f64 = 1e-6;

/// Random unit directions in the lifted space, with optional per-slice
/// mass penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSet {
    directions: Vec<f64>,
    dim: usize,
    lambdas: Option<Vec<f64>>,
    seed: u64,
}

impl SliceSet {
    /// Builds a slice set from explicit directions (normalized here).
    pub fn from_directions(directions: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let dim = directions.first().map_or(0, Vec::len);
        if directions.is_empty() || dim == 0 {
            return Err(Error::InvalidParameter(
                "need at least one direction of dimension >= 1".into(),
            ));
        }
        let mut flat = Vec::with_capacity(directions.len() * dim);
        for d in &directions {
            if d.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: d.len(),
                });
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidParameter("degenerate direction".into()));
            }
            flat.extend(d.iter().map(|v| v / norm));
        }
        Ok(Self {
            directions: flat,
            dim,
            lambdas: None,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn direction(&self, l: usize) -> &[f64] {
        &self.directions[l * self.dim..(l + 1) * self.dim]
    }

    pub fn lambdas(&self) -> Option<&[f64]> {
        self.lambdas.as_deref()
    }

    /// Same penalty on every slice.
    pub fn with_uniform_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        self.lambdas = Some(vec![lambda; self.len()]);
        Ok(self)
    }

    pub fn with_lambdas(mut self, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: lambdas.len(),
                right: self.len(),
                hint: "one penalty per slice",
            });
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidParameter(
                "slice penalties must be > 0".into(),
            ));
        }
        self.lambdas = Some(lambdas);
        Ok(self)
    }
}

/// `count` i.i.d. uniform directions on the unit sphere of `R^dim`,
/// obtained by normalizing standard Gaussian vectors. Deterministic in
/// `seed`; a larger `count` with the same seed extends the smaller set.
pub fn sample_slices(count: usize, dim: usize, seed: u64) -> Result<SliceSet> {
    if count == 0 {
        return Err(Error::InvalidParameter("need at least one slice".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter(
            "slice dimension must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut directions = Vec::with_capacity(count * dim);
    let mut buf = vec![0.0; dim];
    for _ in 0..count {
        loop {
            for b in buf.iter_mut() {
                *b = StandardNormal.sample(&mut rng);
            }
            let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                directions.extend(buf.iter().map(|v| v / norm));
                break;
            }
        }
    }
    Ok(SliceSet {
        directions,
        dim,
        lambdas: None,
        seed,
    })
}

fn check_sorted(u: &[f64]) -> Result<()> {
    if u.windows(2).all(|w| w[0] <= w[1]) {
        Ok(())
    } else {
        Err(Error::Unsorted)
    }
}

#[inline]
fn abs_pow(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d.abs()
    } else if p == 2.0 {
        d * d
    } else {
        d.abs().powf(p)
    }
}

/// Balanced 1D transport between sorted samples of equal size: the
/// monotone coupling `sum |u_i - v_i|^p`.
pub fn ot_1d(u: &[f64], v: &[f64], p: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
            hint: "balanced 1D transport needs equal sizes",
        });
    }
    check_sorted(u)?;
    check_sorted(v)?;
    Ok(u.iter().zip(v).map(|(a, b)| abs_pow(a - b, p)).sum())
}

/// Exact 1D partial transport between sorted samples, O(MN) time and
/// O(N) memory.
///
/// With sorted inputs and convex `|.|^p` some optimal plan is
/// non-crossing, so the alignment recursion
/// `dp[i][j] = min(dp[i-1][j] + l, dp[i][j-1] + l, dp[i-1][j-1] + min(|u_i - v_j|^p, 2l))`
/// is exact.
pub fn opt_1d(u: &[f64], v: &[f64], p: f64, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    check_sorted(u)?;
    check_sorted(v)?;
    Ok(if p == 1.0 {
        opt_1d_dp(u, v, lambda, |d| d.abs())
    } else if p == 2.0 {
        opt_1d_dp(u, v, lambda, |d| d * d)
    } else {
        opt_1d_dp(u, v, lambda, |d| d.abs().powf(p))
    })
}

/// [`opt_1d`] on unsorted input; the samples are sorted first.
pub fn opt_1d_unsorted(mut u: Vec<f64>, mut v: Vec<f64>, p: f64, lambda: f64) -> Result<f64> {
    u.sort_by(f64::total_cmp);
    v.sort_by(f64::total_cmp);
    opt_1d(&u, &v, p, lambda)
}

fn opt_1d_dp(u: &[f64], v: &[f64], lambda: f64, cost: impl Fn(f64) -> f64) -> f64 {
    let cap = 2.0 * lambda;
    let n = v.len();
    let mut prev: Vec<f64> = (0..=n).map(|j| j as f64 * lambda).collect();
    let mut cur = vec![0.0; n + 1];
    for (i, &ui) in u.iter().enumerate() {
        cur[0] = (i + 1) as f64 * lambda;
        for j in 1..=n {
            let matched = prev[j - 1] + cost(ui - v[j - 1]).min(cap);
            let skip = prev[j].min(cur[j - 1]) + lambda;
            cur[j] = matched.min(skip);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Monte-Carlo slice average with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicedEstimate {
    pub value: f64,
    pub std_error: f64,
    pub per_slice: Vec<f64>,
}

impl SlicedEstimate {
    fn from_values(per_slice: Vec<f64>) -> Self {
        let n = per_slice.len() as f64;
        // fixed summation order
        let mean = per_slice.iter().sum::<f64>() / n;
        let var = if per_slice.len() > 1 {
            per_slice.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error: (var / n).sqrt(),
            per_slice,
        }
    }
}

fn sorted_projection(lifted: &[f64], dim: usize, theta: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = lifted
        .chunks_exact(dim)
        .map(|pt| pt.iter().zip(theta).map(|(a, b)| a * b).sum())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn prepare(
    a: &DiscreteSignal,
    b: &DiscreteSignal,
    params: &GroundCostParams,
    slices: &SliceSet,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_compatible(a, b)?;
    if slices.dim() != a.lifted_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.lifted_dim(),
            actual: slices.dim(),
        });
    }
    Ok((lift_flat(a, params)?, lift_flat(b, params)?))
}

/// Sliced TLP with per-slice values and standard error.
pub fn stlp_estimate(
    a: &DiscreteSignal,
    b: &DiscreteSignal,
    params: &GroundCostParams,
    slices: &SliceSet,
) -> Result<SlicedEstimate> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
            hint: "sliced balanced transport needs signals with the same number of samples",
        });
    }
    let (la, lb) = prepare(a, b, params, slices)?;
    let dim = slices.dim();
    let p = params.p();
    let per_slice = (0..slices.len())
        .into_par_iter()
        .map(|l| {
            let theta = slices.direction(l);
            let u = sorted_projection(&la, dim, theta);
            let v = sorted_projection(&lb, dim, theta);
            u.iter().zip(&v).map(|(x, y)| abs_pow(x - y, p)).sum()
        })
        .collect();
    Ok(SlicedEstimate::from_values(per_slice))
}

/// Sliced TLP: mean over slices of 1D transport between the projected
/// lifted signals.
pub fn stlp(
    a: &DiscreteSignal,
    b: &DiscreteSignal,
    params: &GroundCostParams,
    slices: &SliceSet,
) -> Result<f64> {
    Ok(stlp_estimate(a, b, params, slices)?.value)
}

/// Sliced PTLP with per-slice values and standard error.
pub fn sptlp_estimate(
    a: &DiscreteSignal,
    b: &DiscreteSignal,
    params: &GroundCostParams,
    slices: &SliceSet,
) -> Result<SlicedEstimate> {
    let lambdas = slices.lambdas().ok_or_else(|| {
        Error::InvalidParameter("slice penalties are not set; schedule them first".into())
    })?;
    let (la, lb) = prepare(a, b, params, slices)?;
    let dim = slices.dim();
    let p = params.p();
    let per_slice = (0..slices.len())
        .into_par_iter()
        .map(|l| {
            let theta = slices.direction(l);
            let u = sorted_projection(&la, dim, theta);
            let v = sorted_projection(&lb, dim, theta);
            opt_1d(&u, &v, p, lambdas[l])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SlicedEstimate::from_values(per_slice))
}

/// Sliced PTLP: mean over slices of 1D partial transport with the
/// per-slice penalty.
pub fn sptlp(
    a: &DiscreteSignal,
    b: &DiscreteSignal,
    params: &GroundCostParams,
    slices: &SliceSet,
) -> Result<f64> {
    Ok(sptlp_estimate(a, b, params, slices)?.value)
}

/// Sets `lambda_l = <theta_l, theta0> * lambda0`, floored at
/// `LAMBDA_FLOOR * lambda0`. `theta0` lives in the lifted space (zeros on
/// the position block for a value-space reference direction).
pub fn slice_lambda_schedule(theta0: &[f64], lambda0: f64, slices: SliceSet) -> Result<SliceSet> {
    if !(lambda0.is_finite() && lambda0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference lambda must be > 0, got {lambda0}"
        )));
    }
    if theta0.len() != slices.dim() {
        return Err(Error::DimensionMismatch {
            expected: slices.dim(),
            actual: theta0.len(),
        });
    }
    let norm = theta0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "reference direction must have unit norm, got {norm}"
        )));
    }
    let floor = LAMBDA_FLOOR * lambda0;
    let lambdas = (0..slices.len())
        .map(|l| {
            let cos: f64 = slices
                .direction(l)
                .iter()
                .zip(theta0)
                .map(|(a, b)| a * b)
                .sum();
            (cos * lambda0).max(floor)
        })
        .collect();
    slices.with_lambdas(lambdas)
}
