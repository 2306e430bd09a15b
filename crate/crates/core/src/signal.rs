//! Discrete multi-channel signals and the lifted ground cost.
//!
//! A signal is a set of unit-mass samples `(x_i, f_i)` with positions in
//! `R^d` and channel values in `R^k`. Comparing two signals means comparing
//! the point clouds obtained by lifting each sample onto the graph of the
//! signal, `[x * beta^(-1/p); f(x)]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples of a `k`-channel signal on `d`-dimensional positions.
///
/// Positions and values are stored row-major in flat buffers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSignal {
    positions: Vec<f64>,
    values: Vec<f64>,
    pos_dim: usize,
    val_dim: usize,
}

/// One sample of a signal: a position and the channel values there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint<'a> {
    pub position: &'a [f64],
    pub value: &'a [f64],
}

impl DiscreteSignal {
    /// Builds a signal from per-sample positions and values.
    pub fn new(positions: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::InvalidSignal(format!(
                "{} positions but {} values",
                positions.len(),
                values.len()
            )));
        }
        if positions.is_empty() {
            return Err(Error::InvalidSignal("signal has no samples".into()));
        }
        let pos_dim = positions[0].len();
        let val_dim = values[0].len();
        if positions.iter().any(|p| p.len() != pos_dim) {
            return Err(Error::InvalidSignal("ragged position dimensions".into()));
        }
        if values.iter().any(|v| v.len() != val_dim) {
            return Err(Error::InvalidSignal("ragged value dimensions".into()));
        }
        Self::from_flat(
            positions.into_iter().flatten().collect(),
            values.into_iter().flatten().collect(),
            pos_dim,
            val_dim,
        )
    }

    /// Builds a signal from flat row-major buffers.
    pub fn from_flat(
        positions: Vec<f64>,
        values: Vec<f64>,
        pos_dim: usize,
        val_dim: usize,
    ) -> Result<Self> {
        if pos_dim == 0 || val_dim == 0 {
            return Err(Error::InvalidSignal(
                "position and value dimensions must be at least 1".into(),
            ));
        }
        if !positions.len().is_multiple_of(pos_dim) || !values.len().is_multiple_of(val_dim) {
            return Err(Error::InvalidSignal(
                "buffer length is not a multiple of its dimension".into(),
            ));
        }
        let m = positions.len() / pos_dim;
        if m == 0 {
            return Err(Error::InvalidSignal("signal has no samples".into()));
        }
        if values.len() / val_dim != m {
            return Err(Error::InvalidSignal(format!(
                "{} positions but {} values",
                m,
                values.len() / val_dim
            )));
        }
        if positions
            .iter()
            .chain(values.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSignal("non-finite coordinate".into()));
        }
        Ok(Self {
            positions,
            values,
            pos_dim,
            val_dim,
        })
    }

    /// One-channel series sampled on the normalized grid `i / (L - 1)`
    /// (a single sample sits at 0).
    pub fn from_series(series: &[f64]) -> Result<Self> {
        let len = series.len();
        let positions = (0..len)
            .map(|i| {
                if len > 1 {
                    i as f64 / (len - 1) as f64
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_flat(positions, series.to_vec(), 1, 1)
    }

    /// Number of samples `M`.
    pub fn len(&self) -> usize {
        self.positions.len() / self.pos_dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn pos_dim(&self) -> usize {
        self.pos_dim
    }

    pub fn val_dim(&self) -> usize {
        self.val_dim
    }

    /// `d + k`.
    pub fn lifted_dim(&self) -> usize {
        self.pos_dim + self.val_dim
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.pos_dim..(i + 1) * self.pos_dim]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.val_dim..(i + 1) * self.val_dim]
    }

    pub fn point(&self, i: usize) -> SamplePoint<'_> {
        SamplePoint {
            position: self.position(i),
            value: self.value(i),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = SamplePoint<'_>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    /// Equality as measures with attached values: same multiset of
    /// `(position, value)` samples, irrespective of sample order.
    pub fn same_samples(&self, other: &Self) -> bool {
        if self.len() != other.len()
            || self.pos_dim != other.pos_dim
            || self.val_dim != other.val_dim
        {
            return false;
        }
        let mut a = self.sample_keys();
        let mut b = other.sample_keys();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    fn sample_keys(&self) -> Vec<Vec<u64>> {
        self.points()
            .map(|s| {
                s.position
                    .iter()
                    .chain(s.value)
                    // +0.0 and -0.0 are the same coordinate
                    .map(|v| (v + 0.0).to_bits())
                    .collect()
            })
            .collect()
    }
}

/// The spatial weight `beta`, with the two limit cases kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beta {
    Zero,
    Finite(f64),
    Infinity,
}

impl Beta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            _ => None,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Zero => f.write_str("zero"),
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(Beta::Zero),
            "inf" | "infinity" => Ok(Beta::Infinity),
            other => {
                let b: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse beta {s:?}")))?;
                if b.is_infinite() && b > 0.0 {
                    return Ok(Beta::Infinity);
                }
                if !(b.is_finite() && b > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "beta must be > 0, got {b}"
                    )));
                }
                Ok(Beta::Finite(b))
            }
        }
    }
}

/// Order `p`, spatial weight `beta` and mass penalty `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundCostParams {
    p: f64,
    beta: Beta,
    lambda: f64,
}

impl GroundCostParams {
    pub fn new(p: f64, beta: Beta, lambda: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
        }
        if let Beta::Finite(b) = beta {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "beta must be > 0, got {b}"
                )));
            }
        }
        // lambda = 0 makes every plan empty and every distance zero.
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        Ok(Self { p, beta, lambda })
    }

    /// Finite `beta` shorthand.
    pub fn with_beta(p: f64, beta: f64, lambda: f64) -> Result<Self> {
        Self::new(p, Beta::Finite(beta), lambda)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.p, self.beta, lambda)
    }

    pub fn with_beta_value(self, beta: Beta) -> Result<Self> {
        Self::new(self.p, beta, self.lambda)
    }

    /// Position scale `beta^(-1/p)` applied by the lifting map.
    pub fn position_scale(&self) -> Result<f64> {
        match self.beta {
            Beta::Finite(b) => Ok(b.powf(-1.0 / self.p)),
            other => Err(Error::InvalidParameter(format!(
                "lifting is undefined for beta = {other}"
            ))),
        }
    }
}

/// Matched pair of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matched {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

/// Sparse partial transport plan between two unit-mass empirical measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub pairs: Vec<Matched>,
    pub destroyed_mass: f64,
    pub created_mass: f64,
    pub total_cost: f64,
}

impl TransportPlan {
    pub fn transported_mass(&self) -> f64 {
        self.pairs.iter().map(|m| m.mass).sum()
    }

    /// The same plan read from the target side.
    pub fn transposed(mut self) -> Self {
        for m in &mut self.pairs {
            std::mem::swap(&mut m.source, &mut m.target);
        }
        self.pairs.sort_by_key(|m| m.source);
        std::mem::swap(&mut self.destroyed_mass, &mut self.created_mass);
        self
    }

    /// Checks that the plan is induced by a partial one-to-one map between
    /// `m` sources and `n` targets, with masses in `{0, 1}` and consistent
    /// mass bookkeeping.
    pub fn is_one_to_one(&self, m: usize, n: usize) -> bool {
        let mut row = vec![false; m];
        let mut col = vec![false; n];
        for p in &self.pairs {
            if p.source >= m || p.target >= n {
                return false;
            }
            if p.mass != 0.0 && p.mass != 1.0 {
                return false;
            }
            if p.mass == 1.0 {
                if row[p.source] || col[p.target] {
                    return false;
                }
                row[p.source] = true;
                col[p.target] = true;
            }
        }
        let moved = self.transported_mass();
        moved + self.destroyed_mass == m as f64 && moved + self.created_mass == n as f64
    }
}

/// Lifts every sample to `[x * beta^(-1/p); f(x)]` in `R^(d+k)`.
pub fn lift(signal: &DiscreteSignal, params: &GroundCostParams) -> Result<Vec<Vec<f64>>> {
    let scale = params.position_scale()?;
    Ok(signal
        .points()
        .map(|s| {
            s.position
                .iter()
                .map(|x| x * scale)
                .chain(s.value.iter().copied())
                .collect()
        })
        .collect())
}

/// Flat row-major variant of [`lift`].
pub fn lift_flat(signal: &DiscreteSignal, params: &GroundCostParams) -> Result<Vec<f64>> {
    let scale = params.position_scale()?;
    let mut out = Vec::with_capacity(signal.len() * signal.lifted_dim());
    for s in signal.points() {
        out.extend(s.position.iter().map(|x| x * scale));
        out.extend_from_slice(s.value);
    }
    Ok(out)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `||a - b||_2^p`, computed from the squared distance.
#[inline]
pub(crate) fn pow_dist(a: &[f64], b: &[f64], p: f64) -> f64 {
    let sq = sq_dist(a, b);
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(0.5 * p)
    }
}

/// `(1/beta) ||x - y||^p + ||f(x) - g(y)||^p` with Euclidean norms on each
/// block.
///
/// For `beta = inf` only the value term remains. For `beta = 0` the cost is
/// the value term when positions coincide and `+inf` otherwise.
pub fn ground_cost(
    a: SamplePoint<'_>,
    b: SamplePoint<'_>,
    params: &GroundCostParams,
) -> Result<f64> {
    if a.position.len() != b.position.len() {
        return Err(Error::DimensionMismatch {
            expected: a.position.len(),
            actual: b.position.len(),
        });
    }
    if a.value.len() != b.value.len() {
        return Err(Error::DimensionMismatch {
            expected: a.value.len(),
            actual: b.value.len(),
        });
    }
    Ok(ground_cost_unchecked(a, b, params.p, params.beta))
}

#[inline]
pub(crate) fn ground_cost_unchecked(
    a: SamplePoint<'_>,
    b: SamplePoint<'_>,
    p: f64,
    beta: Beta,
) -> f64 {
    let value_term = pow_dist(a.value, b.value, p);
    match beta {
        Beta::Finite(beta) => pow_dist(a.position, b.position, p) / beta + value_term,
        Beta::Infinity => value_term,
        Beta::Zero => {
            if a.position == b.position {
                value_term
            } else {
                f64::INFINITY
            }
        }
    }
}
