//! Classical baselines: pointwise Lp on a shared grid and dynamic time
//! warping.

use crate::error::{Error, Result};
use crate::metrics::check_compatible;
use crate::signal::{pow_dist, sq_dist, DiscreteSignal};

/// `(sum_i ||f_i - g_i||^p)^(1/p)` for signals on the same sample grid.
pub fn lp_distance(a: &DiscreteSignal, b: &DiscreteSignal, p: f64) -> Result<f64> {
    check_compatible(a, b)?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
            hint: "Lp compares samples index by index and needs equal lengths",
        });
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let sum: f64 = (0..a.len())
        .map(|i| pow_dist(a.value(i), b.value(i), p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Squared Euclidean local cost, the default for [`dtw`].
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b)
}

/// DTW between the value sequences of two signals with squared Euclidean
/// local cost. Positions are ignored.
pub fn dtw(a: &DiscreteSignal, b: &DiscreteSignal) -> Result<f64> {
    check_compatible(a, b)?;
    dtw_with(
        a.values_flat(),
        b.values_flat(),
        a.val_dim(),
        squared_euclidean,
    )
}

/// Minimum cost of a boundary-anchored, monotone, continuous warping path
/// between two `k`-channel sequences stored row-major. Full O(NM) table,
/// no window.
pub fn dtw_with<F>(a: &[f64], b: &[f64], k: usize, local: F) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if k == 0 || !a.len().is_multiple_of(k) || !b.len().is_multiple_of(k) {
        return Err(Error::InvalidParameter(
            "sequence length is not a multiple of the channel count".into(),
        ));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter(
            "DTW needs nonempty sequences".into(),
        ));
    }
    let rows: Vec<&[f64]> = a.chunks_exact(k).collect();
    let cols: Vec<&[f64]> = b.chunks_exact(k).collect();
    let m = cols.len();

    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for (i, r) in rows.iter().enumerate() {
        for j in 0..m {
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j - 1].min(prev[j]).min(cur[j - 1]),
            };
            cur[j] = best + local(r, cols[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}
