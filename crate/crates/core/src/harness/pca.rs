//! Reference direction and scale of the pooled lifted point cloud.

use crate::error::{Error, Result};
use crate::harness::dataset::LabeledDataset;
use crate::signal::{lift_flat, Beta, GroundCostParams};

const POWER_TOLERANCE: f64 = 1e-9;
const POWER_MAX_ITERS: usize = 100_000;

fn pooled(dataset: &LabeledDataset, params: &GroundCostParams) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for s in dataset.signals() {
        out.extend(lift_flat(s, params)?);
    }
    Ok(out)
}

fn centroid(points: &[f64], dim: usize) -> Vec<f64> {
    let n = (points.len() / dim) as f64;
    let mut c = vec![0.0; dim];
    for pt in points.chunks_exact(dim) {
        for (ci, v) in c.iter_mut().zip(pt) {
            *ci += v;
        }
    }
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Leading eigenvector of a symmetric positive semi-definite matrix by
/// power iteration, started from the column with the largest diagonal.
fn leading_eigenvector(cov: &[f64], dim: usize) -> Vec<f64> {
    let start = (0..dim)
        .max_by(|&a, &b| cov[a * dim + a].total_cmp(&cov[b * dim + b]))
        .unwrap_or(0);
    let mut v: Vec<f64> = (0..dim).map(|i| cov[i * dim + start]).collect();
    normalize(&mut v);
    let mut eig = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let mut w: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| cov[i * dim + j] * v[j]).sum())
            .collect();
        let next_eig = normalize(&mut w);
        let moved = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        v = w;
        let settled = (next_eig - eig).abs() <= POWER_TOLERANCE * next_eig.abs();
        eig = next_eig;
        if settled && moved <= POWER_TOLERANCE {
            break;
        }
    }
    v
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// First principal component of the pooled lifted samples, restricted to
/// the value block.
///
/// The component is computed in the full lifted space, then its position
/// coordinates are zeroed and the rest renormalized. The sign makes the
/// largest-magnitude coordinate positive.
pub fn principal_direction(
    dataset: &LabeledDataset,
    params: &GroundCostParams,
) -> Result<Vec<f64>> {
    if dataset.len() < 2 {
        return Err(Error::InvalidDataset(
            "principal direction needs at least two signals".into(),
        ));
    }
    let dim = dataset.lifted_dim();
    let pos_dim = dataset.signals()[0].pos_dim();
    let points = pooled(dataset, params)?;
    let n = points.len() / dim;
    let c = centroid(&points, dim);

    let mut cov = vec![0.0; dim * dim];
    for pt in points.chunks_exact(dim) {
        for i in 0..dim {
            let di = pt[i] - c[i];
            for j in i..dim {
                cov[i * dim + j] += di * (pt[j] - c[j]);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[i * dim + j] / n as f64;
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }
    }
    let trace: f64 = (0..dim).map(|i| cov[i * dim + i]).sum();
    if !(trace > 0.0) {
        return Err(Error::InvalidDataset(
            "lifted samples have zero variance".into(),
        ));
    }

    let mut v = leading_eigenvector(&cov, dim);
    v[..pos_dim].iter_mut().for_each(|x| *x = 0.0);
    if normalize(&mut v) < 1e-12 {
        return Err(Error::InvalidDataset(
            "principal direction has no component along the values".into(),
        ));
    }
    let lead = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(v)
}

/// Largest Euclidean distance from the centroid of the pooled signal
/// graphs `(x, f(x))`.
pub fn lifted_radius(dataset: &LabeledDataset) -> Result<f64> {
    let unit = GroundCostParams::new(1.0, Beta::Finite(1.0), 1.0)?;
    let dim = dataset.lifted_dim();
    let points = pooled(dataset, &unit)?;
    let c = centroid(&points, dim);
    Ok(points
        .chunks_exact(dim)
        .map(|pt| {
            pt.iter()
                .zip(&c)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
}
