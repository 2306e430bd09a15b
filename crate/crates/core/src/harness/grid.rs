//! Cross-validated grid search over `(beta, lambda)` for 1NN.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::dataset::LabeledDataset;
use crate::harness::distance::{pairwise_matrix, DistanceConfig};
use crate::harness::knn::{accuracy, knn_1_within};
use crate::harness::pca::lifted_radius;
use crate::signal::Beta;

pub const DEFAULT_BETA_GRID: [f64; 8] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4];
pub const DEFAULT_LAMBDA_STEPS: usize = 10;
pub const DEFAULT_LAMBDA_MIN: f64 = 0.1;
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub method: String,
    pub beta_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Mean fold accuracy, indexed `[beta][lambda]`.
    pub cv_scores: Vec<Vec<f64>>,
    pub best_beta: f64,
    pub best_lambda: f64,
    pub best_score: f64,
    pub folds: usize,
    pub seed: u64,
}

/// `steps` evenly spaced values from 0.1 to the radius of the pooled signal
/// graphs (collapsing to 0.1 when the radius is smaller).
pub fn default_lambda_grid(dataset: &LabeledDataset) -> Result<Vec<f64>> {
    let top = lifted_radius(dataset)?.max(DEFAULT_LAMBDA_MIN);
    Ok(linspace(DEFAULT_LAMBDA_MIN, top, DEFAULT_LAMBDA_STEPS))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Label-stratified folds: each class is shuffled with `seed` and dealt
/// round-robin, continuing the deal across classes.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if by_class.len() <= l {
            by_class.resize(l + 1, Vec::new());
        }
        by_class[l].push(i);
    }
    if let Some((class, members)) = by_class
        .iter()
        .enumerate()
        .find(|(_, m)| !m.is_empty() && m.len() < folds)
    {
        return Err(Error::InvalidDataset(format!(
            "class {class} has {} members, fewer than {folds} folds",
            members.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            out[next % folds].push(i);
            next += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Mean 1NN accuracy across folds, using each fold as the test split.
pub fn cross_validated_accuracy(
    matrix: &[Vec<f64>],
    labels: &[usize],
    folds: &[Vec<usize>],
) -> f64 {
    let mut total = 0.0;
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let predicted = knn_1_within(matrix, labels, &train, test);
        let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        total += accuracy(&predicted, &truth);
    }
    total / folds.len() as f64
}

/// Scores every `(beta, lambda)` pair by stratified k-fold 1NN accuracy and
/// returns the best one (ties to the smallest index pair). `lambda_grid =
/// None` uses [`default_lambda_grid`]. Each distinct configuration is
/// evaluated once; methods that ignore `beta` or `lambda` reuse tables.
pub fn grid_search(
    dataset: &LabeledDataset,
    base: &DistanceConfig,
    beta_grid: &[f64],
    lambda_grid: Option<&[f64]>,
    folds: usize,
    seed: u64,
) -> Result<GridSearchReport> {
    if beta_grid.is_empty() {
        return Err(Error::InvalidParameter("empty beta grid".into()));
    }
    let lambda_grid = match lambda_grid {
        Some([]) => return Err(Error::InvalidParameter("empty lambda grid".into())),
        Some(g) => g.to_vec(),
        None => default_lambda_grid(dataset)?,
    };
    let fold_sets = stratified_folds(dataset.labels(), folds, seed)?;

    let method = base.method;
    let mut cache: HashMap<(u64, u64), f64> = HashMap::new();
    let mut cv_scores = Vec::with_capacity(beta_grid.len());
    for &beta in beta_grid {
        let mut row = Vec::with_capacity(lambda_grid.len());
        for &lambda in &lambda_grid {
            let key = (
                if method.uses_beta() {
                    beta.to_bits()
                } else {
                    0
                },
                if method.uses_lambda() {
                    lambda.to_bits()
                } else {
                    0
                },
            );
            let score = match cache.get(&key) {
                Some(&s) => s,
                None => {
                    let params = base
                        .params
                        .with_beta_value(Beta::Finite(beta))?
                        .with_lambda(lambda)?;
                    let cfg = DistanceConfig { params, ..*base };
                    let matrix = pairwise_matrix(dataset, &cfg)?;
                    let s = cross_validated_accuracy(&matrix.values, dataset.labels(), &fold_sets);
                    cache.insert(key, s);
                    s
                }
            };
            row.push(score);
        }
        cv_scores.push(row);
    }

    let mut best = (0, 0);
    for (b, row) in cv_scores.iter().enumerate() {
        for (l, &s) in row.iter().enumerate() {
            if s > cv_scores[best.0][best.1] {
                best = (b, l);
            }
        }
    }
    Ok(GridSearchReport {
        method: method.name().to_string(),
        best_beta: beta_grid[best.0],
        best_lambda: lambda_grid[best.1],
        best_score: cv_scores[best.0][best.1],
        beta_grid: beta_grid.to_vec(),
        lambda_grid,
        cv_scores,
        folds,
        seed,
    })
}
