//! One-nearest-neighbor classification over precomputed distances.

/// Label of the nearest training item for each row of `distances`
/// (rows = queries, columns = training items). Ties go to the lowest
/// training index.
pub fn knn_1(distances: &[Vec<f64>], train_labels: &[usize]) -> Vec<usize> {
    assert!(
        !train_labels.is_empty(),
        "1NN needs a nonempty training set"
    );
    distances
        .iter()
        .map(|row| {
            debug_assert_eq!(row.len(), train_labels.len());
            train_labels[argmin(row.iter().copied().enumerate())]
        })
        .collect()
}

fn argmin(items: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best = (usize::MAX, f64::INFINITY);
    for (j, d) in items {
        if best.0 == usize::MAX || d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// 1NN predictions for the items `test` using only the items `train` of a
/// square all-pairs matrix.
pub fn knn_1_within(
    matrix: &[Vec<f64>],
    labels: &[usize],
    train: &[usize],
    test: &[usize],
) -> Vec<usize> {
    assert!(!train.is_empty(), "1NN needs a nonempty training set");
    test.iter()
        .map(|&i| labels[train[argmin(train.iter().enumerate().map(|(t, &j)| (t, matrix[i][j])))]])
        .collect()
}

/// Leave-one-out 1NN predictions on a square all-pairs matrix.
pub fn leave_one_out(matrix: &[Vec<f64>], labels: &[usize]) -> Vec<usize> {
    (0..labels.len())
        .map(|i| {
            let j = argmin(
                (0..labels.len())
                    .filter(|&j| j != i)
                    .map(|j| (j, matrix[i][j])),
            );
            labels[j]
        })
        .collect()
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(knn_1(&[vec![3.0, 1.0, 2.0]], &[10, 11, 12]), vec![11]);
        assert_eq!(knn_1(&[vec![1.0, 1.0]], &[7, 8]), vec![7]);
        assert_eq!(knn_1(&[vec![0.5, 0.0, 0.5]], &[1, 2, 1]), vec![2]);
    }

    #[test]
    fn loo_skips_self() {
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 2.0],
            vec![5.0, 2.0, 0.0],
        ];
        assert_eq!(leave_one_out(&m, &[0, 0, 1]), vec![0, 0, 0]);
        assert_eq!(knn_1_within(&m, &[0, 0, 1], &[0, 2], &[1]), vec![0]);
        assert_eq!(accuracy(&[0, 0, 0], &[0, 0, 1]), 2.0 / 3.0);
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_transform(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 6), 1..8),
            labels in prop::collection::vec(0usize..3, 6),
        ) {
            let squared: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * v).collect()).collect();
            prop_assert_eq!(knn_1(&rows, &labels), knn_1(&squared, &labels));
        }
    }
}
