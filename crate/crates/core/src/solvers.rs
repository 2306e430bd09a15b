//! Exact transport solvers for unit-mass empirical measures.
//!
//! Balanced transport between two `N`-point clouds is a linear assignment
//! problem. Partial transport with mass penalty `lambda` reduces to a
//! rectangular assignment on the gains `min(c_ij - 2 lambda, 0)`: a pair is
//! worth matching only when its cost undercuts destroying one unit and
//! creating another, and every row can fall back to a zero-gain column.

use crate::error::{Error, Result};
use crate::signal::{Matched, TransportPlan};

/// Dense `rows x cols` matrix of non-negative ground costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Vec<f64>,
    rows: usize,
    cols: usize,
    truncation: Option<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "cost buffer has {} entries, expected {rows}x{cols}",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "costs must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self {
            entries,
            rows,
            cols,
            truncation: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged cost rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Caps every entry at `2 lambda`.
    pub fn truncated(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let cap = 2.0 * lambda;
        Ok(Self {
            entries: self.entries.iter().map(|&c| c.min(cap)).collect(),
            rows: self.rows,
            cols: self.cols,
            truncation: Some(cap),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The `2 lambda` cap, if this matrix was truncated.
    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )))
    }
}

const FREE: usize = usize::MAX;

/// Minimum-cost assignment of every row to a distinct column of a dense
/// `rows x cols` matrix with `rows <= cols`. Returns the column of each row.
///
/// Shortest augmenting paths with lazily updated dual potentials,
/// O(rows^2 cols) worst case. Rows start from a row-reduced greedy matching;
/// column potentials start at 0 and only decrease on matched columns, which
/// keeps the duals feasible for the rectangular problem.
fn assign_rows(cost: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    debug_assert!(rows <= cols);
    let mut u = vec![0.0f64; rows];
    let mut v = vec![0.0f64; cols];
    let mut col4row = vec![FREE; rows];
    let mut row4col = vec![FREE; cols];

    for i in 0..rows {
        let row = &cost[i * cols..(i + 1) * cols];
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        u[i] = min;
        if let Some(j) = (0..cols).find(|&j| row[j] == min && row4col[j] == FREE) {
            row4col[j] = i;
            col4row[i] = j;
        }
    }

    let mut shortest = vec![f64::INFINITY; cols];
    let mut path = vec![FREE; cols];
    let mut remaining: Vec<usize> = Vec::with_capacity(cols);
    let mut visited_rows: Vec<usize> = Vec::with_capacity(rows);
    let mut visited_cols: Vec<usize> = Vec::with_capacity(cols);

    for start in 0..rows {
        if col4row[start] != FREE {
            continue;
        }
        shortest.fill(f64::INFINITY);
        remaining.clear();
        remaining.extend(0..cols);
        visited_rows.clear();
        visited_cols.clear();

        let mut min_val = 0.0f64;
        let mut i = start;
        let sink = loop {
            visited_rows.push(i);
            let row = &cost[i * cols..(i + 1) * cols];
            let ui = u[i];
            let mut lowest = f64::INFINITY;
            let mut pick = 0usize;
            for (it, &j) in remaining.iter().enumerate() {
                let r = min_val + row[j] - ui - v[j];
                if r < shortest[j] {
                    path[j] = i;
                    shortest[j] = r;
                }
                // on ties prefer a free column: it ends the search
                if shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == FREE) {
                    lowest = shortest[j];
                    pick = it;
                }
            }
            min_val = lowest;
            let j = remaining.swap_remove(pick);
            visited_cols.push(j);
            if row4col[j] == FREE {
                break j;
            }
            i = row4col[j];
        };

        u[start] += min_val;
        for &r in &visited_rows[1..] {
            u[r] += min_val - shortest[col4row[r]];
        }
        for &j in &visited_cols {
            v[j] -= min_val - shortest[j];
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            let prev = std::mem::replace(&mut col4row[r], j);
            if r == start {
                break;
            }
            j = prev;
        }
    }
    col4row
}

/// Exact balanced transport between two unit-mass clouds of equal size.
pub fn solve_ot(cost: &CostMatrix) -> Result<TransportPlan> {
    if cost.rows != cost.cols {
        return Err(Error::LengthMismatch {
            left: cost.rows,
            right: cost.cols,
            hint: "balanced transport needs equal sizes; use solve_opt for partial transport",
        });
    }
    let sigma = assign_rows(&cost.entries, cost.rows, cost.cols);
    let total = sum_matched(sigma.iter().enumerate().map(|(i, &j)| cost.get(i, j)));
    let pairs = sigma
        .iter()
        .enumerate()
        .map(|(i, &j)| Matched {
            source: i,
            target: j,
            mass: 1.0,
        })
        .collect();
    Ok(TransportPlan {
        pairs,
        destroyed_mass: 0.0,
        created_mass: 0.0,
        total_cost: total,
    })
}

/// Exact partial transport with penalty `lambda` per unit of destroyed or
/// created mass.
///
/// Minimizes `sum_{matched} c_ij + lambda (M + N - 2 |matched|)`. Only pairs
/// with `c_ij < 2 lambda` are ever kept in the returned plan; a pair at or
/// above the cap is reported as one destroyed and one created unit, which
/// has the same objective.
pub fn solve_opt(cost: &CostMatrix, lambda: f64) -> Result<TransportPlan> {
    check_lambda(lambda)?;
    let (m, n) = (cost.rows, cost.cols);
    let cap = 2.0 * lambda;
    if m == n && cost.max_entry() < cap {
        // Any unmatched pair could be matched at a strict gain, so the
        // optimum is a perfect matching: the balanced problem.
        return solve_ot(cost);
    }
    let transpose = m > n;
    let (rows, cols) = if transpose { (n, m) } else { (m, n) };

    let mut gains = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let raw = if transpose {
                cost.get(c, r)
            } else {
                cost.get(r, c)
            };
            gains.push((raw - cap).min(0.0));
        }
    }
    let sigma = assign_rows(&gains, rows, cols);

    let mut pairs: Vec<Matched> = sigma
        .iter()
        .enumerate()
        .map(|(r, &c)| if transpose { (c, r) } else { (r, c) })
        .filter(|&(i, j)| cost.get(i, j) < cap)
        .map(|(i, j)| Matched {
            source: i,
            target: j,
            mass: 1.0,
        })
        .collect();
    pairs.sort_by_key(|p| p.source);
    Ok(finish_partial_plan(pairs, m, n, lambda, |i, j| {
        cost.get(i, j)
    }))
}

/// Sums matched pair costs in ascending order, so the total depends only on
/// the matching and not on which side is the source.
pub(crate) fn sum_matched(costs: impl Iterator<Item = f64>) -> f64 {
    let mut costs: Vec<f64> = costs.collect();
    costs.sort_unstable_by(f64::total_cmp);
    costs.iter().sum()
}

/// Assembles a partial plan: matched costs via [`sum_matched`] plus the mass
/// penalty.
pub(crate) fn finish_partial_plan(
    pairs: Vec<Matched>,
    m: usize,
    n: usize,
    lambda: f64,
    cost: impl Fn(usize, usize) -> f64,
) -> TransportPlan {
    let matched = pairs.len();
    let transport = sum_matched(pairs.iter().map(|p| cost(p.source, p.target)));
    let destroyed = (m - matched) as f64;
    let created = (n - matched) as f64;
    TransportPlan {
        pairs,
        destroyed_mass: destroyed,
        created_mass: created,
        total_cost: transport + lambda * (destroyed + created),
    }
}

/// Largest side accepted by [`brute_force_opt`].
pub const BRUTE_FORCE_CAP: usize = 6;

/// Exhaustive minimum of the partial transport objective over every partial
/// one-to-one matching. Uses the raw (untruncated) costs. Test oracle only.
pub fn brute_force_opt(cost: &CostMatrix, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let (m, n) = (cost.rows, cost.cols);
    if m > BRUTE_FORCE_CAP || n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            rows: m,
            cols: n,
            cap: BRUTE_FORCE_CAP,
        });
    }

    fn go(cost: &CostMatrix, lambda: f64, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.rows {
            let free_cols = used.iter().filter(|u| !**u).count() as f64;
            *best = best.min(acc + lambda * free_cols);
            return;
        }
        // row destroyed
        go(cost, lambda, row + 1, used, acc + lambda, best);
        for j in 0..cost.cols {
            if !used[j] {
                used[j] = true;
                go(cost, lambda, row + 1, used, acc + cost.get(row, j), best);
                used[j] = false;
            }
        }
    }

    let mut best = f64::INFINITY;
    go(cost, lambda, 0, &mut vec![false; n], 0.0, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cm(rows: &[Vec<f64>]) -> CostMatrix {
        CostMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn ot_examples() {
        let plan = solve_ot(&cm(&[vec![0.0, 0.0], vec![0.0, 0.0]])).unwrap();
        assert_eq!(plan.total_cost, 0.0);

        let plan = solve_ot(&cm(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert_eq!(plan.total_cost, 0.0);
        assert_eq!(
            plan.pairs
                .iter()
                .map(|p| (p.source, p.target))
                .collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );

        // Permutations: (0,0),(1,1) = 7; (0,1),(1,0) = 3.
        let plan = solve_ot(&cm(&[vec![3.0, 1.0], vec![2.0, 4.0]])).unwrap();
        assert_eq!(plan.total_cost, 3.0);
        assert_eq!(plan.destroyed_mass, 0.0);
        assert_eq!(plan.created_mass, 0.0);
    }

    #[test]
    fn ot_rejects_unbalanced() {
        let err = solve_ot(&cm(&[vec![1.0, 2.0]])).unwrap_err();
        assert!(err.to_string().contains("solve_opt"));
    }

    #[test]
    fn opt_examples() {
        let plan = solve_opt(&cm(&[vec![100.0]]), 1.0).unwrap();
        assert!(plan.pairs.is_empty());
        assert_eq!(plan.total_cost, 2.0);

        let plan = solve_opt(&cm(&[vec![0.3]]), 1.0).unwrap();
        assert_eq!(plan.pairs.len(), 1);
        assert_eq!(plan.total_cost, 0.3);

        // Enumeration: {} = 1.5, {(0,0)} = 0.1 + 0.5, {(1,0)} = 0.9 + 0.5.
        let plan = solve_opt(&cm(&[vec![0.1], vec![0.9]]), 0.5).unwrap();
        assert!((plan.total_cost - 0.6).abs() < 1e-15);
        assert_eq!(plan.pairs[0].source, 0);
        assert_eq!(plan.destroyed_mass, 1.0);
        assert_eq!(plan.created_mass, 0.0);
    }

    #[test]
    fn opt_rejects_nonpositive_lambda() {
        let c = cm(&[vec![1.0]]);
        assert!(solve_opt(&c, 0.0).is_err());
        assert!(solve_opt(&c, -1.0).is_err());
        assert!(brute_force_opt(&c, 0.0).is_err());
    }

    #[test]
    fn opt_handles_empty_sides() {
        let c = CostMatrix::new(0, 3, vec![]).unwrap();
        assert_eq!(solve_opt(&c, 0.5).unwrap().total_cost, 1.5);
        let c = CostMatrix::new(2, 0, vec![]).unwrap();
        assert_eq!(solve_opt(&c, 0.5).unwrap().total_cost, 1.0);
    }

    #[test]
    fn brute_force_examples() {
        let empty = CostMatrix::new(0, 0, vec![]).unwrap();
        assert_eq!(brute_force_opt(&empty, 1.0).unwrap(), 0.0);
        let c = cm(&[vec![1.0, 3.0], vec![3.0, 1.0]]);
        assert!((brute_force_opt(&c, 0.4).unwrap() - 1.6).abs() < 1e-15);
        assert!((solve_opt(&c, 0.4).unwrap().total_cost - 1.6).abs() < 1e-15);
        let big = CostMatrix::new(7, 1, vec![0.0; 7]).unwrap();
        assert!(matches!(
            brute_force_opt(&big, 1.0),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn cost_matrix_validation() {
        assert!(CostMatrix::new(1, 1, vec![-1.0]).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::new(1, 2, vec![1.0]).is_err());
        let t = cm(&[vec![5.0, 0.5]]).truncated(1.0).unwrap();
        assert_eq!(t.entries(), &[2.0, 0.5]);
        assert_eq!(t.truncation(), Some(2.0));
    }

    fn instance(max: usize) -> impl Strategy<Value = (CostMatrix, f64)> {
        (0..=max, 0..=max).prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(0.0f64..10.0, m * n)
                    .prop_map(move |e| CostMatrix::new(m, n, e).unwrap()),
                0.1f64..5.0,
            )
        })
    }

    proptest! {
        #[test]
        fn opt_matches_brute_force((c, lambda) in instance(5)) {
            let plan = solve_opt(&c, lambda).unwrap();
            let oracle = brute_force_opt(&c, lambda).unwrap();
            prop_assert!((plan.total_cost - oracle).abs() <= 1e-9);
            prop_assert!(plan.is_one_to_one(c.rows(), c.cols()));
        }

        #[test]
        fn opt_is_monotone_in_lambda((c, lambda) in instance(6), bump in 0.0f64..3.0) {
            let lo = solve_opt(&c, lambda).unwrap().total_cost;
            let hi = solve_opt(&c, lambda + bump).unwrap().total_cost;
            prop_assert!(hi >= lo - 1e-9);
        }

        #[test]
        fn truncation_is_irrelevant((c, lambda) in instance(6)) {
            let raw = solve_opt(&c, lambda).unwrap().total_cost;
            let cut = solve_opt(&c.truncated(lambda).unwrap(), lambda).unwrap().total_cost;
            prop_assert!((raw - cut).abs() <= 1e-9);
        }

        #[test]
        fn large_lambda_recovers_ot(n in 1usize..7, seed in prop::collection::vec(0.0f64..10.0, 36)) {
            let c = CostMatrix::new(n, n, seed[..n * n].to_vec()).unwrap();
            let lambda = c.max_entry() / 2.0 + 1e-3;
            let ot = solve_ot(&c).unwrap().total_cost;
            let opt = solve_opt(&c, lambda).unwrap();
            prop_assert_eq!(opt.pairs.len(), n);
            prop_assert_eq!(opt.total_cost, ot);
        }
    }
}
