//! Maximum-weight perfect assignment (Kuhn–Munkres) with a deterministic
//! tie-break: among optimal assignments the lexicographically smallest one
//! is returned.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// `rows[l]` is the row assigned to column `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub rows: Vec<usize>,
    pub total: f64,
}

/// Min-cost Hungarian algorithm with potentials. Returns the row matched to
/// each column plus the row and column potentials.
fn hungarian_min(cost: &Matrix<f64>) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.rows();
    // 1-based working arrays; index 0 is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let rows = (1..=n).map(|j| matched_row[j] - 1).collect();
    (rows, u[1..].to_vec(), v[1..].to_vec())
}

/// Kuhn augmenting path over allowed edges restricted to free rows/columns.
fn augment(col: usize, tight: &[Vec<usize>], row_owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &r in &tight[col] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if row_owner[r].is_none_or(|c| augment(c, tight, row_owner, seen)) {
            row_owner[r] = Some(col);
            return true;
        }
    }
    false
}

/// Whether columns `from..` can be perfectly matched to rows not in `taken`.
fn completes(from: usize, tight: &[Vec<usize>], taken: &[bool]) -> bool {
    let n = tight.len();
    let mut row_owner: Vec<Option<usize>> = vec![None; n];
    for col in from..n {
        let mut seen = taken.to_vec();
        if !augment(col, tight, &mut row_owner, &mut seen) {
            return false;
        }
    }
    true
}

/// Permutation `σ` maximising `Σ_l weights[σ(l), l]`.
pub fn assign_max(weights: &Matrix<f64>) -> Result<Assignment> {
    let n = weights.rows();
    if n != weights.cols() {
        return Err(Error::Shape { rows: weights.rows(), cols: weights.cols() });
    }
    if n == 0 {
        return Ok(Assignment { rows: Vec::new(), total: 0.0 });
    }
    let cost = Matrix::from_fn(n, n, |r, c| -weights[(r, c)]);
    let (rows, u, v) = hungarian_min(&cost);

    let scale = weights.as_slice().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let tol = 1e-12 * (1.0 + scale) * n as f64;
    // tight[c] lists rows whose edge to column c has zero reduced cost.
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|c| (0..n).filter(|&r| (cost[(r, c)] - u[r] - v[c]).abs() <= tol).collect())
        .collect();

    let rows = if tight.iter().map(Vec::len).sum::<usize>() == n {
        rows
    } else {
        let mut taken = vec![false; n];
        let mut chosen = Vec::with_capacity(n);
        for col in 0..n {
            let pick = tight[col]
                .iter()
                .copied()
                .find(|&r| {
                    if taken[r] {
                        return false;
                    }
                    taken[r] = true;
                    let ok = completes(col + 1, &tight, &taken);
                    taken[r] = false;
                    ok
                })
                .expect("an optimal matching exists on tight edges");
            taken[pick] = true;
            chosen.push(pick);
        }
        chosen
    };
    let total = rows.iter().enumerate().map(|(c, &r)| weights[(r, c)]).sum();
    Ok(Assignment { rows, total })
}
