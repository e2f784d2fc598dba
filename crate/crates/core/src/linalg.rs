//! Small dense matrices and a symmetric eigensolver.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Eigenpairs of a real symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector of `values[j]`.
    pub vectors: Matrix<f64>,
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
pub fn symmetric_eigen(a: &Matrix<f64>) -> SymmetricEigen {
    assert_eq!(a.rows(), a.cols(), "symmetric_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 });

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)] * m[(r, c)])
            .sum();
        let scale: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen) -> Matrix<f64> {
        let n = e.values.len();
        Matrix::from_fn(n, n, |r, c| {
            (0..n).map(|j| e.vectors[(r, j)] * e.values[j] * e.vectors[(c, j)]).sum()
        })
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 0.5, 0.5, 1.0]);
        let e = symmetric_eigen(&a);
        assert!((e.values[0] - 1.5).abs() < 1e-14);
        assert!((e.values[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_and_is_orthonormal() {
        let n = 6;
        let a = Matrix::from_fn(n, n, |r, c| 0.7f64.powi((r as i32 - c as i32).abs()));
        let e = symmetric_eigen(&a);
        let back = reconstruct(&e);
        for r in 0..n {
            for c in 0..n {
                assert!((back[(r, c)] - a[(r, c)]).abs() < 1e-12);
                let dot: f64 = (0..n).map(|k| e.vectors[(k, r)] * e.vectors[(k, c)]).sum();
                assert!((dot - if r == c { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        assert!((e.values.iter().sum::<f64>() - n as f64).abs() < 1e-12);
    }
}
