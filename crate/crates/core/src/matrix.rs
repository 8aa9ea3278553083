//! Dense square matrices.
//!
//! All interaction matrices in this crate are small (a few hundred rows at
//! most) so a row-major `Vec<f64>` is used throughout. Indexing is
//! `(row, col)`; for attack matrices the row is the attacker.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{GraspError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows, rejecting ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraspError::NonSquareMatrix { rows: n, bad_row: i, len: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(k, &v)| (k / n, k % n, v))
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.iter().filter(|&(i, j, _)| i != j)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row_k = other.row(k);
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(row_k) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "add dimension mismatch");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// `Mᵀ·v`, i.e. `out[j] = Σ_i M[i][j]·v[i]`: the incoming mass on each column.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += m * vi;
            }
        }
        out
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.transpose_mul_vec(&vec![1.0; self.n])
    }

    /// Induced 1-norm: the largest absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for (_, j, v) in self.iter() {
            sums[j] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn zero_diagonal(&mut self) {
        for i in 0..self.n {
            self[(i, i)] = 0.0;
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Solves `A·x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(GraspError::DimensionMismatch { expected: n, found: b.len() });
    }
    let mut m = a.to_rows();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))
            .expect("non-empty pivot range");
        if m[pivot][col].abs() < 1e-14 {
            return Err(GraspError::SingularSystem(format!("zero pivot in column {col}")));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple_loop(a: &Matrix, b: &Matrix) -> Matrix {
        let n = a.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let a = Matrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 11) as f64 / 10.0);
        let b = Matrix::from_fn(5, |i, j| ((i * 5 + j * 2 + 1) % 13) as f64 / 12.0);
        assert!(a.matmul(&b).max_abs_diff(&triple_loop(&a, &b)) < 1e-12);
    }

    #[test]
    fn norm_1_is_max_column_sum() {
        let m = Matrix::from_rows(&[vec![0.0, 0.5], vec![0.7, 0.2]]).unwrap();
        assert!((m.norm_1() - 0.7).abs() < 1e-15);
        assert_eq!(m.column_sums(), vec![0.7, 0.7]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, GraspError::NonSquareMatrix { bad_row: 1, .. }));
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = Matrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, -1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|k| a[(i, k)] * x[k]).sum()).collect();
        let got = solve_dense(&a, &b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_system_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(solve_dense(&a, &[1.0, 1.0]), Err(GraspError::SingularSystem(_))));
    }
}
