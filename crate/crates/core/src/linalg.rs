//! Linear solvers for the small systems behind the exact oracles.
//!
//! Dense Gaussian elimination with partial pivoting handles systems up to
//! [`DENSE_LIMIT`] unknowns. Larger systems come from tree-structured
//! generators and Laplacians, which are diagonally dominant; they go through
//! sparse elimination in minimum-degree order, which has no fill on trees.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub const DENSE_LIMIT: usize = 400;

const PIVOT_EPS: f64 = 1e-300;

/// Square sparse matrix assembled entry by entry.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].get(&j).copied().unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                out[i][j] = v;
            }
        }
        out
    }

    /// Solves `A x = b`, dense below [`DENSE_LIMIT`], sparse above.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.dim() <= DENSE_LIMIT {
            solve_dense(self.to_dense(), b.to_vec())
        } else {
            self.solve_sparse(b)
        }
    }

    /// Sparse Gaussian elimination without pivoting, minimum-degree order.
    pub fn solve_sparse(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut rows = self.rows.clone();
        let mut rhs = b.to_vec();
        let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, row) in rows.iter_mut().enumerate() {
            row.retain(|_, v| *v != 0.0);
            for &j in row.keys() {
                cols[j].insert(i);
            }
        }
        let mut queue: BTreeSet<(usize, usize)> = rows.iter().enumerate().map(|(i, r)| (r.len(), i)).collect();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut pivot_rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];

        while let Some(&(len, k)) = queue.iter().next() {
            queue.remove(&(len, k));
            let pivot_row = std::mem::take(&mut rows[k]);
            let pivot = pivot_row.get(&k).copied().unwrap_or(0.0);
            if !pivot.is_finite() || pivot.abs() < PIVOT_EPS {
                return Err(Error::SingularSystem);
            }
            let targets: Vec<usize> = cols[k].iter().copied().filter(|&i| i != k && !done[i]).collect();
            for i in targets {
                let a_ik = match rows[i].remove(&k) {
                    Some(v) => v,
                    None => continue,
                };
                let old_len = rows[i].len() + 1;
                let factor = a_ik / pivot;
                for (&j, &v) in &pivot_row {
                    if j == k {
                        continue;
                    }
                    let entry = rows[i].entry(j).or_insert(0.0);
                    *entry -= factor * v;
                    cols[j].insert(i);
                }
                rhs[i] -= factor * rhs[k];
                queue.remove(&(old_len, i));
                queue.insert((rows[i].len(), i));
            }
            for &j in pivot_row.keys() {
                cols[j].remove(&k);
            }
            done[k] = true;
            order.push(k);
            pivot_rows[k] = pivot_row;
        }

        let mut x = vec![0.0; n];
        for &k in order.iter().rev() {
            let row = &pivot_rows[k];
            let mut acc = rhs[k];
            for (&j, &v) in row {
                if j != k {
                    acc -= v * x[j];
                }
            }
            x[k] = acc / row[&k];
        }
        Ok(x)
    }
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n);
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let (piv, max) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if max <= scale * 1e-14 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot_row = a[col].clone();
        let p = pivot_row[col];
        for r in col + 1..n {
            let f = a[r][col] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * pivot_row[c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SparseMatrix {
        let mut m = SparseMatrix::new(n);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
            }
        }
        m
    }

    #[test]
    fn dense_and_sparse_agree() {
        let m = path_laplacian(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let x1 = solve_dense(m.to_dense(), b.clone()).unwrap();
        let x2 = m.solve_sparse(&b).unwrap();
        for (a, c) in x1.iter().zip(&x2) {
            assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let x = solve_dense(a, vec![2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(solve_dense(a, vec![1.0, 2.0]), Err(Error::SingularSystem)));
        let mut m = SparseMatrix::new(2);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        assert!(m.solve_sparse(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn large_sparse_residual_is_small() {
        let n = 2000;
        let m = path_laplacian(n);
        let b = vec![1.0; n];
        let x = m.solve(&b).unwrap();
        for i in 0..n {
            let mut ax = 2.0 * x[i];
            if i > 0 {
                ax -= x[i - 1];
            }
            if i + 1 < n {
                ax -= x[i + 1];
            }
            assert!((ax - 1.0).abs() < 1e-6 * (1.0 + x[i].abs()));
        }
    }
}
