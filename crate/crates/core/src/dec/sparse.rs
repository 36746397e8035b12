//! Compressed sparse rows and a conjugate-gradient solver.
//!
//! Products are parallel over rows; each row is reduced sequentially, so
//! results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

const PAR_THRESHOLD: usize = 4096;

impl Csr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), data: Vec::new() }
    }

    /// Builds from (row, col, value) triplets, summing duplicates and dropping exact zeros.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::InvalidParams(format!("triplet ({r}, {c}) outside a {rows}x{cols} matrix")));
            }
            per_row[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in per_row {
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = 0.0;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                if v != 0.0 {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { rows, cols, indptr, indices, data })
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.data[a..b].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|e| e.0 == c).map_or(0.0, |e| e.1)
    }

    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.indptr[r]..self.indptr[r + 1] {
            s += self.data[k] * x[self.indices[k]];
        }
        s
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in sparse product");
        if self.rows >= PAR_THRESHOLD {
            (0..self.rows).into_par_iter().map(|r| self.row_dot(r, x)).collect()
        } else {
            (0..self.rows).map(|r| self.row_dot(r, x)).collect()
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut fill = counts;
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                let k = fill[c];
                indices[k] = r;
                data[k] = v;
                fill[c] += 1;
            }
        }
        Self { rows: self.cols, cols: self.rows, indptr, indices, data }
    }

    /// `Aᵀ x` without forming the transpose.
    pub fn mul_vec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "dimension mismatch in transposed sparse product");
        let mut y = vec![0.0; self.cols];
        for (r, xr) in x.iter().enumerate() {
            if *xr == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// `A B` for sparse operands.
    pub fn matmul(&self, other: &Csr) -> Result<Csr> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        Csr::from_triplets(self.rows, other.cols, &triplets)
    }

    /// Keeps the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Csr {
        let mut col_map = vec![usize::MAX; self.cols];
        for (i, &c) in cols.iter().enumerate() {
            col_map[c] = i;
        }
        let mut triplets = Vec::new();
        for (i, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if col_map[c] != usize::MAX {
                    triplets.push((i, col_map[c], v));
                }
            }
        }
        Csr::from_triplets(rows.len(), cols.len(), &triplets).expect("indices are in range by construction")
    }

    /// Scales column j by `s[j]`.
    pub fn scale_cols(&self, s: &[f64]) -> Csr {
        let mut out = self.clone();
        for (k, c) in out.indices.iter().enumerate() {
            out.data[k] *= s[*c];
        }
        out
    }

    /// `A + sI` for a square matrix.
    pub fn add_diagonal(&self, s: f64) -> Csr {
        let mut t: Vec<(usize, usize, f64)> = (0..self.rows).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect();
        t.extend((0..self.rows.min(self.cols)).map(|i| (i, i, s)));
        Csr::from_triplets(self.rows, self.cols, &t).expect("indices come from the matrix")
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Sum of absolute values per row.
    pub fn abs_row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).map(|e| e.1.abs()).sum()).collect()
    }

    /// Sum of absolute values per column.
    pub fn abs_col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for (k, c) in self.indices.iter().enumerate() {
            s[*c] += self.data[k].abs();
        }
        s
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CgOptions {
    /// Relative residual target `|r| ≤ tol·|b|`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Conjugate gradients for a symmetric positive semidefinite operator.
///
/// With a consistent right-hand side of a singular system the iterates stay
/// in the range of the operator, so the minimum-norm solution is returned
/// when starting from zero. `project` (if given) is applied to the right-hand
/// side and every search direction to remove a known kernel.
pub fn conjugate_gradient<A>(
    apply: A,
    b: &[f64],
    x0: Option<&[f64]>,
    project: Option<&dyn Fn(&mut [f64])>,
    opts: CgOptions,
) -> Result<(Vec<f64>, CgReport)>
where
    A: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut rhs = b.to_vec();
    if let Some(p) = project {
        p(&mut rhs);
    }
    let bnorm = norm2(&rhs);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 && x0.is_none() {
        return Ok((x, CgReport { iterations: 0, residual: 0.0 }));
    }
    let ax = apply(&x);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if let Some(p) = project {
        p(&mut r);
    }
    let target = opts.tol * bnorm.max(f64::MIN_POSITIVE);
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let mut it = 0;
    while rr.sqrt() > target && it < opts.max_iters {
        let ad = apply(&d);
        let dad = dot(&d, &ad);
        if dad <= 0.0 {
            break;
        }
        let alpha = rr / dad;
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        if let Some(p) = project {
            p(&mut r);
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
        it += 1;
    }
    let residual = rr.sqrt() / bnorm.max(f64::MIN_POSITIVE);
    if rr.sqrt() > target.max(1e-300) * 1e3 {
        return Err(Error::NotConverged { iterations: it, gap: residual });
    }
    Ok((x, CgReport { iterations: it, residual }))
}

/// Removes the mean of a vector (kernel of a connected Neumann Laplacian).
pub fn remove_mean(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_transpose_and_products() {
        let a = Csr::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (0, 0, 1.0), (1, 2, 0.0)]).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 3.0]);
        assert_eq!(a.mul_vec_t(&[1.0, 2.0]), a.transpose().mul_vec(&[1.0, 2.0]));
        let ata = a.transpose().matmul(&a).unwrap();
        assert_eq!(ata.to_dense(), a.to_dense().transpose() * a.to_dense());
        assert!(Csr::from_triplets(1, 1, &[(1, 0, 1.0)]).is_err());
    }

    #[test]
    fn cg_solves_path_laplacian() {
        // Neumann Laplacian of a path: singular, consistent after mean removal
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.extend([(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)]);
        }
        let l = Csr::from_triplets(n, n, &t).unwrap();
        let mut b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        remove_mean(&mut b);
        let proj: &dyn Fn(&mut [f64]) = &remove_mean;
        let (x, rep) = conjugate_gradient(|v| l.mul_vec(v), &b, None, Some(proj), CgOptions::default()).unwrap();
        let r: Vec<f64> = l.mul_vec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 1e-10 && rep.iterations <= n + 5);
    }
}
