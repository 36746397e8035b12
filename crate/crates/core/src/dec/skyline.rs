//! Envelope Cholesky for sparse SPD matrices after reverse Cuthill–McKee
//! ordering. Grid-like 2D systems have an envelope of width about one grid
//! row, so a factorization costs `O(rows · width²)`.

use super::sparse::Csr;
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee permutation of a symmetric sparsity pattern:
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &Csr) -> Vec<usize> {
    let n = a.rows;
    let degree: Vec<usize> = (0..n).map(|r| a.row(r).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut nb: Vec<usize> = a.row(v).map(|e| e.0).filter(|&u| !visited[u]).collect();
            nb.sort_by_key(|&u| (degree[u], u));
            for u in nb {
                visited[u] = true;
                order.push(u);
            }
        }
    }
    order.reverse();
    order
}

/// Lower envelope factor `L` with `A = L Lᵀ` in a fixed ordering.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors a symmetric positive definite matrix (both triangles stored).
    pub fn factor(a: &Csr) -> Result<Self> {
        Self::factor_with(a, reverse_cuthill_mckee(a))
    }

    pub fn factor_with(a: &Csr, perm: Vec<usize>) -> Result<Self> {
        let n = a.rows;
        if a.cols != n || perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.cols });
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (c, _) in a.row(old) {
                let j = inv[c];
                if j < first[new] {
                    first[new] = j;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (c, v) in a.row(old) {
                let j = inv[c];
                if j <= new {
                    values[start[new] + j - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..=i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let mut s = values[si + j - fi];
                let li = &values[si + k0 - fi..si + j - fi];
                let lj = &values[sj + k0 - fj..sj + j - fj];
                s -= li.iter().zip(lj).map(|(x, y)| x * y).sum::<f64>();
                if j < i {
                    values[si + j - fi] = s / values[sj + j - fj];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotSpd(format!("pivot {s:e} at row {i}")));
                    }
                    values[si + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { perm, first, start, values })
    }

    /// Entries stored in the envelope.
    pub fn envelope(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let s: f64 = self.values[si..si + i - fi].iter().zip(&x[fi..i]).map(|(l, y)| l * y).sum();
            x[i] = (x[i] - s) / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            x[i] /= self.values[si + i - fi];
            let xi = x[i];
            for (k, l) in self.values[si..si + i - fi].iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}
