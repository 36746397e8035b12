//! Dense two-phase simplex (Bland's rule) used as an LP oracle.

use nalgebra::DMatrix;

const EPS: f64 = 1e-10;

struct Tableau {
    t: DMatrix<f64>,
    z: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.t.ncols();
        let p = self.t[(r, j)];
        for c in 0..cols {
            self.t[(r, c)] /= p;
        }
        for i in 0..self.t.nrows() {
            if i != r {
                let f = self.t[(i, j)];
                if f != 0.0 {
                    for c in 0..cols {
                        self.t[(i, c)] -= f * self.t[(r, c)];
                    }
                }
            }
        }
        let f = self.z[j];
        for c in 0..cols {
            self.z[c] -= f * self.t[(r, c)];
        }
        self.basis[r] = j;
    }

    /// Runs to optimality over columns `< allowed`; false if unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let rhs = self.t.ncols() - 1;
        loop {
            let Some(j) = (0..allowed).find(|&j| self.z[j] < -EPS) else { return true };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.t.nrows() {
                let a = self.t[(i, j)];
                if a > EPS {
                    let ratio = self.t[(i, rhs)] / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - 1e-14 || (ratio <= r + 1e-14 && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }
}

/// Minimizes `cᵀx` subject to `A x = b`, `x ≥ 0`. Returns the optimal value
/// and point, or None if infeasible or unbounded.
pub fn simplex(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (m, n) = a.shape();
    let mut t = DMatrix::zeros(m, n + m + 1);
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = s * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, n + m)] = s * b[i];
    }
    // phase 1: minimize the artificial sum
    let mut z = vec![0.0; n + m + 1];
    for i in 0..m {
        for c in 0..n + m + 1 {
            if !(n..n + m).contains(&c) {
                z[c] -= t[(i, c)];
            }
        }
    }
    let mut tab = Tableau { t, z, basis: (n..n + m).collect() };
    tab.run(n + m);
    if -tab.z[n + m] > 1e-8 {
        return None;
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[(r, j)].abs() > 1e-9) {
                tab.pivot(r, j);
            }
        }
    }
    // phase 2
    let mut z = vec![0.0; n + m + 1];
    z[..n].copy_from_slice(c);
    for r in 0..m {
        let cb = if tab.basis[r] < n { c[tab.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for col in 0..n + m + 1 {
                z[col] -= cb * tab.t[(r, col)];
            }
        }
    }
    tab.z = z;
    if !tab.run(n) {
        return None;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.t[(r, n + m)];
        }
    }
    Some((-tab.z[n + m], x))
}
