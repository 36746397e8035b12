//! Pointwise exterior algebra over an n-dimensional inner-product space.
//!
//! Forms store their coefficients against the basis `dx^I`, where `I` runs over
//! strictly increasing multi-indices in lexicographic order. Indices are
//! zero-based throughout (`dx^0` is the first coordinate differential).

use std::ops::{Add, Index, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension for pointwise algebra.
pub const MAX_DIM: usize = 8;

/// Relative tolerance used by [`rank_of_two_form`] unless overridden.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

struct BasisTables {
    // [n][k] -> subset bitmasks in lexicographic order
    subsets: Vec<Vec<Vec<u32>>>,
    // [n][mask] -> position of mask among the subsets of its size
    position: Vec<Vec<usize>>,
}

fn tables() -> &'static BasisTables {
    static TABLES: OnceLock<BasisTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut subsets = Vec::with_capacity(MAX_DIM + 1);
        let mut position = Vec::with_capacity(MAX_DIM + 1);
        for n in 0..=MAX_DIM {
            let mut per_k = vec![Vec::new(); n + 1];
            let mut pos = vec![0usize; 1 << n];
            for k in 0..=n {
                let mut out = Vec::new();
                lex_subsets(n, k, 0, 0, &mut out);
                for (i, &m) in out.iter().enumerate() {
                    pos[m as usize] = i;
                }
                per_k[k] = out;
            }
            subsets.push(per_k);
            position.push(pos);
        }
        BasisTables { subsets, position }
    })
}

fn lex_subsets(n: usize, k: usize, start: usize, mask: u32, out: &mut Vec<u32>) {
    if k == 0 {
        out.push(mask);
        return;
    }
    for i in start..n {
        if n - i < k {
            break;
        }
        lex_subsets(n, k - 1, i + 1, mask | (1 << i), out);
    }
}

/// Basis multi-indices of degree `k` in dimension `n`, as bitmasks.
pub fn basis_masks(n: usize, k: usize) -> &'static [u32] {
    &tables().subsets[n][k]
}

/// Position of a multi-index (bitmask) within its degree's basis.
pub fn mask_position(n: usize, mask: u32) -> usize {
    tables().position[n][mask as usize]
}

/// Sorted coordinate indices of a bitmask.
pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sign of the permutation that sorts the concatenation `a ++ b` (disjoint masks).
pub fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A degree-k alternating multilinear form on an n-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternatingForm {
    dim: usize,
    degree: usize,
    comps: Vec<f64>,
}

impl AlternatingForm {
    pub fn new(dim: usize, degree: usize, comps: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if degree > dim {
            return Err(Error::InvalidDegree { op: "form", degree });
        }
        let expected = binomial(dim, degree);
        if comps.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: comps.len() });
        }
        Ok(Self { dim, degree, comps })
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim);
        Self { dim, degree, comps: vec![0.0; binomial(dim, degree)] }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self { dim, degree: 0, comps: vec![value] }
    }

    /// The basis form `dx^{i1} ∧ … ∧ dx^{ik}`; indices need not be sorted.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        check_dim(dim)?;
        let mut out = Self::scalar(dim, 1.0);
        for &i in indices {
            if i >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: i + 1 });
            }
            out = wedge(&out, &Self::dx(dim, i))?;
        }
        Ok(out)
    }

    /// The coordinate differential `dx^i`.
    pub fn dx(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim, 1);
        f.comps[i] = 1.0;
        f
    }

    pub fn from_one_form(comps: &[f64]) -> Self {
        Self { dim: comps.len(), degree: 1, comps: comps.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [f64] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<f64> {
        self.comps
    }

    /// Coefficient of `dx^I` for sorted indices `I`.
    pub fn component(&self, indices: &[usize]) -> f64 {
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        self.comps[mask_position(self.dim, mask)]
    }

    pub fn set_component(&mut self, indices: &[usize], value: f64) {
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        let pos = mask_position(self.dim, mask);
        self.comps[pos] = value;
    }

    /// Value of a degree-0 form.
    pub fn as_scalar(&self) -> f64 {
        debug_assert_eq!(self.degree, 0);
        self.comps[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, degree: self.degree, comps: self.comps.iter().map(|c| c * s).collect() }
    }

    /// Evaluates the form on `k` vectors: `ω(v_1, …, v_k)`.
    pub fn evaluate(&self, vectors: &[&[f64]]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::InvalidDegree { op: "evaluate", degree: vectors.len() });
        }
        let k = self.degree;
        let mut total = 0.0;
        for (pos, &mask) in basis_masks(self.dim, k).iter().enumerate() {
            let c = self.comps[pos];
            if c == 0.0 {
                continue;
            }
            let idx = mask_indices(mask);
            let m = DMatrix::from_fn(k, k, |r, col| vectors[col][idx[r]]);
            total += c * if k == 0 { 1.0 } else { m.determinant() };
        }
        Ok(total)
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.degree == other.degree
    }
}

impl Add for &AlternatingForm {
    type Output = AlternatingForm;
    fn add(self, rhs: Self) -> AlternatingForm {
        assert!(self.same_shape(rhs), "adding forms of different shape");
        AlternatingForm {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &AlternatingForm {
    type Output = AlternatingForm;
    fn sub(self, rhs: Self) -> AlternatingForm {
        assert!(self.same_shape(rhs), "subtracting forms of different shape");
        AlternatingForm {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &AlternatingForm {
    type Output = AlternatingForm;
    fn mul(self, s: f64) -> AlternatingForm {
        self.scale(s)
    }
}

impl Neg for &AlternatingForm {
    type Output = AlternatingForm;
    fn neg(self) -> AlternatingForm {
        self.scale(-1.0)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidDimension(format!("dimension {dim} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// A tangent vector given by its coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec(pub DVector<f64>);

impl TangentVec {
    pub fn new(components: Vec<f64>) -> Self {
        Self(DVector::from_vec(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }
}

impl Index<usize> for TangentVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Riemannian metric and orientation at a single point.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
    orientation: f64,
}

impl MetricAtPoint {
    pub fn new(matrix: DMatrix<f64>, orientation: i8) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::NotSpd("matrix is not square".into()));
        }
        check_dim(n)?;
        let scale = matrix.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::NotSpd(format!("asymmetric entry ({i},{j})")));
                }
            }
        }
        if !matrix.iter().all(|x| x.is_finite()) {
            return Err(Error::NotSpd("non-finite entry".into()));
        }
        let chol = nalgebra::Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))?;
        let l = chol.l();
        let det = (0..n).map(|i| l[(i, i)] * l[(i, i)]).product::<f64>();
        if !(det > 0.0) {
            return Err(Error::NotSpd("non-positive determinant".into()));
        }
        let inverse = chol.inverse();
        let orientation = if orientation < 0 { -1.0 } else { 1.0 };
        Ok(Self { matrix, inverse, det, orientation })
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), 1).expect("identity is SPD")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(entries)), 1)
    }

    /// The metric `factor · g` (same orientation).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.matrix * factor, self.orientation as i8)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn sqrt_det(&self) -> f64 {
        self.det.sqrt()
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn inner(&self, u: &TangentVec, v: &TangentVec) -> f64 {
        u.0.dot(&(&self.matrix * &v.0))
    }

    pub fn norm(&self, v: &TangentVec) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Oriented Riemannian volume form `±√det(g) dx^0 ∧ … ∧ dx^{n-1}`.
    pub fn volume_form(&self) -> AlternatingForm {
        let mut top = AlternatingForm::zero(self.dim(), self.dim());
        top.comps[0] = self.orientation * self.sqrt_det();
        top
    }

    /// Induced inner product on degree-k forms: minors of the inverse metric.
    pub fn form_gram(&self, k: usize) -> DMatrix<f64> {
        let n = self.dim();
        let masks = basis_masks(n, k);
        let idx: Vec<Vec<usize>> = masks.iter().map(|&m| mask_indices(m)).collect();
        DMatrix::from_fn(masks.len(), masks.len(), |a, b| {
            if k == 0 {
                return 1.0;
            }
            DMatrix::from_fn(k, k, |r, c| self.inverse[(idx[a][r], idx[b][c])]).determinant()
        })
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Exterior product `a ∧ b`.
pub fn wedge(a: &AlternatingForm, b: &AlternatingForm) -> Result<AlternatingForm> {
    check_same_dim(a.dim, b.dim)?;
    let n = a.dim;
    if a.degree + b.degree > n {
        return Err(Error::DegreeOverflow { left: a.degree, right: b.degree, dim: n });
    }
    let mut out = AlternatingForm::zero(n, a.degree + b.degree);
    let am = basis_masks(n, a.degree);
    let bm = basis_masks(n, b.degree);
    for (i, &ma) in am.iter().enumerate() {
        let ca = a.comps[i];
        if ca == 0.0 {
            continue;
        }
        for (j, &mb) in bm.iter().enumerate() {
            let cb = b.comps[j];
            if cb == 0.0 || ma & mb != 0 {
                continue;
            }
            out.comps[mask_position(n, ma | mb)] += merge_sign(ma, mb) * ca * cb;
        }
    }
    Ok(out)
}

/// Hodge star, computed by raising indices with minors of `g⁻¹` and scaling by `√det g`.
pub fn hodge_star(m: &MetricAtPoint, a: &AlternatingForm) -> Result<AlternatingForm> {
    check_same_dim(m.dim(), a.dim)?;
    let n = a.dim;
    let k = a.degree;
    let raised = if k == 0 {
        DVector::from_element(1, a.comps[0])
    } else {
        m.form_gram(k) * DVector::from_column_slice(&a.comps)
    };
    let full = (1u32 << n) - 1;
    let mut out = AlternatingForm::zero(n, n - k);
    for (i, &mi) in basis_masks(n, k).iter().enumerate() {
        let mj = full & !mi;
        out.comps[mask_position(n, mj)] += merge_sign(mi, mj) * raised[i];
    }
    Ok(out.scale(m.sqrt_det() * m.orientation))
}

/// Interior product `ι_v a`.
pub fn interior_product(v: &TangentVec, a: &AlternatingForm) -> Result<AlternatingForm> {
    check_same_dim(a.dim, v.dim())?;
    if a.degree == 0 {
        return Err(Error::InvalidDegree { op: "interior_product", degree: 0 });
    }
    let n = a.dim;
    let mut out = AlternatingForm::zero(n, a.degree - 1);
    for (pos, &mask) in basis_masks(n, a.degree).iter().enumerate() {
        let c = a.comps[pos];
        if c == 0.0 {
            continue;
        }
        for (p, i) in mask_indices(mask).into_iter().enumerate() {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            out.comps[mask_position(n, mask & !(1 << i))] += sign * v[i] * c;
        }
    }
    Ok(out)
}

/// Lowers a vector to a 1-form: `v♭ = g(v, ·)`.
pub fn flat(m: &MetricAtPoint, v: &TangentVec) -> Result<AlternatingForm> {
    check_same_dim(m.dim(), v.dim())?;
    let lowered = m.matrix() * &v.0;
    Ok(AlternatingForm::from_one_form(lowered.as_slice()))
}

/// Raises a 1-form to a vector: `a♯ = g⁻¹ a`.
pub fn sharp(m: &MetricAtPoint, a: &AlternatingForm) -> Result<TangentVec> {
    check_same_dim(m.dim(), a.dim)?;
    if a.degree != 1 {
        return Err(Error::InvalidDegree { op: "sharp", degree: a.degree });
    }
    Ok(TangentVec(m.inverse() * DVector::from_column_slice(&a.comps)))
}

/// Pointwise norm `|a| = √⋆(a ∧ ⋆a)`.
pub fn form_norm(m: &MetricAtPoint, a: &AlternatingForm) -> Result<f64> {
    let star_a = hodge_star(m, a)?;
    let top = wedge(a, &star_a)?;
    let sq = hodge_star(m, &top)?.as_scalar();
    Ok(sq.max(0.0).sqrt())
}

/// Induced inner product of two forms of equal degree.
pub fn form_inner(m: &MetricAtPoint, a: &AlternatingForm, b: &AlternatingForm) -> Result<f64> {
    check_same_dim(m.dim(), a.dim)?;
    check_same_dim(a.dim, b.dim)?;
    if a.degree != b.degree {
        return Err(Error::InvalidDegree { op: "form_inner", degree: b.degree });
    }
    if a.degree == 0 {
        return Ok(a.comps[0] * b.comps[0]);
    }
    let g = m.form_gram(a.degree);
    let av = DVector::from_column_slice(&a.comps);
    let bv = DVector::from_column_slice(&b.comps);
    Ok(av.dot(&(g * bv)))
}

/// The p-fold exterior power `ω ∧ … ∧ ω` of a 2-form.
pub fn wedge_power(omega: &AlternatingForm, p: usize) -> Result<AlternatingForm> {
    if omega.degree != 2 {
        return Err(Error::InvalidDegree { op: "wedge_power", degree: omega.degree });
    }
    if p == 0 {
        return Err(Error::InvalidParams("wedge power must be at least 1".into()));
    }
    let n = omega.dim;
    if 2 * p > n {
        return Err(Error::DegreeOverflow { left: 2 * (p - 1), right: 2, dim: n });
    }
    let mut acc = omega.clone();
    for _ in 1..p {
        acc = wedge(&acc, omega)?;
    }
    Ok(acc)
}

fn euclid_norm(a: &AlternatingForm) -> f64 {
    a.comps.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Rank of a 2-form: the largest r with `ω^r ≠ 0`, zero for the zero form.
///
/// Numerically `ω^{p+1}` counts as zero when `|ω^{p+1}| < tol·|ω^p|·|ω|`
/// (coefficient norms, so the result does not depend on any metric).
pub fn rank_of_two_form(omega: &AlternatingForm, tol: f64) -> Result<usize> {
    if omega.degree != 2 {
        return Err(Error::InvalidDegree { op: "rank_of_two_form", degree: omega.degree });
    }
    let base = euclid_norm(omega);
    if base == 0.0 {
        return Ok(0);
    }
    let n = omega.dim;
    let mut power = omega.clone();
    let mut p = 1;
    loop {
        if 2 * (p + 1) > n {
            return Ok(p);
        }
        let next = wedge(&power, omega)?;
        if euclid_norm(&next) < tol * euclid_norm(&power) * base {
            return Ok(p);
        }
        power = next;
        p += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wedge_basis_examples() {
        let w = wedge(&AlternatingForm::dx(3, 0), &AlternatingForm::dx(3, 1)).unwrap();
        assert_eq!(w.comps(), &[1.0, 0.0, 0.0]);
        let z = wedge(&AlternatingForm::dx(3, 0), &AlternatingForm::dx(3, 0)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let s = &AlternatingForm::dx(3, 0) + &AlternatingForm::dx(3, 1);
        let w = wedge(&s, &AlternatingForm::dx(3, 2)).unwrap();
        // lexicographic order: (0,1), (0,2), (1,2)
        assert_eq!(w.comps(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn wedge_errors() {
        let a = AlternatingForm::dx(3, 0);
        let b = AlternatingForm::dx(4, 0);
        assert!(matches!(wedge(&a, &b), Err(Error::DimensionMismatch { .. })));
        let two = AlternatingForm::basis(3, &[0, 1]).unwrap();
        assert!(matches!(wedge(&two, &two), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn star_euclidean_and_scaled() {
        let e = MetricAtPoint::euclidean(3);
        let s = hodge_star(&e, &AlternatingForm::dx(3, 0)).unwrap();
        assert_eq!(s, AlternatingForm::basis(3, &[1, 2]).unwrap());
        for c in [0.5, 2.0, 3.7] {
            let m = e.scaled(c * c).unwrap();
            let s = hodge_star(&m, &AlternatingForm::dx(3, 0)).unwrap();
            assert_relative_eq!(s.component(&[1, 2]), c, max_relative = 1e-14);
            assert_eq!(s.component(&[0, 1]), 0.0);
        }
    }

    #[test]
    fn star_two_dim_conformal_invariance() {
        for u in [-1.3, 0.0, 0.4, 2.0] {
            let m = MetricAtPoint::euclidean(2).scaled((2.0 * u as f64).exp()).unwrap();
            let s = hodge_star(&m, &AlternatingForm::dx(2, 0)).unwrap();
            assert_relative_eq!(s.comps()[1], 1.0, max_relative = 1e-14);
            assert!(s.comps()[0].abs() < 1e-15);
        }
    }

    #[test]
    fn interior_examples() {
        let a = AlternatingForm::basis(3, &[0, 1]).unwrap();
        let r = interior_product(&TangentVec::basis(3, 0), &a).unwrap();
        assert_eq!(r, AlternatingForm::dx(3, 1));
        let r = interior_product(&TangentVec::basis(3, 2), &a).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert!(interior_product(&TangentVec::basis(3, 0), &AlternatingForm::scalar(3, 1.0)).is_err());
    }

    #[test]
    fn flat_examples() {
        let e = MetricAtPoint::euclidean(3);
        assert_eq!(flat(&e, &TangentVec::basis(3, 0)).unwrap(), AlternatingForm::dx(3, 0));
        let m = MetricAtPoint::diagonal(&[4.0, 1.0, 1.0]).unwrap();
        assert_eq!(flat(&m, &TangentVec::basis(3, 0)).unwrap().comps(), &[4.0, 0.0, 0.0]);
        assert!(sharp(&m, &AlternatingForm::basis(3, &[0, 1]).unwrap()).is_err());
    }

    #[test]
    fn norm_examples() {
        let e = MetricAtPoint::euclidean(3);
        let a = AlternatingForm::basis(3, &[0, 1]).unwrap();
        assert_relative_eq!(form_norm(&e, &a).unwrap(), 1.0, max_relative = 1e-15);
        let c = 2.5;
        let m = e.scaled(c * c).unwrap();
        assert_relative_eq!(form_norm(&m, &AlternatingForm::dx(3, 0)).unwrap(), 1.0 / c, max_relative = 1e-14);
    }

    #[test]
    fn rank_examples() {
        let w12 = AlternatingForm::basis(5, &[0, 1]).unwrap();
        assert_eq!(rank_of_two_form(&w12, DEFAULT_RANK_TOL).unwrap(), 1);
        let w = &w12 + &AlternatingForm::basis(5, &[2, 3]).unwrap();
        assert_eq!(rank_of_two_form(&w, DEFAULT_RANK_TOL).unwrap(), 2);
        let sq = wedge_power(&w, 2).unwrap();
        assert_relative_eq!(sq.component(&[0, 1, 2, 3]), 2.0);
        assert_eq!(rank_of_two_form(&AlternatingForm::zero(5, 2), DEFAULT_RANK_TOL).unwrap(), 0);
        // d(dz + y dx) = dy ∧ dx
        let d_alpha = AlternatingForm::basis(3, &[1, 0]).unwrap();
        assert_eq!(d_alpha.component(&[0, 1]), -1.0);
        assert_eq!(rank_of_two_form(&d_alpha, DEFAULT_RANK_TOL).unwrap(), 1);
        let alpha = &AlternatingForm::dx(3, 2) + &AlternatingForm::dx(3, 0).scale(0.7);
        let top = wedge(&alpha, &d_alpha).unwrap();
        assert!(top.max_abs() > 0.5);
        assert!(rank_of_two_form(&AlternatingForm::dx(3, 0), 1e-9).is_err());
    }

    #[test]
    fn metric_rejects_non_spd() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(MetricAtPoint::new(bad, 1), Err(Error::NotSpd(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(MetricAtPoint::new(asym, 1).is_err());
    }

    #[test]
    fn volume_form_and_orientation() {
        let m = MetricAtPoint::new(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0])), -1).unwrap();
        let mu = m.volume_form();
        assert_relative_eq!(mu.comps()[0], -6.0);
        // ⋆1 = μ
        let one = hodge_star(&m, &AlternatingForm::scalar(2, 1.0)).unwrap();
        assert_relative_eq!(one.comps()[0], -6.0);
    }
}
