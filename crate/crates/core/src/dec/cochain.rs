//! Cochains and the de Rham map from smooth fields.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use super::complex::Complex;
use crate::error::{Error, Result};
use crate::exterior::{interior_product, AlternatingForm, MetricAtPoint, TangentVec};
use crate::fields::{FieldKind, SmoothField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(cx: &Complex, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > cx.dim {
            return Err(Error::InvalidDegree { op: "cochain", degree });
        }
        if values.len() != cx.count(degree) {
            return Err(Error::DimensionMismatch { expected: cx.count(degree), found: values.len() });
        }
        Ok(Self { degree, values })
    }

    pub fn zeros(cx: &Complex, degree: usize) -> Self {
        Self { degree, values: vec![0.0; cx.count(degree)] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check(&self, cx: &Complex) -> Result<()> {
        if self.degree > cx.dim || self.values.len() != cx.count(self.degree) {
            return Err(Error::DimensionMismatch { expected: cx.count(self.degree.min(cx.dim)), found: self.values.len() });
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { degree: self.degree, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Coboundary `dω`.
    pub fn d(&self, cx: &Complex) -> Result<Self> {
        self.check(cx)?;
        if self.degree == cx.dim {
            return Err(Error::InvalidDegree { op: "coboundary", degree: self.degree });
        }
        Ok(Self { degree: self.degree + 1, values: cx.d[self.degree].mul_vec(&self.values) })
    }

    /// Restriction to boundary cells (other entries zeroed).
    pub fn boundary_part(&self, cx: &Complex) -> Self {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            if !cx.boundary[self.degree][i] {
                *v = 0.0;
            }
        }
        out
    }

    /// Discrete L² energy `Σ ⋆_k ω²`.
    pub fn l2_energy(&self, cx: &Complex) -> f64 {
        cx.hodge(self.degree).iter().zip(&self.values).map(|(w, v)| w * v * v).sum()
    }
}

impl Add for &Cochain {
    type Output = Cochain;
    fn add(self, o: &Cochain) -> Cochain {
        assert_eq!(self.degree, o.degree);
        Cochain { degree: self.degree, values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Cochain {
    type Output = Cochain;
    fn sub(self, o: &Cochain) -> Cochain {
        assert_eq!(self.degree, o.degree);
        Cochain { degree: self.degree, values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect() }
    }
}

/// Integrates a pointwise k-form over every k-cell with `order` Gauss points per axis.
pub fn integrate_form<F>(cx: &Complex, k: usize, order: usize, form: F) -> Result<Cochain>
where
    F: Fn(&[f64]) -> Result<AlternatingForm>,
{
    if k > cx.dim {
        return Err(Error::InvalidDegree { op: "integrate_form", degree: k });
    }
    let mut values = Vec::with_capacity(cx.count(k));
    for i in 0..cx.count(k) {
        let mut s = 0.0;
        for node in cx.cell_nodes(k, i, order) {
            let w = form(&node.point)?;
            if w.degree() != k {
                return Err(Error::InvalidDegree { op: "integrate_form", degree: w.degree() });
            }
            let refs: Vec<&[f64]> = node.tangents.iter().map(|t| t.as_slice()).collect();
            s += node.weight * w.evaluate(&refs)?;
        }
        values.push(s);
    }
    Ok(Cochain { degree: k, values })
}

/// de Rham map of a field: k-forms integrate over k-cells, scalars sample at
/// vertices, and vector fields with k = n−1 integrate their Euclidean flux `ι_B dx¹…dxⁿ`.
pub fn sample_to_cochain(field: &SmoothField, cx: &Complex, k: usize) -> Result<Cochain> {
    sample_to_cochain_with(field, cx, k, 3)
}

pub fn sample_to_cochain_with(field: &SmoothField, cx: &Complex, k: usize, order: usize) -> Result<Cochain> {
    let n = cx.dim;
    if field.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: field.dim() });
    }
    match (field.kind(), k) {
        (FieldKind::Scalar, 0) => integrate_form(cx, 0, order, |p| Ok(AlternatingForm::scalar(n, field.scalar(p)?))),
        (FieldKind::Form(j), _) if j == k => integrate_form(cx, k, order, |p| field.form(p)),
        (FieldKind::Vector, _) if k + 1 == n => {
            let mu = MetricAtPoint::euclidean(n).volume_form();
            integrate_form(cx, k, order, |p| interior_product(&TangentVec::new(field.value(p)?), &mu))
        }
        _ => Err(Error::InvalidParams(format!("cannot sample a {:?} field as a {k}-cochain", field.kind()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ChartDomain;
    use std::sync::Arc;

    #[test]
    fn constant_dx_gives_edge_extents() {
        let cx = Complex::build_grid(&ChartDomain::boxed(vec![(0.0, 2.0), (0.0, 1.0)]), &[4, 2]).unwrap();
        let dx = SmoothField::new("dx", FieldKind::Form(1), 2, Arc::new(|_| vec![1.0, 0.0]));
        let c = sample_to_cochain(&dx, &cx, 1).unwrap();
        for i in 0..cx.count(1) {
            let nodes = cx.cell_nodes(1, i, 1);
            assert!((c.values[i] - nodes[0].tangents[0][0]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_forms_are_closed() {
        let cx = Complex::build_grid(&ChartDomain::torus(2), &[8, 8]).unwrap();
        let df = SmoothField::new("dsin", FieldKind::Form(1), 2, Arc::new(|p| vec![p[0].cos(), 0.0]));
        let c = sample_to_cochain(&df, &cx, 1).unwrap();
        assert!(c.d(&cx).unwrap().max_abs() < 1e-14);
    }
}
