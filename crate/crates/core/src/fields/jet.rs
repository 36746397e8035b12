//! First-order local data of a vector field under a metric at one point.

use nalgebra::{DMatrix, DVector};

use super::field::{FieldKind, SmoothField};
use super::metric::{sphere_frame, MetricField};
use crate::error::{Error, Result};
use crate::exterior::{AlternatingForm, MetricAtPoint, TangentVec};

/// Value and first derivatives of B at p, in local coordinates.
///
/// On chart metrics local coordinates are the chart coordinates. On the round
/// sphere they are components in the orthonormal tangent frame returned by
/// [`sphere_frame`].
#[derive(Debug, Clone)]
pub struct Jet {
    pub metric: MetricAtPoint,
    pub b: TangentVec,
    /// `cov[(i, j)] = (∇_j B)^i`.
    pub cov: DMatrix<f64>,
    /// `d(B♭)`, computed from partial derivatives (chart) or from the ambient
    /// derivative (sphere), not from the connection.
    pub d_flat: AlternatingForm,
    /// `d g(B, B)`, computed the same way as `d_flat`.
    pub d_norm_sq: AlternatingForm,
    pub frame: Option<DMatrix<f64>>,
}

impl Jet {
    pub fn new(field: &SmoothField, metric: &MetricField, p: &[f64]) -> Result<Jet> {
        if field.kind() != FieldKind::Vector {
            return Err(Error::Unsupported(format!("{} is not a vector field", field.name())));
        }
        if field.dim() != metric.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: metric.ambient_dim(), found: field.dim() });
        }
        if metric.is_embedded() {
            Self::on_sphere(field, metric, p)
        } else {
            Self::in_chart(field, metric, p)
        }
    }

    fn in_chart(field: &SmoothField, metric: &MetricField, p: &[f64]) -> Result<Jet> {
        let n = field.dim();
        let b = field.value(p)?;
        let jac = field.jacobian(p)?;
        let (g, dg) = metric.chart_derivatives(p)?;
        let m = MetricAtPoint::new(g.clone(), 1)?;
        let gamma = super::metric::Christoffel::from_metric(m.inverse(), &dg);
        let cov = DMatrix::from_fn(n, n, |i, j| {
            jac[(i, j)] + (0..n).map(|k| gamma.get(i, j, k) * b[k]).sum::<f64>()
        });
        // ∂_k (B♭)_i = ∂_k g_ij B^j + g_ij ∂_k B^j
        let dflat_partial = DMatrix::from_fn(n, n, |k, i| {
            (0..n).map(|j| dg[k][(i, j)] * b[j] + g[(i, j)] * jac[(j, k)]).sum::<f64>()
        });
        let mut d_flat = AlternatingForm::zero(n, 2);
        for i in 0..n {
            for j in i + 1..n {
                d_flat.set_component(&[i, j], dflat_partial[(i, j)] - dflat_partial[(j, i)]);
            }
        }
        let gb = &g * DVector::from_column_slice(&b);
        let d_norm: Vec<f64> = (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += dg[k][(i, j)] * b[i] * b[j];
                    }
                    s += 2.0 * gb[i] * jac[(i, k)];
                }
                s
            })
            .collect();
        Ok(Jet {
            metric: m,
            b: TangentVec::new(b),
            cov,
            d_flat,
            d_norm_sq: AlternatingForm::from_one_form(&d_norm),
            frame: None,
        })
    }

    fn on_sphere(field: &SmoothField, metric: &MetricField, p: &[f64]) -> Result<Jet> {
        let e = sphere_frame(p)?;
        let b_amb = DVector::from_vec(field.value(p)?);
        let jac = field.jacobian(p)?;
        let b = e.transpose() * &b_amb;
        // Gauss formula: tangential part of the ambient derivative.
        let a = e.transpose() * &jac * &e;
        let n = 3;
        let mut cov = a.clone();
        let mut dflat = DMatrix::from_fn(n, n, |i, j| a[(j, i)] - a[(i, j)]);
        let mut dnorm: Vec<f64> = (0..n).map(|k| 2.0 * (0..n).map(|c| b[c] * a[(c, k)]).sum::<f64>()).collect();
        let mut scale = 1.0;
        if metric.has_factors() {
            let (u, du) = metric.log_factor(p)?;
            let bu: f64 = (0..n).map(|i| du[i] * b[i]).sum();
            // ∇̄_X Y = ∇_X Y + X(u) Y + Y(u) X − g(X, Y) grad u
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += du[j] * b[i] - b[j] * du[i] + if i == j { bu } else { 0.0 };
                }
            }
            scale = (2.0 * u).exp();
            let bsq = b.norm_squared();
            // d(e^{2u} B♭) = e^{2u} (2 du ∧ B♭ + dB♭), d(e^{2u}|B|²) = e^{2u} (2|B|² du + d|B|²)
            dflat = DMatrix::from_fn(n, n, |i, j| scale * (2.0 * (du[i] * b[j] - du[j] * b[i]) + dflat[(i, j)]));
            dnorm = (0..n).map(|k| scale * (2.0 * bsq * du[k] + dnorm[k])).collect();
        }
        let mut d_flat = AlternatingForm::zero(n, 2);
        for i in 0..n {
            for j in i + 1..n {
                d_flat.set_component(&[i, j], dflat[(i, j)]);
            }
        }
        Ok(Jet {
            metric: MetricAtPoint::new(DMatrix::identity(n, n) * scale, 1)?,
            b: TangentVec(b),
            cov,
            d_flat,
            d_norm_sq: AlternatingForm::from_one_form(&dnorm),
            frame: Some(e),
        })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn norm_sq(&self) -> f64 {
        self.metric.inner(&self.b, &self.b)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    /// `∇_X B` for X in local coordinates.
    pub fn covariant_along(&self, x: &TangentVec) -> TangentVec {
        TangentVec(&self.cov * &x.0)
    }

    /// `∇_B B`.
    pub fn acceleration(&self) -> TangentVec {
        self.covariant_along(&self.b)
    }

    /// `B♭` as a one-form.
    pub fn flat(&self) -> AlternatingForm {
        AlternatingForm::from_one_form((self.metric.matrix() * &self.b.0).as_slice())
    }

    /// Local components of an ambient vector (identity on charts).
    pub fn to_local(&self, v: &[f64]) -> TangentVec {
        match &self.frame {
            Some(e) => TangentVec(e.transpose() * DVector::from_column_slice(v)),
            None => TangentVec::new(v.to_vec()),
        }
    }
}
