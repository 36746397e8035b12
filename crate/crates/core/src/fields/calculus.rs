//! Pointwise differential operators on fields.

use std::sync::Arc;

use super::field::{FieldKind, SmoothField};
use super::jet::Jet;
use super::metric::{Christoffel, MetricField};
use crate::error::{Error, Result};
use crate::exterior::{interior_product, wedge, AlternatingForm, TangentVec};

pub fn christoffel(g: &MetricField, p: &[f64]) -> Result<Christoffel> {
    g.christoffel(p)
}

/// `∇_X Y` at p, in local coordinates of `g`.
pub fn covariant_derivative(g: &MetricField, x: &SmoothField, y: &SmoothField, p: &[f64]) -> Result<TangentVec> {
    let jet = Jet::new(y, g, p)?;
    let xv = x.value(p)?;
    Ok(jet.covariant_along(&jet.to_local(&xv)))
}

/// `dω` at p from the field's jacobian. Scalars count as 0-forms.
pub fn exterior_derivative(omega: &SmoothField, p: &[f64]) -> Result<AlternatingForm> {
    let k = match omega.kind() {
        FieldKind::Scalar => 0,
        FieldKind::Form(k) => k,
        FieldKind::Vector => {
            return Err(Error::Unsupported("exterior derivative of a vector field; lower it first".into()))
        }
    };
    let n = omega.dim();
    if k >= n {
        return Err(Error::InvalidDegree { op: "exterior_derivative", degree: k });
    }
    let jac = omega.jacobian(p)?;
    let mut out = AlternatingForm::zero(n, k + 1);
    for j in 0..n {
        let column: Vec<f64> = jac.column(j).iter().copied().collect();
        let partial = AlternatingForm::new(n, k, column)?;
        out = &out + &wedge(&AlternatingForm::dx(n, j), &partial)?;
    }
    Ok(out)
}

/// The flux form `β = ι_B μ_g` as an (n−1)-form field (chart metrics only).
///
/// Its jacobian falls back to finite differences.
pub fn associated_flux_form(b: &SmoothField, g: &MetricField) -> Result<SmoothField> {
    if b.kind() != FieldKind::Vector {
        return Err(Error::Unsupported(format!("{} is not a vector field", b.name())));
    }
    if g.is_embedded() {
        return Err(Error::Unsupported("flux form fields need chart coordinates".into()));
    }
    if b.dim() != g.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: g.ambient_dim(), found: b.dim() });
    }
    let n = b.dim();
    let field = b.clone();
    let metric = g.clone();
    let mut out = SmoothField::new(
        format!("flux_{}", b.name()),
        FieldKind::Form(n - 1),
        n,
        Arc::new(move |p| match (field.eval_unchecked(p), metric.at(p)) {
            (Ok(v), Ok(m)) => interior_product(&TangentVec::new(v), &m.volume_form())
                .map(|f| f.into_comps())
                .unwrap_or_else(|_| vec![f64::NAN; n]),
            _ => vec![f64::NAN; n],
        }),
    )
    .with_fd(b.fd_options());
    if let Some(d) = b.domain() {
        out = out.with_domain(d.clone());
    }
    Ok(out)
}

/// Pointwise flux form value `ι_{B(p)} μ_g(p)` in local coordinates.
pub fn flux_form_at(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<AlternatingForm> {
    let m = g.at(p)?;
    let v = b.value(p)?;
    let local = match g.frame(p)? {
        Some(e) => TangentVec(e.transpose() * nalgebra::DVector::from_vec(v)),
        None => TangentVec::new(v),
    };
    interior_product(&local, &m.volume_form())
}

/// `div B = tr ∇B`. With `⋆B♭ = ι_B μ` this is exactly `⋆d⋆B♭`, and
/// `(1/√g) ∂_i(√g B^i)` in chart coordinates.
pub fn divergence(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<f64> {
    let jet = Jet::new(b, g, p)?;
    Ok(jet.cov.trace())
}
