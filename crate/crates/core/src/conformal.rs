//! The canonical conformal change `ḡ = |β|²_ĝ ĝ` and its transformation laws.
//!
//! The factor is stored through its logarithm `u = log |B̂|_ĝ`, so every power
//! of `|B̂|` below is an exponential of a multiple of `u`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{hodge_star, form_norm, wedge, AlternatingForm, MetricAtPoint, TangentVec};
use crate::fields::{flux_form_at, FieldKind, Jet, LogFactor, MetricField, SmoothField, DEFAULT_EPS_SUPP};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToBar,
    ToHat,
}

/// A flux source `B̂` with its base metric `ĝ` and the rescaled metric `ḡ`.
#[derive(Debug, Clone)]
pub struct ConformalPair {
    field: SmoothField,
    hat: MetricField,
    bar: MetricField,
    eps_supp: f64,
}

/// Builds `ḡ = |β|²_ĝ ĝ`. Refuses dimension two, where the exponents below
/// divide by `n − 2`; see [`surface_star_invariance`] and
/// [`surface_harmonic_eikonal_test`] instead.
pub fn make_pair(b: &SmoothField, hat: &MetricField) -> Result<ConformalPair> {
    make_pair_eps(b, hat, DEFAULT_EPS_SUPP)
}

pub fn make_pair_eps(b: &SmoothField, hat: &MetricField, eps_supp: f64) -> Result<ConformalPair> {
    let n = hat.dim();
    if n < 3 {
        return Err(Error::InvalidDimension(format!(
            "canonical conformal change needs n >= 3 (got {n}); use surface_star_invariance or surface_harmonic_eikonal_test"
        )));
    }
    if b.kind() != FieldKind::Vector {
        return Err(Error::Unsupported(format!("{} is not a vector field", b.name())));
    }
    if b.dim() != hat.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: hat.ambient_dim(), found: b.dim() });
    }
    if let Some(domain) = b.domain() {
        let probes = domain.sample_halton(64, 0, 0.01);
        let supported = probes.iter().any(|p| Jet::new(b, hat, p).map(|j| j.norm() > eps_supp).unwrap_or(false));
        if !supported {
            return Err(Error::OutOfSupport { magnitude: 0.0, threshold: eps_supp });
        }
    }
    let bar = hat
        .clone()
        .with_factor(LogFactor::NormPower { field: b.clone(), metric: Box::new(hat.clone()), power: 1.0, eps_supp })
        .renamed(format!("{}_canonical", hat.name()));
    Ok(ConformalPair { field: b.clone(), hat: hat.clone(), bar, eps_supp })
}

impl ConformalPair {
    pub fn field(&self) -> &SmoothField {
        &self.field
    }

    pub fn hat(&self) -> &MetricField {
        &self.hat
    }

    pub fn bar(&self) -> &MetricField {
        &self.bar
    }

    pub fn dim(&self) -> usize {
        self.hat.dim()
    }

    pub fn eps_supp(&self) -> f64 {
        self.eps_supp
    }

    /// `u = log |B̂|_ĝ` at p.
    pub fn log_factor(&self, p: &[f64]) -> Result<f64> {
        let jet = Jet::new(&self.field, &self.hat, p)?;
        let nrm = jet.norm();
        if nrm <= self.eps_supp {
            return Err(Error::OutOfSupport { magnitude: nrm, threshold: self.eps_supp });
        }
        Ok(nrm.ln())
    }

    /// `B̂` in local coordinates.
    pub fn b_hat(&self, p: &[f64]) -> Result<TangentVec> {
        let v = self.field.value(p)?;
        Ok(match self.hat.frame(p)? {
            Some(e) => TangentVec(e.transpose() * nalgebra::DVector::from_vec(v)),
            None => TangentVec::new(v),
        })
    }

    /// `B̄ = |B̂|^{−n} B̂` (to_bar) or `B̂ = |B̄|_ḡ^{−n/(n−2)} B̄` (to_hat).
    pub fn transform_vector(&self, direction: Direction, p: &[f64]) -> Result<TangentVec> {
        let n = self.dim() as f64;
        let u = self.log_factor(p)?;
        let b_bar = TangentVec(self.b_hat(p)?.0 * (-n * u).exp());
        match direction {
            Direction::ToBar => Ok(b_bar),
            Direction::ToHat => {
                let g_bar = self.bar.at(p)?;
                let log_bar = 0.5 * g_bar.inner(&b_bar, &b_bar).ln();
                Ok(TangentVec(b_bar.0 * (-n / (n - 2.0) * log_bar).exp()))
            }
        }
    }

    /// `μ̄ = |B̂|ⁿ μ̂` (to_bar) or `μ̂ = |B̄|_ḡ^{n/(n−2)} μ̄` (to_hat).
    pub fn transform_volume(&self, direction: Direction, p: &[f64]) -> Result<AlternatingForm> {
        let n = self.dim() as f64;
        match direction {
            Direction::ToBar => {
                let u = self.log_factor(p)?;
                Ok(self.hat.at(p)?.volume_form().scale((n * u).exp()))
            }
            Direction::ToHat => {
                let (_, bar_norm) = self.transform_norms(p)?;
                Ok(self.bar.at(p)?.volume_form().scale(bar_norm.powf(n / (n - 2.0))))
            }
        }
    }

    /// `(|β|_ĝ, |β|_ḡ)` with `|β|_ḡ = |B̂|^{−(n−2)}`.
    pub fn transform_norms(&self, p: &[f64]) -> Result<(f64, f64)> {
        let n = self.dim() as f64;
        let u = self.log_factor(p)?;
        Ok((u.exp(), (-(n - 2.0) * u).exp()))
    }

    /// `⋆̄β = |B̂|^{−(n−2)} ⋆̂β` (to_bar) or `⋆̂β = |B̄|_ḡ^{−1} ⋆̄β` (to_hat).
    pub fn transform_hodge_beta(&self, direction: Direction, p: &[f64]) -> Result<AlternatingForm> {
        let (_, bar_norm) = self.transform_norms(p)?;
        let beta = flux_form_at(&self.field, &self.hat, p)?;
        match direction {
            Direction::ToBar => Ok(hodge_star(&self.hat.at(p)?, &beta)?.scale(bar_norm)),
            Direction::ToHat => Ok(hodge_star(&self.bar.at(p)?, &beta)?.scale(1.0 / bar_norm)),
        }
    }

    /// The explicit metric `e^{2u} ĝ` at p, assembled directly from `|B̂|²_ĝ`.
    pub fn explicit_bar_metric(&self, p: &[f64]) -> Result<MetricAtPoint> {
        let g_hat = self.hat.at(p)?;
        let b = self.b_hat(p)?;
        g_hat.scaled(g_hat.inner(&b, &b))
    }

    /// Compares every transformation law at p with a direct recomputation
    /// under the explicit metric (relative errors, both directions).
    pub fn law_residuals(&self, p: &[f64]) -> Result<LawResiduals> {
        let g_hat = self.hat.at(p)?;
        let g_bar = self.explicit_bar_metric(p)?;
        let b = self.b_hat(p)?;
        let (mu_hat, mu_bar) = (g_hat.volume_form(), g_bar.volume_form());
        let beta = crate::exterior::interior_product(&b, &mu_hat)?;
        let rel_form = |a: &AlternatingForm, e: &AlternatingForm| (a - e).max_abs() / e.max_abs().max(f64::MIN_POSITIVE);
        let rel = |a: f64, e: f64| (a - e).abs() / e.abs().max(f64::MIN_POSITIVE);

        let metric = (self.bar.at(p)?.matrix() - g_bar.matrix()).amax() / g_bar.matrix().amax();
        // B̄ must represent the same β under μ̄, and map back to B̂
        let b_bar = self.transform_vector(Direction::ToBar, p)?;
        let back = self.transform_vector(Direction::ToHat, p)?;
        let vector = rel_form(&crate::exterior::interior_product(&b_bar, &mu_bar)?, &beta).max((back.0 - &b.0).amax() / b.0.amax());
        let volume = rel(self.transform_volume(Direction::ToBar, p)?.comps()[0], mu_bar.comps()[0])
            .max(rel(self.transform_volume(Direction::ToHat, p)?.comps()[0], mu_hat.comps()[0]));
        let (norm_hat, norm_bar) = self.transform_norms(p)?;
        let norms = rel(norm_hat, form_norm(&g_hat, &beta)?).max(rel(norm_bar, form_norm(&g_bar, &beta)?));
        let hodge = rel_form(&self.transform_hodge_beta(Direction::ToBar, p)?, &hodge_star(&g_bar, &beta)?)
            .max(rel_form(&self.transform_hodge_beta(Direction::ToHat, p)?, &hodge_star(&g_hat, &beta)?));
        Ok(LawResiduals { log_factor: norm_hat.ln(), norm_hat, norm_bar, metric, vector, volume, norms, hodge })
    }
}

/// Per-point norms of β and relative errors of each transformation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawResiduals {
    pub log_factor: f64,
    pub norm_hat: f64,
    pub norm_bar: f64,
    pub metric: f64,
    pub vector: f64,
    pub volume: f64,
    pub norms: f64,
    pub hodge: f64,
}

impl LawResiduals {
    pub fn max(&self) -> f64 {
        self.metric.max(self.vector).max(self.volume).max(self.norms).max(self.hodge)
    }
}

/// Both sides of the L²/L¹ energy identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `∫ |B̂|²_ĝ μ̂`.
    pub l2_sq_hat: f64,
    /// `∫ |B̄|_ḡ μ̄`.
    pub l1_bar: f64,
    pub rel_diff: f64,
    pub points: usize,
    pub skipped: usize,
}

/// Evaluates `∫|B̂|²_ĝ μ̂` and `∫|B̄|_ḡ μ̄` separately. The second uses `B̄` from
/// the vector law and the volume density of `ḡ` assembled from `ĝ` and `|B̂|²`.
pub fn energy_identity(pair: &ConformalPair, quadrature: &Quadrature) -> Result<EnergyReport> {
    if quadrature.is_empty() {
        return Err(Error::InvalidParams("empty quadrature".into()));
    }
    let terms: Vec<Result<Option<(f64, f64)>>> = quadrature
        .points
        .par_iter()
        .zip(&quadrature.weights)
        .map(|(p, w)| {
            let g_hat = pair.hat.at(p)?;
            let b_hat = pair.b_hat(p)?;
            let hat_term = g_hat.inner(&b_hat, &b_hat) * g_hat.sqrt_det() * w;
            let b_bar = match pair.transform_vector(Direction::ToBar, p) {
                Ok(v) => v,
                Err(Error::OutOfSupport { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let g_bar = pair.explicit_bar_metric(p)?;
            let bar_term = g_bar.norm(&b_bar) * g_bar.sqrt_det() * w;
            Ok(Some((hat_term, bar_term)))
        })
        .collect();
    let mut l2 = 0.0;
    let mut l1 = 0.0;
    let mut skipped = 0;
    for t in terms {
        match t? {
            Some((a, b)) => {
                l2 += a;
                l1 += b;
            }
            None => skipped += 1,
        }
    }
    let rel_diff = (l2 - l1).abs() / l2.abs().max(f64::MIN_POSITIVE);
    Ok(EnergyReport { l2_sq_hat: l2, l1_bar: l1, rel_diff, points: quadrature.len(), skipped })
}

/// `h = e^{−2u} g` with `e^{2u} = g(B, B)`, making B a unit field.
pub fn killing_unit_factor(b: &SmoothField, g: &MetricField) -> Result<MetricField> {
    if b.dim() != g.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: g.ambient_dim(), found: b.dim() });
    }
    let name = format!("{}_unit_{}", g.name(), b.name());
    Ok(g.clone()
        .with_factor(LogFactor::NormPower { field: b.clone(), metric: Box::new(g.clone()), power: -1.0, eps_supp: DEFAULT_EPS_SUPP })
        .renamed(name))
}

/// `⋆_g a` and `⋆_{e^{2u} g} a` for a one-form on a surface.
#[derive(Debug, Clone)]
pub struct SurfaceStar {
    pub base: AlternatingForm,
    pub rescaled: AlternatingForm,
    pub max_diff: f64,
}

pub fn surface_star_invariance(g: &MetricField, u: &SmoothField, a: &AlternatingForm, p: &[f64]) -> Result<SurfaceStar> {
    if g.dim() != 2 {
        return Err(Error::InvalidDimension(format!("surface operations need n = 2, got {}", g.dim())));
    }
    if a.degree() != 1 {
        return Err(Error::InvalidDegree { op: "surface_star_invariance", degree: a.degree() });
    }
    let m = g.at(p)?;
    let scaled = m.scaled((2.0 * u.scalar(p)?).exp())?;
    let base = hodge_star(&m, a)?;
    let rescaled = hodge_star(&scaled, a)?;
    let max_diff = (&base - &rescaled).max_abs();
    Ok(SurfaceStar { base, rescaled, max_diff })
}

/// One point of the surface harmonic/eikonal classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub point: Vec<f64>,
    /// `|dη|`, which must be small for the test to apply.
    pub eikonal_residual: f64,
    /// `|d|β||`: case (a), locally constant length.
    pub grad_norm: f64,
    /// `|d|B| ∧ η|`: case (b), gradient of the length parallel to B.
    pub parallel_defect: f64,
    /// Criterion from the theorem: case (a) or case (b).
    pub criterion_harmonic: bool,
    /// Direct check: `dB♭ = 0` and `div B = 0`.
    pub direct_harmonic: bool,
    pub d_flat_norm: f64,
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub field: String,
    pub points: Vec<SurfacePoint>,
    pub all_criterion_harmonic: bool,
    pub all_direct_harmonic: bool,
}

/// For eikonal B on a surface: B is harmonic iff `|β|` is locally constant or
/// `grad |β|` is parallel to B. Non-eikonal input is rejected.
pub fn surface_harmonic_eikonal_test(
    b: &SmoothField,
    g: &MetricField,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SurfaceReport> {
    if g.dim() != 2 {
        return Err(Error::InvalidDimension(format!("surface operations need n = 2, got {}", g.dim())));
    }
    let rows: Vec<Result<SurfacePoint>> = points
        .par_iter()
        .map(|p| {
            let jet = Jet::new(b, g, p)?;
            let eik = crate::diagnostics::eikonal_from_jet(&jet, DEFAULT_EPS_SUPP)?;
            if eik.d_eta_norm > tol {
                return Err(Error::NotEikonal(format!("|dη| = {:e} at {:?}", eik.d_eta_norm, p)));
            }
            let nrm = jet.norm();
            let d_len = jet.d_norm_sq.scale(0.5 / nrm);
            let eta = jet.flat().scale(-1.0 / nrm);
            let grad_norm = form_norm(&jet.metric, &d_len)?;
            let parallel_defect = form_norm(&jet.metric, &wedge(&d_len, &eta)?)?;
            let d_flat_norm = form_norm(&jet.metric, &jet.d_flat)?;
            let divergence = jet.cov.trace();
            Ok(SurfacePoint {
                point: p.clone(),
                eikonal_residual: eik.d_eta_norm,
                grad_norm,
                parallel_defect,
                criterion_harmonic: grad_norm < tol || parallel_defect < tol,
                direct_harmonic: d_flat_norm < tol && divergence.abs() < tol,
                d_flat_norm,
                divergence,
            })
        })
        .collect();
    let points: Vec<SurfacePoint> = rows.into_iter().collect::<Result<_>>()?;
    Ok(SurfaceReport {
        field: b.name().to_string(),
        all_criterion_harmonic: points.iter().all(|r| r.criterion_harmonic),
        all_direct_harmonic: points.iter().all(|r| r.direct_harmonic),
        points,
    })
}
