//! Pointwise residuals for the field classes: force-free, Beltrami, geodesic,
//! Wadsley, normalization, eikonal, Killing, contact and Reeb.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exterior::{
    form_norm, hodge_star, interior_product, rank_of_two_form, sharp, wedge, wedge_power, AlternatingForm,
    MetricAtPoint, TangentVec, DEFAULT_RANK_TOL,
};
use crate::fields::{exterior_derivative, flux_form_at, FieldKind, Jet, MetricField, SmoothField, DEFAULT_EPS_SUPP};

fn parity_sign(n: usize) -> f64 {
    if (n - 1) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn require_support(norm: f64, eps: f64) -> Result<()> {
    if norm > eps {
        Ok(())
    } else {
        Err(Error::OutOfSupport { magnitude: norm, threshold: eps })
    }
}

/// `ι_B d⋆β` with `β = ι_B μ`; since `⋆β = (−1)^{n−1} B♭` this is `(−1)^{n−1} ι_B dB♭`.
pub fn force_free_residual(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<AlternatingForm> {
    let jet = Jet::new(b, g, p)?;
    force_free_from_jet(&jet)
}

pub fn force_free_from_jet(jet: &Jet) -> Result<AlternatingForm> {
    let r = interior_product(&jet.b, &jet.d_flat)?;
    Ok(r.scale(parity_sign(jet.dim())))
}

/// Curl in odd dimension n = 2m+1, defined by `ι_{curl B} μ = (dB♭)^m`.
#[derive(Debug, Clone)]
pub struct CurlResult {
    pub curl: TangentVec,
    /// `g(curl B, B) / g(B, B)`, absent where `|B| ≤ ε_supp`.
    pub lambda: Option<f64>,
    /// `curl B − λ B` (absent with λ).
    pub beltrami: Option<TangentVec>,
    pub metric: MetricAtPoint,
}

pub fn curl_odd(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<CurlResult> {
    let jet = Jet::new(b, g, p)?;
    curl_from_jet(&jet, DEFAULT_EPS_SUPP)
}

pub fn curl_from_jet(jet: &Jet, eps_supp: f64) -> Result<CurlResult> {
    let n = jet.dim();
    if n % 2 == 0 {
        return Err(Error::EvenDimension(n));
    }
    let m = (n - 1) / 2;
    let power = wedge_power(&jet.d_flat, m)?;
    // For odd n, ⋆⋆ = 1 on (n−1)-forms, so ι_X μ = ω gives X = sharp(⋆ω).
    let curl = sharp(&jet.metric, &hodge_star(&jet.metric, &power)?)?;
    let nsq = jet.norm_sq();
    let (lambda, beltrami) = if nsq.sqrt() > eps_supp {
        let l = jet.metric.inner(&curl, &jet.b) / nsq;
        (Some(l), Some(TangentVec(&curl.0 - &jet.b.0 * l)))
    } else {
        (None, None)
    };
    Ok(CurlResult { curl, lambda, beltrami, metric: jet.metric.clone() })
}

/// `∇_B B = ρ B + perp` with perp g-orthogonal to B.
#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub perp: TangentVec,
    pub rho: f64,
    pub perp_norm: f64,
    pub b_norm: f64,
}

pub fn geodesic_residual(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<GeodesicResult> {
    let jet = Jet::new(b, g, p)?;
    geodesic_from_jet(&jet, DEFAULT_EPS_SUPP)
}

pub fn geodesic_from_jet(jet: &Jet, eps_supp: f64) -> Result<GeodesicResult> {
    let nsq = jet.norm_sq();
    require_support(nsq.sqrt(), eps_supp)?;
    let acc = jet.acceleration();
    let rho = jet.metric.inner(&acc, &jet.b) / nsq;
    let perp = TangentVec(&acc.0 - &jet.b.0 * rho);
    let perp_norm = jet.metric.norm(&perp);
    Ok(GeodesicResult { perp, rho, perp_norm, b_norm: nsq.sqrt() })
}

/// `ι_X dX♭ − (∇_X X)♭ + ½ d|X|²`, identically zero.
pub fn wadsley_residual(x: &SmoothField, g: &MetricField, p: &[f64]) -> Result<AlternatingForm> {
    let jet = Jet::new(x, g, p)?;
    wadsley_from_jet(&jet)
}

pub fn wadsley_from_jet(jet: &Jet) -> Result<AlternatingForm> {
    let lhs = interior_product(&jet.b, &jet.d_flat)?;
    let acc_flat = AlternatingForm::from_one_form((jet.metric.matrix() * &jet.acceleration().0).as_slice());
    let rhs = &acc_flat - &jet.d_norm_sq.scale(0.5);
    Ok(&lhs - &rhs)
}

/// A normalization η of `⋆β`: `⋆β/|⋆β|` on the support, zero elsewhere.
pub fn normalization(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<AlternatingForm> {
    normalization_eps(b, g, p, DEFAULT_EPS_SUPP)
}

pub fn normalization_eps(b: &SmoothField, g: &MetricField, p: &[f64], eps_supp: f64) -> Result<AlternatingForm> {
    let m = g.at(p)?;
    let beta = flux_form_at(b, g, p)?;
    let star_beta = hodge_star(&m, &beta)?;
    let norm = form_norm(&m, &star_beta)?;
    if norm > eps_supp {
        Ok(star_beta.scale(1.0 / norm))
    } else {
        Ok(AlternatingForm::zero(star_beta.dim(), 1))
    }
}

/// `dη` for the normalization η of `⋆β`, with the weaker certificate `ι_B dη`.
#[derive(Debug, Clone)]
pub struct EikonalResult {
    pub d_eta: AlternatingForm,
    pub contraction: AlternatingForm,
    pub d_eta_norm: f64,
    pub contraction_norm: f64,
}

pub fn eikonal_residual(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<EikonalResult> {
    let jet = Jet::new(b, g, p)?;
    eikonal_from_jet(&jet, DEFAULT_EPS_SUPP)
}

pub fn eikonal_from_jet(jet: &Jet, eps_supp: f64) -> Result<EikonalResult> {
    let nrm = jet.norm();
    require_support(nrm, eps_supp)?;
    // η = (−1)^{n−1} B♭/|B|;  dη = ± (dB♭/|B| − d|B| ∧ B♭/|B|²),  d|B| = d|B|²/(2|B|)
    let s = parity_sign(jet.dim());
    let d_norm = jet.d_norm_sq.scale(0.5 / nrm);
    let wedge_term = wedge(&d_norm, &jet.flat())?.scale(1.0 / (nrm * nrm));
    let d_eta = (&jet.d_flat.scale(1.0 / nrm) - &wedge_term).scale(s);
    let contraction = interior_product(&jet.b, &d_eta)?;
    Ok(EikonalResult {
        d_eta_norm: form_norm(&jet.metric, &d_eta)?,
        contraction_norm: form_norm(&jet.metric, &contraction)?,
        d_eta,
        contraction,
    })
}

/// `S_jk = g(∇_j B, e_k) + g(e_j, ∇_k B)`, zero iff B is Killing.
pub fn killing_residual(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<DMatrix<f64>> {
    let jet = Jet::new(b, g, p)?;
    Ok(killing_from_jet(&jet))
}

pub fn killing_from_jet(jet: &Jet) -> DMatrix<f64> {
    let lowered = jet.metric.matrix() * &jet.cov;
    &lowered + lowered.transpose()
}

/// Norm of a symmetric 2-tensor measured with the metric: `√(S_ij S^ij)`.
pub fn symmetric_tensor_norm(m: &MetricAtPoint, s: &DMatrix<f64>) -> f64 {
    let gi = m.inverse();
    let raised = gi * s * gi;
    s.component_mul(&raised).sum().max(0.0).sqrt()
}

/// `d g(B,B) + 2 (∇_B B)♭`, which vanishes for Killing fields.
pub fn killing_identity_residual(b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<AlternatingForm> {
    let jet = Jet::new(b, g, p)?;
    let acc_flat = AlternatingForm::from_one_form((jet.metric.matrix() * &jet.acceleration().0).as_slice());
    Ok(&jet.d_norm_sq + &acc_flat.scale(2.0))
}

fn require_one_form(alpha: &SmoothField) -> Result<usize> {
    if alpha.kind() != FieldKind::Form(1) {
        return Err(Error::InvalidDegree { op: "contact", degree: 0 });
    }
    let n = alpha.dim();
    if n % 2 == 0 {
        return Err(Error::EvenDimension(n));
    }
    Ok(n)
}

/// Coefficient of `α ∧ (dα)^m` against `dx¹ ∧ … ∧ dxⁿ`; nonzero certifies contact at p.
pub fn contact_check(alpha: &SmoothField, p: &[f64]) -> Result<f64> {
    let n = require_one_form(alpha)?;
    let a = alpha.form(p)?;
    let da = exterior_derivative(alpha, p)?;
    let top = if n == 1 { a } else { wedge(&a, &wedge_power(&da, (n - 1) / 2)?)? };
    Ok(top.comps()[0])
}

/// `(α(X) − 1, ι_X dα)`; both vanish for the Reeb field.
pub fn reeb_residual(alpha: &SmoothField, x: &SmoothField, p: &[f64]) -> Result<(f64, AlternatingForm)> {
    require_one_form(alpha)?;
    let a = alpha.form(p)?;
    let xv = x.vector(p)?;
    let da = exterior_derivative(alpha, p)?;
    let ax: f64 = a.comps().iter().zip(xv.as_slice()).map(|(u, v)| u * v).sum();
    Ok((ax - 1.0, interior_product(&xv, &da)?))
}

/// Fraction of points where `dB♭` has maximal rank m (dimension 2m+1).
pub fn genericity_check(b: &SmoothField, g: &MetricField, points: &[Vec<f64>]) -> Result<f64> {
    let n = g.dim();
    if n % 2 == 0 {
        return Err(Error::EvenDimension(n));
    }
    if points.is_empty() {
        return Err(Error::InvalidParams("genericity check needs sample points".into()));
    }
    let m = (n - 1) / 2;
    let mut hits = 0usize;
    for p in points {
        let jet = Jet::new(b, g, p)?;
        if rank_of_two_form(&jet.d_flat, DEFAULT_RANK_TOL)? == m {
            hits += 1;
        }
    }
    Ok(hits as f64 / points.len() as f64)
}
