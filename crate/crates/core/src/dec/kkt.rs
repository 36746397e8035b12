//! Per-cell reconstructions and the stationarity checks of both hierarchies.
//!
//! A primal (n−1)-cochain β stores fluxes through oriented faces; its vector
//! proxy on a top cell is the least-squares F with `F·N_f ≈ β_f` over the
//! cell's faces (`N_f` the oriented vector area). Dual 1-cochains live on
//! faces: `η_f` integrates η along the dual edge of f, which points along
//! `(−1)^{n−1} N_f`. With this orientation `⋆_f β_f` is the discrete `⋆β`.

use serde::{Deserialize, Serialize};

use super::cochain::Cochain;
use super::complex::Complex;
use super::sparse::{conjugate_gradient, norm_inf, remove_mean, CgOptions};
use crate::error::{Error, Result};
use crate::exterior::{basis_masks, hodge_star, interior_product, wedge, AlternatingForm, MetricAtPoint, TangentVec};

/// Linear per-cell reconstructions of vector proxies and 2-forms.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub dim: usize,
    /// `F_c = Σ coeff·β_f` over the faces of c.
    pub flux: Vec<Vec<(usize, Vec<f64>)>>,
    /// Unit normals and vector-area magnitudes of faces.
    pub normals: Vec<Vec<f64>>,
    pub areas: Vec<f64>,
    /// 2-form coefficients `Ω_c = Σ coeff·ρ_σ` from (n−2)-cell densities; None on cells touching the boundary.
    pub two_form: Vec<Option<Vec<(usize, Vec<f64>)>>>,
}

fn pinv_apply(m: &nalgebra::DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let svd = m.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let x = svd.solve(&nalgebra::DVector::from_column_slice(rhs), tol).expect("svd computed with both factors");
    x.as_slice().to_vec()
}

impl Reconstruction {
    pub fn new(cx: &Complex) -> Result<Self> {
        let n = cx.dim;
        let nf = cx.count(n - 1);
        let mu = MetricAtPoint::euclidean(n).volume_form();
        let mut normals: Vec<Vec<f64>> = Vec::with_capacity(nf);
        let mut areas = Vec::with_capacity(nf);
        for f in 0..nf {
            let mut v = vec![0.0; n];
            for node in cx.cell_nodes(n - 1, f, 3) {
                let refs: Vec<&[f64]> = node.tangents.iter().map(|t| t.as_slice()).collect();
                for (j, vj) in v.iter_mut().enumerate() {
                    let form = interior_product(&TangentVec::basis(n, j), &mu)?;
                    *vj += node.weight * form.evaluate(&refs)?;
                }
            }
            let a = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if a <= 0.0 {
                return Err(Error::DegenerateCell(format!("face {f} has zero vector area")));
            }
            normals.push(v.iter().map(|x| x / a).collect());
            areas.push(a);
        }
        let mut flux = Vec::with_capacity(cx.count(n));
        for c in 0..cx.count(n) {
            let faces = cx.top_faces(c);
            let mut m = nalgebra::DMatrix::zeros(n, n);
            for &(f, _) in &faces {
                let u = nalgebra::DVector::from_column_slice(&normals[f]);
                m += &u * u.transpose();
            }
            let inv = m.try_inverse().ok_or_else(|| Error::DegenerateCell(format!("cell {c} has degenerate faces")))?;
            let rows = faces
                .iter()
                .map(|&(f, _)| {
                    let coeff = &inv * nalgebra::DVector::from_column_slice(&normals[f]) / areas[f];
                    (f, coeff.as_slice().to_vec())
                })
                .collect();
            flux.push(rows);
        }
        // unit 2-forms ⋆(tangent of σ), signed by (−1)^{n−1}
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let eu = MetricAtPoint::euclidean(n);
        let mut dirs = Vec::with_capacity(cx.count(n - 2));
        for s in 0..cx.count(n - 2) {
            let node = &cx.cell_nodes(n - 2, s, 1)[0];
            let mut t = AlternatingForm::scalar(n, 1.0);
            for tv in &node.tangents {
                t = wedge(&t, &AlternatingForm::from_one_form(tv))?;
            }
            let norm = t.comps().iter().map(|x| x * x).sum::<f64>().sqrt();
            dirs.push(hodge_star(&eu, &t.scale(sign / norm))?.into_comps());
        }
        let m2 = basis_masks(n, 2).len();
        let mut two_form = Vec::with_capacity(cx.count(n));
        for c in 0..cx.count(n) {
            let subs = cx.cell_vertices_of_degree(n, c, n - 2);
            if subs.iter().any(|&s| cx.boundary[n - 2][s]) {
                two_form.push(None);
                continue;
            }
            let mut m = nalgebra::DMatrix::zeros(m2, m2);
            for &s in &subs {
                let u = nalgebra::DVector::from_column_slice(&dirs[s]);
                m += &u * u.transpose();
            }
            let rows = subs.iter().map(|&s| (s, pinv_apply(&m, &dirs[s]))).collect();
            two_form.push(Some(rows));
        }
        Ok(Self { dim: n, flux, normals, areas, two_form })
    }

    /// Euclidean vector proxy of β on top cell c.
    pub fn flux_density(&self, c: usize, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (f, coeff) in &self.flux[c] {
            for (o, k) in out.iter_mut().zip(coeff) {
                *o += k * beta[*f];
            }
        }
        out
    }

    /// Covector proxy of a dual 1-cochain on top cell c, from `η_f/|dual f|`.
    pub fn dual_density(&self, cx: &Complex, c: usize, eta: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let mut out = vec![0.0; n];
        for (f, coeff) in &self.flux[c] {
            let dual = cx.dual_volume[n - 1][*f];
            for (o, k) in out.iter_mut().zip(coeff) {
                *o += sign * k * self.areas[*f] * eta[*f] / dual;
            }
        }
        out
    }

    /// 2-form on top cell c from values of a dual 2-cochain on (n−2)-cells.
    pub fn two_form_density(&self, cx: &Complex, c: usize, values: &[f64]) -> Option<AlternatingForm> {
        let n = self.dim;
        let rows = self.two_form[c].as_ref()?;
        let mut comps = vec![0.0; basis_masks(n, 2).len()];
        for (s, coeff) in rows {
            let rho = values[*s] / cx.dual_volume[n - 2][*s];
            for (o, k) in comps.iter_mut().zip(coeff) {
                *o += k * rho;
            }
        }
        Some(AlternatingForm::new(n, 2, comps).expect("component count matches"))
    }
}

impl Complex {
    /// Distinct sub-cells of degree j of cell c (degree k).
    pub fn cell_vertices_of_degree(&self, k: usize, c: usize, j: usize) -> Vec<usize> {
        let mut set = vec![c];
        for deg in (j..k).rev() {
            let mut next = Vec::new();
            for &x in &set {
                for (f, _) in self.d[deg].row(x) {
                    if !next.contains(&f) {
                        next.push(f);
                    }
                }
            }
            set = next;
        }
        set
    }
}

/// Per-cell covectors with a mask of evaluated cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCovectors {
    pub values: Vec<Vec<f64>>,
    pub evaluated: Vec<bool>,
    /// Largest Euclidean norm over evaluated cells.
    pub max_norm: f64,
    /// Largest norm divided by the largest `|F|·|Ω|` scale seen.
    pub relative: f64,
}

/// Discrete `ι_B dη` on top cells for a flux cochain β and a dual 1-cochain η.
pub fn contraction_residual(cx: &Complex, rec: &Reconstruction, beta: &Cochain, eta: &[f64]) -> Result<CellCovectors> {
    let n = cx.dim;
    beta.check(cx)?;
    if beta.degree != n - 1 || eta.len() != cx.count(n - 1) {
        return Err(Error::DimensionMismatch { expected: cx.count(n - 1), found: eta.len() });
    }
    let d_eta = cx.d[n - 2].mul_vec_t(eta);
    let mut values = Vec::with_capacity(cx.count(n));
    let mut evaluated = Vec::with_capacity(cx.count(n));
    let (mut max_norm, mut scale) = (0.0f64, 0.0f64);
    for c in 0..cx.count(n) {
        let f = rec.flux_density(c, &beta.values);
        match rec.two_form_density(cx, c, &d_eta) {
            Some(omega) => {
                let r = interior_product(&TangentVec::new(f.clone()), &omega)?.into_comps();
                let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                let fn_ = f.iter().map(|x| x * x).sum::<f64>().sqrt();
                max_norm = max_norm.max(rn);
                scale = scale.max(fn_ * omega.max_abs());
                values.push(r);
                evaluated.push(true);
            }
            None => {
                values.push(vec![0.0; n]);
                evaluated.push(false);
            }
        }
    }
    let relative = if scale > 0.0 { max_norm / scale } else { 0.0 };
    Ok(CellCovectors { values, evaluated, max_norm, relative })
}

/// Discrete `⋆β` as a dual 1-cochain.
pub fn star_flux(cx: &Complex, beta: &Cochain) -> Vec<f64> {
    cx.hodge(cx.dim - 1).iter().zip(&beta.values).map(|(w, b)| w * b).collect()
}

/// `|β|_g` on each top cell from the reconstructed proxy.
pub fn cell_norms(cx: &Complex, rec: &Reconstruction, beta: &Cochain) -> Vec<f64> {
    let n = cx.dim;
    (0..cx.count(n))
        .map(|c| {
            let f = rec.flux_density(c, &beta.values);
            f.iter().map(|x| x * x).sum::<f64>().sqrt() * (-(n as f64 - 1.0) * cx.log_factor[n][c]).exp()
        })
        .collect()
}

/// Discrete normalization of `⋆β`: `η_f = ⋆_f β_f / |β|_f`, with `|β|_f` the
/// mean of the adjacent cell norms; zero where `|β|_f < eps_rel·max|β|`.
pub fn normalization_cochain(cx: &Complex, rec: &Reconstruction, beta: &Cochain, eps_rel: f64) -> Vec<f64> {
    let n = cx.dim;
    let norms = cell_norms(cx, rec, beta);
    let star = star_flux(cx, beta);
    let mut sum = vec![0.0; cx.count(n - 1)];
    let mut cnt = vec![0.0; cx.count(n - 1)];
    for c in 0..cx.count(n) {
        for (f, _) in cx.d[n - 1].row(c) {
            sum[f] += norms[c];
            cnt[f] += 1.0;
        }
    }
    let max = norms.iter().fold(0.0f64, |m, v| m.max(*v));
    (0..cx.count(n - 1))
        .map(|f| {
            let nf = sum[f] / cnt[f];
            if nf > eps_rel * max && nf > 0.0 {
                star[f] / nf
            } else {
                0.0
            }
        })
        .collect()
}

/// L² isotopy level: discrete `ι_B d⋆β`. Requires `dβ = 0` to `tol` (relative).
pub fn kkt_residual_l2_isotopy(cx: &Complex, beta: &Cochain, tol: f64) -> Result<CellCovectors> {
    let rec = Reconstruction::new(cx)?;
    require_closed(cx, beta, tol)?;
    contraction_residual(cx, &rec, beta, &star_flux(cx, beta))
}

/// Normalization defects of a dual 1-cochain η against β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationDefect {
    /// `max_f |η_f| / |dual f|_g`.
    pub max_eta: f64,
    /// Supported faces where η and `⋆β` point in opposite directions.
    pub sign_violations: Vec<usize>,
    /// `max_f |(|β|_f η_f − ⋆_f β_f)| / max_f |⋆_f β_f|` over supported faces.
    pub relative_defect: f64,
}

pub fn normalization_defect(cx: &Complex, rec: &Reconstruction, beta: &Cochain, eta: &[f64], eps_rel: f64) -> NormalizationDefect {
    let n = cx.dim;
    let dual = cx.metric_dual_volume(n - 1);
    let star = star_flux(cx, beta);
    let norm_eta = normalization_cochain(cx, rec, beta, eps_rel);
    let max_star = norm_inf(&star);
    let max_eta = eta.iter().zip(&dual).fold(0.0f64, |m, (e, d)| m.max(e.abs() / d));
    let mut sign_violations = Vec::new();
    let mut defect = 0.0f64;
    for f in 0..eta.len() {
        if star[f].abs() <= eps_rel * max_star || norm_eta[f] == 0.0 {
            continue;
        }
        let nf = star[f] / norm_eta[f];
        if eta[f] * star[f] < 0.0 && eta[f].abs() > eps_rel * dual[f] {
            sign_violations.push(f);
        }
        defect = defect.max((nf * eta[f] - star[f]).abs());
    }
    NormalizationDefect { max_eta, sign_violations, relative_defect: if max_star > 0.0 { defect / max_star } else { 0.0 } }
}

/// L¹ isotopy level: discrete `ι_B dη`, after checking that η is a valid
/// normalization of `⋆β` (bounded by `1 + tol` and sign-consistent).
pub fn kkt_residual_l1_isotopy(cx: &Complex, beta: &Cochain, eta: &[f64], tol: f64) -> Result<CellCovectors> {
    let rec = Reconstruction::new(cx)?;
    let defect = normalization_defect(cx, &rec, beta, eta, 1e-8);
    if defect.max_eta > 1.0 + tol {
        return Err(Error::InvalidNormalization(format!("|η| reaches {} > 1", defect.max_eta)));
    }
    if !defect.sign_violations.is_empty() {
        return Err(Error::InvalidNormalization(format!(
            "η opposes ⋆β on {} supported faces",
            defect.sign_violations.len()
        )));
    }
    contraction_residual(cx, &rec, beta, eta)
}

fn require_closed(cx: &Complex, beta: &Cochain, tol: f64) -> Result<()> {
    let n = cx.dim;
    if beta.degree != n - 1 {
        return Err(Error::InvalidDegree { op: "flux cochain", degree: beta.degree });
    }
    let db = beta.d(cx)?;
    let scale = beta.max_abs().max(f64::MIN_POSITIVE);
    if db.max_abs() > tol * scale {
        return Err(Error::InvalidParams(format!("β is not closed: |dβ| = {:e}", db.max_abs())));
    }
    Ok(())
}

/// Residual of `η ∈ im d` on interior faces, as a density `|r_f|/|dual f|`.
pub fn exactness_residual(cx: &Complex, eta: &[f64], cg: CgOptions) -> Result<(f64, Vec<f64>)> {
    let n = cx.dim;
    let interior = cx.interior(n - 1);
    let dt = cx.d[n - 1].select(&(0..cx.count(n)).collect::<Vec<_>>(), &interior);
    let rhs_full: Vec<f64> = interior.iter().map(|&f| eta[f]).collect();
    // least squares φ: (D Dᵀ) φ = D η
    let b = dt.mul_vec(&rhs_full);
    let proj: &dyn Fn(&mut [f64]) = &remove_mean;
    let (phi, _) = conjugate_gradient(|v| dt.mul_vec(&dt.mul_vec_t(v)), &b, None, Some(proj), cg)?;
    let grad = dt.mul_vec_t(&phi);
    let dual = &cx.dual_volume[n - 1];
    let res = interior.iter().enumerate().fold(0.0f64, |m, (i, &f)| m.max((rhs_full[i] - grad[i]).abs() / dual[f]));
    Ok((res, phi))
}

/// `max |dη|/|dual|` over interior (n−2)-cells.
pub fn closedness_residual(cx: &Complex, eta: &[f64]) -> f64 {
    let n = cx.dim;
    let d_eta = cx.d[n - 2].mul_vec_t(eta);
    cx.interior(n - 2).iter().fold(0.0f64, |m, &s| m.max(d_eta[s].abs() / cx.dual_volume[n - 2][s]))
}

/// Stationarity residuals of one flux cochain at all six levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    /// `|dβ|` density on top cells; every level presumes a closed β.
    pub closed: f64,
    pub l2_exact_harmonic: f64,
    pub l2_harmonic: f64,
    pub l2_force_free: f64,
    pub l1_exact_eikonal: f64,
    pub l1_eikonal: f64,
    pub l1_geodesic: f64,
}

/// Evaluates all six levels for β; the L¹ levels use `eta` if given, else the
/// discrete normalization of `⋆β`.
pub fn hierarchy_report(cx: &Complex, beta: &Cochain, eta: Option<&[f64]>) -> Result<HierarchyReport> {
    let n = cx.dim;
    beta.check(cx)?;
    let rec = Reconstruction::new(cx)?;
    let db = beta.d(cx)?;
    let closed = db.values.iter().zip(&cx.primal_volume[n]).fold(0.0f64, |m, (v, a)| m.max(v.abs() / a));
    let star = star_flux(cx, beta);
    let owned;
    let eta = match eta {
        Some(e) => e,
        None => {
            owned = normalization_cochain(cx, &rec, beta, 1e-8);
            &owned
        }
    };
    let cg = CgOptions::default();
    Ok(HierarchyReport {
        closed,
        l2_exact_harmonic: exactness_residual(cx, &star, cg)?.0,
        l2_harmonic: closedness_residual(cx, &star),
        l2_force_free: contraction_residual(cx, &rec, beta, &star)?.max_norm,
        l1_exact_eikonal: exactness_residual(cx, eta, cg)?.0,
        l1_eikonal: closedness_residual(cx, eta),
        l1_geodesic: contraction_residual(cx, &rec, beta, eta)?.max_norm,
    })
}

/// Conformal re-weighting by `|β|²`: u = log|β|_g on top cells, averaged
/// (in log) onto lower-degree cells.
pub fn reweight_by_flux(cx: &Complex, beta: &Cochain, eps_rel: f64) -> Result<Complex> {
    let n = cx.dim;
    let rec = Reconstruction::new(cx)?;
    let norms = cell_norms(cx, &rec, beta);
    let max = norms.iter().fold(0.0f64, |m, v| m.max(*v));
    if norms.iter().any(|&v| v <= eps_rel * max) {
        return Err(Error::OutOfSupport { magnitude: norms.iter().cloned().fold(f64::INFINITY, f64::min), threshold: eps_rel * max });
    }
    let u_top: Vec<f64> = cx.log_factor[n].iter().zip(&norms).map(|(u0, v)| u0 + v.ln()).collect();
    let mut out = cx.clone();
    out.log_factor[n] = u_top.clone();
    for k in (0..n).rev() {
        let mut sum = vec![0.0; cx.count(k)];
        let mut cnt = vec![0.0; cx.count(k)];
        for c in 0..cx.count(n) {
            for s in cx.cell_vertices_of_degree(n, c, k) {
                sum[s] += u_top[c];
                cnt[s] += 1.0;
            }
        }
        out.log_factor[k] = sum.iter().zip(&cnt).map(|(s, c)| s / c).collect();
    }
    Ok(out)
}

/// Cell-wise membership in the subdifferential of the mass norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationLemmaReport {
    pub member: bool,
    /// Atoms with `|η| > 1 + tol`.
    pub bound_violations: Vec<usize>,
    /// Supported atoms where `|β| η ≠ ⋆β` beyond tol.
    pub alignment_violations: Vec<usize>,
}

/// Checks `|η_a| ≤ 1` everywhere and `|β_a| η_a = β_a` on supported atoms,
/// given per-atom proxies of β (`beta_atoms`) and η (`eta_atoms`).
pub fn normalization_lemma_check(beta_atoms: &[Vec<f64>], eta_atoms: &[Vec<f64>], tol: f64) -> NormalizationLemmaReport {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max_beta = beta_atoms.iter().fold(0.0f64, |m, b| m.max(norm(b)));
    let mut bound_violations = Vec::new();
    let mut alignment_violations = Vec::new();
    for (a, (b, e)) in beta_atoms.iter().zip(eta_atoms).enumerate() {
        if norm(e) > 1.0 + tol {
            bound_violations.push(a);
        }
        let nb = norm(b);
        if nb > 1e-8 * max_beta && nb > 0.0 {
            let defect: f64 = b.iter().zip(e).map(|(bi, ei)| (nb * ei - bi).powi(2)).sum::<f64>().sqrt();
            if defect > tol * nb {
                alignment_violations.push(a);
            }
        }
    }
    NormalizationLemmaReport {
        member: bound_violations.is_empty() && alignment_violations.is_empty(),
        bound_violations,
        alignment_violations,
    }
}
