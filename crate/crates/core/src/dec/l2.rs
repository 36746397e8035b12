//! Minimal L² energy flux cochains with prescribed boundary trace.
//!
//! The exact level minimizes `Σ ⋆_f β_f²` over closed β with the given
//! boundary fluxes; its minimizer has `⋆β = dφ` on interior faces. The
//! homological level minimizes over `β₀ + dα`, α supported on interior
//! (n−2)-cells, and its minimizer has `d⋆β = 0` there.

use serde::{Deserialize, Serialize};

use super::cochain::Cochain;
use super::complex::Complex;
use super::sparse::{conjugate_gradient, norm_inf, remove_mean, CgOptions, CgReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Solution {
    pub beta: Cochain,
    /// Potential on top cells (a dual 0-cochain) with `⋆β = dφ` on interior
    /// faces; empty at the homological level.
    pub phi: Vec<f64>,
    pub energy: f64,
    /// Net boundary flux removed from the trace before solving.
    pub trace_defect: f64,
    /// Stationarity residual: `max|⋆β − dφ|` (exact) or `max|d⋆β|` (homological) on interior cells.
    pub residual: f64,
    pub cg: CgReport,
}

/// Validates a boundary trace and removes its net flux.
///
/// Returns the balanced trace and the removed total. The total is spread over
/// the boundary faces in proportion to their outward orientation, which is the
/// least-squares correction making `Σ_c (dβ)_c = 0`.
pub fn balance_trace(cx: &Complex, trace: &Cochain) -> Result<(Cochain, f64)> {
    let n = cx.dim;
    if trace.degree != n - 1 || trace.values.len() != cx.count(n - 1) {
        return Err(Error::IncompatibleTrace(format!(
            "expected {} face values of degree {}, found {} of degree {}",
            cx.count(n - 1),
            n - 1,
            trace.values.len(),
            trace.degree
        )));
    }
    if let Some(f) = (0..trace.len()).find(|&f| !cx.boundary[n - 1][f] && trace.values[f] != 0.0) {
        return Err(Error::IncompatibleTrace(format!("trace is nonzero on interior face {f}")));
    }
    let dt = cx.d[n - 1].transpose();
    // outward sign of a boundary face = its coefficient in the single adjacent cell
    let bfaces = cx.boundary_cells(n - 1);
    let orient: Vec<f64> = bfaces.iter().map(|&f| dt.row(f).next().map_or(0.0, |e| e.1)).collect();
    let total: f64 = bfaces.iter().zip(&orient).map(|(&f, o)| o * trace.values[f]).sum();
    let mut out = trace.clone();
    let scale = trace.max_abs().max(f64::MIN_POSITIVE);
    if !bfaces.is_empty() && total.abs() > 1e-12 * scale * bfaces.len() as f64 {
        log::warn!("boundary trace carries net flux {total:e}; projecting it out");
        let per = total / bfaces.len() as f64;
        for (&f, o) in bfaces.iter().zip(&orient) {
            out.values[f] -= per * o;
        }
    }
    Ok((out, total))
}

/// Minimal-energy closed flux with the given boundary trace.
pub fn solve_l2_exact_harmonic(cx: &Complex, trace: &Cochain, cg: CgOptions) -> Result<L2Solution> {
    let n = cx.dim;
    let (trace, total) = balance_trace(cx, trace)?;
    let interior = cx.interior(n - 1);
    let cells: Vec<usize> = (0..cx.count(n)).collect();
    let di = cx.d[n - 1].select(&cells, &interior);
    let hodge = cx.hodge(n - 1);
    let winv: Vec<f64> = interior.iter().map(|&f| 1.0 / hodge[f]).collect();
    let mut rhs = cx.d[n - 1].mul_vec(&trace.values);
    for v in rhs.iter_mut() {
        *v = -*v;
    }
    let apply = |phi: &[f64]| {
        let g: Vec<f64> = di.mul_vec_t(phi).iter().zip(&winv).map(|(a, w)| a * w).collect();
        di.mul_vec(&g)
    };
    let proj: &dyn Fn(&mut [f64]) = &remove_mean;
    let (phi, report) = conjugate_gradient(apply, &rhs, None, Some(proj), cg)?;
    let grad = di.mul_vec_t(&phi);
    let mut beta = trace;
    for (i, &f) in interior.iter().enumerate() {
        beta.values[f] = winv[i] * grad[i];
    }
    let energy = beta.l2_energy(cx);
    Ok(L2Solution { beta, phi, energy, trace_defect: total, residual: 0.0, cg: report })
}

/// Minimal-energy representative of the class of a closed β₀ (boundary values kept).
pub fn solve_l2_harmonic(cx: &Complex, beta0: &Cochain, cg: CgOptions) -> Result<L2Solution> {
    let n = cx.dim;
    if beta0.degree != n - 1 || beta0.values.len() != cx.count(n - 1) {
        return Err(Error::IncompatibleTrace(format!("β₀ must be a {}-cochain with {} values", n - 1, cx.count(n - 1))));
    }
    let db = cx.d[n - 1].mul_vec(&beta0.values);
    let scale = beta0.max_abs().max(f64::MIN_POSITIVE);
    if norm_inf(&db) > 1e-9 * scale {
        return Err(Error::IncompatibleTrace(format!("β₀ is not closed: |dβ₀| = {:e}", norm_inf(&db))));
    }
    let inner = cx.interior(n - 2);
    let faces: Vec<usize> = (0..cx.count(n - 1)).collect();
    let c = cx.d[n - 2].select(&faces, &inner);
    let w = cx.hodge(n - 1);
    let apply = |a: &[f64]| {
        let ca: Vec<f64> = c.mul_vec(a).iter().zip(&w).map(|(x, w)| x * w).collect();
        c.mul_vec_t(&ca)
    };
    let wb: Vec<f64> = beta0.values.iter().zip(&w).map(|(b, w)| -b * w).collect();
    let rhs = c.mul_vec_t(&wb);
    let (alpha, report) = conjugate_gradient(apply, &rhs, None, None, cg)?;
    let ca = c.mul_vec(&alpha);
    let beta = Cochain { degree: n - 1, values: beta0.values.iter().zip(&ca).map(|(b, x)| b + x).collect() };
    let star: Vec<f64> = beta.values.iter().zip(&w).map(|(b, w)| b * w).collect();
    let residual = c.mul_vec_t(&star).iter().enumerate().fold(0.0f64, |m, (i, v)| m.max(v.abs() / cx.dual_volume[n - 2][inner[i]]));
    let energy = beta.l2_energy(cx);
    Ok(L2Solution { beta, phi: Vec::new(), energy, trace_defect: 0.0, residual, cg: report })
}

/// Boundary fluxes of a smooth vector field (Euclidean chart flux), zero inside.
pub fn trace_of(cx: &Complex, beta: &Cochain) -> Cochain {
    beta.boundary_part(cx)
}

/// Checks the harmonic stationarity of a solution: `max|d⋆β|` density over interior (n−2)-cells.
pub fn harmonic_residual(cx: &Complex, beta: &Cochain) -> f64 {
    let n = cx.dim;
    let star: Vec<f64> = beta.values.iter().zip(cx.hodge(n - 1)).map(|(b, w)| b * w).collect();
    super::kkt::closedness_residual(cx, &star)
}

/// Mean of the potential over top cells is zero; returns `φ` shifted so.
pub fn centered(mut phi: Vec<f64>) -> Vec<f64> {
    remove_mean(&mut phi);
    phi
}
