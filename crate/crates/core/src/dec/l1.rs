//! Minimal mass flux cochains.
//!
//! The mass is a sum of atoms `w_a |A_a β|`: one per face (`FaceL1`, the
//! anisotropic norm that an LP can reproduce exactly) or one per top cell
//! with the reconstructed flux vector (`CellIsotropic`, consistent with the
//! continuum mass `∫|β|`). The general solver is the Chambolle–Pock
//! splitting with diagonal step sizes, over-relaxation and adaptive
//! restarts. On surfaces the free part of β is a stream function on
//! vertices, and a barrier path-following Newton method on that stream
//! function reaches tight gaps much faster. Either way a feasible primal
//! point and a feasible dual point are built at every check, so the reported
//! gap bounds the distance to the optimum from above.

use serde::{Deserialize, Serialize};

use super::cochain::Cochain;
use super::complex::Complex;
use super::kkt::Reconstruction;
use super::l2::{balance_trace, solve_l2_exact_harmonic};
use super::sparse::{conjugate_gradient, dot, norm_inf, remove_mean, CgOptions, Csr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MassNorm {
    FaceL1,
    #[default]
    CellIsotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum L1Method {
    /// Newton on surfaces, primal–dual otherwise.
    #[default]
    Auto,
    PrimalDual,
    /// Stream-function Newton; only available in dimension 2.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct L1Params {
    pub norm: MassNorm,
    pub method: L1Method,
    pub max_iters: usize,
    /// Target for `(P − D)/P`.
    pub tol_gap: f64,
    pub check_every: usize,
    /// Over-relaxation of the primal extrapolation.
    pub theta: f64,
    /// Primal step multiplier; dual steps are divided by it.
    pub step_ratio: f64,
    /// Start from the L² minimizer (exact level only).
    pub warm_start: bool,
    /// Fail with `NotConverged` instead of returning the last certificate.
    pub require_convergence: bool,
    pub cg: CgOptions,
}

impl Default for L1Params {
    fn default() -> Self {
        Self {
            norm: MassNorm::CellIsotropic,
            method: L1Method::Auto,
            max_iters: 50_000,
            tol_gap: 1e-6,
            check_every: 200,
            theta: 1.0,
            step_ratio: 1.0,
            warm_start: true,
            require_convergence: false,
            cg: CgOptions { tol: 1e-10, max_iters: 20_000 },
        }
    }
}

/// Mass atoms: `A` has `width` consecutive rows per atom.
#[derive(Debug, Clone)]
pub struct Atoms {
    pub norm: MassNorm,
    pub width: usize,
    pub weights: Vec<f64>,
    pub a: Csr,
}

impl Atoms {
    pub fn new(cx: &Complex, norm: MassNorm) -> Result<Self> {
        let n = cx.dim;
        match norm {
            MassNorm::FaceL1 => {
                let prim = cx.metric_volume(n - 1);
                let dual = cx.metric_dual_volume(n - 1);
                let trip: Vec<_> = (0..cx.count(n - 1)).map(|f| (f, f, 1.0 / prim[f])).collect();
                let weights = prim.iter().zip(&dual).map(|(p, d)| p * d).collect();
                Ok(Self { norm, width: 1, weights, a: Csr::from_triplets(cx.count(n - 1), cx.count(n - 1), &trip)? })
            }
            MassNorm::CellIsotropic => {
                let rec = Reconstruction::new(cx)?;
                let vol = cx.metric_volume(n);
                let mut trip = Vec::new();
                for c in 0..cx.count(n) {
                    let s = (-(n as f64 - 1.0) * cx.log_factor[n][c]).exp();
                    for (f, coeff) in &rec.flux[c] {
                        for (j, k) in coeff.iter().enumerate() {
                            trip.push((c * n + j, *f, s * k));
                        }
                    }
                }
                Ok(Self { norm, width: n, weights: vol, a: Csr::from_triplets(cx.count(n) * n, cx.count(n - 1), &trip)? })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Per-atom proxies `A_a β` (g-normalized flux vectors or face densities).
    pub fn proxies(&self, beta: &[f64]) -> Vec<Vec<f64>> {
        self.a.mul_vec(beta).chunks(self.width).map(|c| c.to_vec()).collect()
    }

    pub fn mass(&self, beta: &[f64]) -> f64 {
        self.a.mul_vec(beta).chunks(self.width).zip(&self.weights).map(|(c, w)| w * norm(c)).sum()
    }

    /// Dual 1-cochain `Aᵀ(w ξ)` of per-atom unit proxies ξ.
    pub fn dual_cochain(&self, xi: &[Vec<f64>]) -> Vec<f64> {
        let flat: Vec<f64> = xi.iter().zip(&self.weights).flat_map(|(x, w)| x.iter().map(move |v| v * w)).collect();
        self.a.mul_vec_t(&flat)
    }

    /// Unit proxies `A_a β/|A_a β|`, zero where `|A_a β| ≤ eps_rel·max`.
    pub fn normalize(&self, beta: &[f64], eps_rel: f64) -> Vec<Vec<f64>> {
        let p = self.proxies(beta);
        let max = p.iter().fold(0.0f64, |m, v| m.max(norm(v)));
        p.into_iter()
            .map(|v| {
                let nv = norm(&v);
                if nv > eps_rel * max && nv > 0.0 {
                    v.iter().map(|x| x / nv).collect()
                } else {
                    vec![0.0; v.len()]
                }
            })
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterLog {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Solution {
    pub beta: Cochain,
    /// Dual 1-cochain `Aᵀζ` on faces with `|ξ_a| ≤ 1` on every atom.
    pub eta: Vec<f64>,
    /// Per-atom dual proxies ξ (unit-bounded).
    pub xi: Vec<Vec<f64>>,
    /// Potential on top cells with `η = dψ` on interior faces (exact level), else empty.
    pub psi: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    /// `(primal − dual)/primal`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace_defect: f64,
    pub log: Vec<IterLog>,
}

impl L1Solution {
    /// Writes the convergence log as CSV.
    pub fn write_log<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.log {
            wr.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Affine parametrization `β = c + M y` with an optional linear constraint `K2 y = f`.
struct Problem {
    base: Vec<f64>,
    m: Csr,
    k1: Csr,
    c1: Vec<f64>,
    k2: Option<(Csr, Vec<f64>)>,
}

/// Minimal mass closed flux with the given boundary trace.
pub fn solve_l1_exact_eikonal(cx: &Complex, trace: &Cochain, params: L1Params) -> Result<L1Solution> {
    let n = cx.dim;
    let (trace, total) = balance_trace(cx, trace)?;
    let interior = cx.interior(n - 1);
    let faces: Vec<usize> = (0..cx.count(n - 1)).collect();
    let cells: Vec<usize> = (0..cx.count(n)).collect();
    // embedding of interior faces
    let trip: Vec<_> = interior.iter().enumerate().map(|(i, &f)| (f, i, 1.0)).collect();
    let m = Csr::from_triplets(faces.len(), interior.len(), &trip)?;
    let atoms = Atoms::new(cx, params.norm)?;
    let di = cx.d[n - 1].select(&cells, &interior);
    let f: Vec<f64> = cx.d[n - 1].mul_vec(&trace.values).iter().map(|v| -v).collect();
    let y0 = if params.warm_start && !interior.is_empty() {
        let l2 = solve_l2_exact_harmonic(cx, &trace, params.cg)?;
        interior.iter().map(|&f| l2.beta.values[f]).collect()
    } else {
        vec![0.0; interior.len()]
    };
    let prob = Problem { k1: atoms.a.matmul(&m)?, c1: atoms.a.mul_vec(&trace.values), base: trace.values.clone(), m, k2: Some((di, f)) };
    let mut sol = if use_newton(cx, params)? {
        let basis = stream_basis_exact(cx, &interior)?;
        newton_path(cx, &atoms, &prob, &basis, y0, params)?
    } else {
        chambolle_pock(cx, &atoms, &prob, y0, params)?
    };
    sol.trace_defect = total;
    Ok(sol)
}

/// Minimal mass representative of the class of a closed β₀ (boundary values kept).
pub fn solve_l1_eikonal(cx: &Complex, beta0: &Cochain, params: L1Params) -> Result<L1Solution> {
    let n = cx.dim;
    if beta0.degree != n - 1 || beta0.values.len() != cx.count(n - 1) {
        return Err(Error::IncompatibleTrace(format!("β₀ must be a {}-cochain with {} values", n - 1, cx.count(n - 1))));
    }
    let db = cx.d[n - 1].mul_vec(&beta0.values);
    if norm_inf(&db) > 1e-9 * beta0.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::IncompatibleTrace(format!("β₀ is not closed: |dβ₀| = {:e}", norm_inf(&db))));
    }
    let inner = cx.interior(n - 2);
    let faces: Vec<usize> = (0..cx.count(n - 1)).collect();
    let c = cx.d[n - 2].select(&faces, &inner);
    let atoms = Atoms::new(cx, params.norm)?;
    let prob = Problem { k1: atoms.a.matmul(&c)?, c1: atoms.a.mul_vec(&beta0.values), base: beta0.values.clone(), m: c, k2: None };
    if use_newton(cx, params)? {
        // without boundary the constant stream function is a null direction
        let skip = usize::from(inner.len() == cx.count(n - 2) && !inner.is_empty());
        let trip: Vec<_> = (skip..inner.len()).map(|i| (i, i - skip, 1.0)).collect();
        let basis = Csr::from_triplets(inner.len(), inner.len() - skip, &trip)?;
        newton_path(cx, &atoms, &prob, &basis, vec![0.0; inner.len()], params)
    } else {
        chambolle_pock(cx, &atoms, &prob, vec![0.0; inner.len()], params)
    }
}

fn use_newton(cx: &Complex, params: L1Params) -> Result<bool> {
    match params.method {
        L1Method::PrimalDual => Ok(false),
        L1Method::Auto => Ok(cx.dim == 2),
        L1Method::Newton if cx.dim == 2 => Ok(true),
        L1Method::Newton => Err(Error::Unsupported(format!("the Newton L1 solver needs a surface, found dimension {}", cx.dim))),
    }
}

/// Columns spanning the closed interior-face cochains of a surface with zero
/// boundary flux: `d` of single interior vertices, plus `d` of the indicator of
/// every boundary component but the first (circulation around a hole).
fn stream_basis_exact(cx: &Complex, interior: &[usize]) -> Result<Csr> {
    let nv = cx.count(0);
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for e in cx.boundary_cells(1) {
        let ends: Vec<usize> = cx.d[0].row(e).map(|x| x.0).collect();
        if let [a, b] = ends[..] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let mut column = vec![usize::MAX; nv];
    let mut next = 0;
    let closed = cx.boundary_cells(0).is_empty();
    // on a closed surface one vertex is dropped to remove the constant
    for v in cx.interior(0).into_iter().skip(usize::from(closed)) {
        column[v] = next;
        next += 1;
    }
    let mut root_column: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut first_root = None;
    for v in cx.boundary_cells(0) {
        let r = find(&mut parent, v);
        if first_root.is_none() {
            first_root = Some(r);
        }
        if Some(r) != first_root {
            column[v] = *root_column.entry(r).or_insert_with(|| {
                next += 1;
                next - 1
            });
        }
    }
    let mut trip = Vec::new();
    for (i, &f) in interior.iter().enumerate() {
        for (v, c) in cx.d[0].row(f) {
            if column[v] != usize::MAX {
                trip.push((i, column[v], c));
            }
        }
    }
    Csr::from_triplets(interior.len(), next, &trip)
}

/// Iterates of the primal–dual pair.
#[derive(Clone)]
struct Point {
    y: Vec<f64>,
    zeta: Vec<f64>,
    phi: Vec<f64>,
}

impl Point {
    fn axpy(&mut self, s: f64, o: &Point) {
        for (a, b) in self.y.iter_mut().zip(&o.y) {
            *a += s * b;
        }
        for (a, b) in self.zeta.iter_mut().zip(&o.zeta) {
            *a += s * b;
        }
        for (a, b) in self.phi.iter_mut().zip(&o.phi) {
            *a += s * b;
        }
    }

    fn scaled(&self, s: f64) -> Point {
        let f = |v: &[f64]| v.iter().map(|x| x * s).collect();
        Point { y: f(&self.y), zeta: f(&self.zeta), phi: f(&self.phi) }
    }
}

/// Unscaled diagonal steps: `τ₀ = 1/colsum`, one `σ₀` per atom, `σ₀ = 1/rowsum` for the constraint.
struct Steps {
    tau: Vec<f64>,
    sigma1: Vec<f64>,
    sigma2: Vec<f64>,
}

fn base_steps(prob: &Problem, width: usize, na: usize) -> Steps {
    let inv = |s: &f64| if *s > 0.0 { 1.0 / s } else { 0.0 };
    let mut col = prob.k1.abs_col_sums();
    if let Some((k2, _)) = &prob.k2 {
        for (c, s) in col.iter_mut().zip(k2.abs_col_sums()) {
            *c += s;
        }
    }
    let rows1 = prob.k1.abs_row_sums();
    let sigma1 = (0..na).map(|a| inv(&rows1[a * width..(a + 1) * width].iter().fold(0.0f64, |m, v| m.max(*v)))).collect();
    let sigma2 = prob.k2.as_ref().map(|(k2, _)| k2.abs_row_sums().iter().map(inv).collect()).unwrap_or_default();
    Steps { tau: col.iter().map(inv).collect(), sigma1, sigma2 }
}

/// KKT error in the metric of the base steps: primal infeasibility,
/// stationarity and the (unverified) objective gap.
fn kkt_error(prob: &Problem, atoms: &Atoms, steps: &Steps, pt: &Point) -> f64 {
    let width = atoms.width;
    let k1y = prob.k1.mul_vec(&pt.y);
    let primal: f64 = k1y
        .iter()
        .zip(&prob.c1)
        .map(|(a, b)| a + b)
        .collect::<Vec<_>>()
        .chunks(width)
        .zip(&atoms.weights)
        .map(|(c, w)| w * norm(c))
        .sum();
    let mut dual = dot(&prob.c1, &pt.zeta);
    let mut stat = prob.k1.mul_vec_t(&pt.zeta);
    let mut infeas = 0.0;
    if let Some((k2, f)) = &prob.k2 {
        dual -= dot(f, &pt.phi);
        for (r, v) in stat.iter_mut().zip(k2.mul_vec_t(&pt.phi)) {
            *r += v;
        }
        infeas = k2.mul_vec(&pt.y).iter().zip(f).zip(&steps.sigma2).map(|((a, b), s)| s * (a - b).powi(2)).sum();
    }
    let stat: f64 = stat.iter().zip(&steps.tau).map(|(r, t)| t * r * r).sum();
    (infeas + stat + (primal - dual).powi(2)).sqrt()
}

fn chambolle_pock(cx: &Complex, atoms: &Atoms, prob: &Problem, y0: Vec<f64>, params: L1Params) -> Result<L1Solution> {
    const KKT_EVERY: usize = 64;
    let width = atoms.width;
    let na = atoms.len();
    let k1t = prob.k1.transpose();
    let k2t = prob.k2.as_ref().map(|(k, _)| k.transpose());
    // diagonal steps (Pock–Chambolle, α = 1) scaled by the primal weight r:
    // τ = r τ₀, σ = σ₀/r; one σ per atom keeps the ball projection exact
    let steps = base_steps(prob, width, na);
    let mut r = params.step_ratio;
    let mut pt = Point { zeta: vec![0.0; na * width], phi: vec![0.0; steps.sigma2.len()], y: y0 };
    let mut ybar = pt.y.clone();
    let mut anchor = pt.clone();
    let mut anchor_kkt = kkt_error(prob, atoms, &steps, &pt);
    let mut last_candidate = f64::INFINITY;
    let mut sum = pt.scaled(0.0);
    let mut count = 0usize;
    let mut since_restart = 0usize;
    let mut log = Vec::new();
    let mut best: Option<Certificate> = None;
    let mut it = 0;
    let scale_w = atoms.weights.iter().sum::<f64>() / na.max(1) as f64;
    loop {
        let check = it % params.check_every.max(1) == 0 || it >= params.max_iters;
        if check && it > 0 || (it == 0 && pt.y.is_empty()) {
            let cert = certify(prob, atoms, &pt.y, &pt.zeta, &pt.phi, scale_w, params.cg)?;
            log::debug!("iteration {it}: primal {:.9e} dual {:.9e} gap {:.3e} ratio {r:.3e}", cert.primal, cert.dual, cert.gap);
            log.push(IterLog { iteration: it, primal: cert.primal, dual: cert.dual, gap: cert.gap });
            let done = cert.gap <= params.tol_gap;
            if best.as_ref().is_none_or(|b| cert.gap < b.gap) {
                best = Some(cert);
            }
            if done || it >= params.max_iters || pt.y.is_empty() {
                break;
            }
        }
        if it > 0 && it % KKT_EVERY == 0 {
            // adaptive restart to the better of the current and averaged iterate
            let avg = sum.scaled(1.0 / count.max(1) as f64);
            let (k_cur, k_avg) = (kkt_error(prob, atoms, &steps, &pt), kkt_error(prob, atoms, &steps, &avg));
            let (cand, k_cand) = if k_avg < k_cur { (avg, k_avg) } else { (pt.clone(), k_cur) };
            let restart = k_cand <= 0.2 * anchor_kkt
                || (k_cand <= 0.8 * anchor_kkt && k_cand > last_candidate)
                || since_restart as f64 >= 0.36 * it as f64;
            last_candidate = k_cand;
            if restart {
                let dy: f64 = cand.y.iter().zip(&anchor.y).zip(&steps.tau).map(|((a, b), t)| if *t > 0.0 { (a - b).powi(2) / t } else { 0.0 }).sum();
                let mut dz: f64 = cand
                    .zeta
                    .iter()
                    .zip(&anchor.zeta)
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let s = steps.sigma1[k / width];
                        if s > 0.0 {
                            (a - b).powi(2) / s
                        } else {
                            0.0
                        }
                    })
                    .sum();
                dz += cand.phi.iter().zip(&anchor.phi).zip(&steps.sigma2).map(|((a, b), s)| if *s > 0.0 { (a - b).powi(2) / s } else { 0.0 }).sum::<f64>();
                if dy > 1e-300 && dz > 1e-300 {
                    // balance the primal and dual movement, smoothed in log scale
                    r = (0.5 * (dy.sqrt() / dz.sqrt()).ln() + 0.5 * r.ln()).exp().clamp(1e-4, 1e4);
                }
                pt = cand;
                ybar = pt.y.clone();
                anchor = pt.clone();
                anchor_kkt = k_cand;
                last_candidate = f64::INFINITY;
                sum = pt.scaled(0.0);
                count = 0;
                since_restart = 0;
            }
        }
        // dual ascent
        let k1y = prob.k1.mul_vec(&ybar);
        for a in 0..na {
            let w = atoms.weights[a];
            let s = steps.sigma1[a] / r;
            let blk = &mut pt.zeta[a * width..(a + 1) * width];
            if s == 0.0 {
                // atoms without free variables take their maximizer outright
                let c = &prob.c1[a * width..(a + 1) * width];
                let nc = norm(c);
                for j in 0..width {
                    blk[j] = if nc > 0.0 { w * c[j] / nc } else { 0.0 };
                }
                continue;
            }
            for j in 0..width {
                let row = a * width + j;
                blk[j] += s * (k1y[row] + prob.c1[row]);
            }
            let nz = norm(blk);
            if nz > w {
                let f = if nz > 0.0 { w / nz } else { 0.0 };
                blk.iter_mut().for_each(|v| *v *= f);
            }
        }
        if let Some((k2, f)) = &prob.k2 {
            let k2y = k2.mul_vec(&ybar);
            for i in 0..pt.phi.len() {
                pt.phi[i] += steps.sigma2[i] / r * (k2y[i] - f[i]);
            }
        }
        // primal descent with extrapolation
        let mut g = k1t.mul_vec(&pt.zeta);
        if let Some(k2t) = &k2t {
            for (gi, v) in g.iter_mut().zip(k2t.mul_vec(&pt.phi)) {
                *gi += v;
            }
        }
        for j in 0..pt.y.len() {
            let new = pt.y[j] - r * steps.tau[j] * g[j];
            ybar[j] = new + params.theta * (new - pt.y[j]);
            pt.y[j] = new;
        }
        sum.axpy(1.0, &pt);
        count += 1;
        since_restart += 1;
        it += 1;
    }
    let cert = best.expect("at least one certificate is computed");
    finish(cx, atoms, prob, cert, it, log, params)
}

fn finish(cx: &Complex, atoms: &Atoms, prob: &Problem, cert: Certificate, it: usize, log: Vec<IterLog>, params: L1Params) -> Result<L1Solution> {
    let width = atoms.width;
    let converged = cert.gap <= params.tol_gap;
    if !converged {
        log::warn!("L1 solver stopped at gap {:e} after {it} iterations", cert.gap);
        if params.require_convergence {
            return Err(Error::NotConverged { iterations: it, gap: cert.gap });
        }
    }
    let beta_vals: Vec<f64> = prob.m.mul_vec(&cert.y).iter().zip(&prob.base).map(|(a, b)| a + b).collect();
    let xi: Vec<Vec<f64>> = cert
        .zeta
        .chunks(width)
        .zip(&atoms.weights)
        .map(|(z, w)| if *w > 0.0 { z.iter().map(|v| v / w).collect() } else { vec![0.0; width] })
        .collect();
    let eta = atoms.a.mul_vec_t(&cert.zeta);
    let psi: Vec<f64> = cert.phi.iter().map(|v| -v).collect();
    Ok(L1Solution {
        beta: Cochain { degree: cx.dim - 1, values: beta_vals },
        eta,
        xi,
        psi,
        primal: cert.primal,
        dual: cert.dual,
        gap: cert.gap,
        iterations: it,
        converged,
        trace_defect: 0.0,
        log,
    })
}

/// Smoothed atom `w|u|` at barrier level μ: `min_t w t − μ log(t² − |u|²)`.
/// Returns `(value, t, q)` with `q = sqrt(μ² + w²|u|²)`.
fn smoothed_atom(w: f64, u: &[f64], mu: f64) -> (f64, f64, f64) {
    let s = norm(u);
    let q = (mu * mu + w * w * s * s).sqrt();
    let t = (mu + q) / w;
    // t² − s² = 2μt/w at the minimizing t
    (w * t - mu * (2.0 * mu * t / w).ln(), t, q)
}

fn smoothed_objective(atoms: &Atoms, u: &[f64], mu: f64) -> f64 {
    u.chunks(atoms.width).zip(&atoms.weights).map(|(c, &w)| if w > 0.0 { smoothed_atom(w, c, mu).0 } else { 0.0 }).sum()
}

/// Barrier path following on `y = y₀ + B z`: Newton steps on the smoothed
/// mass, with μ shrinking until the certified gap reaches the tolerance.
/// The smoothed optimum has gap at most `μ · #atoms` and its dual proxies
/// `u/t` lie strictly inside the unit ball.
fn newton_path(cx: &Complex, atoms: &Atoms, prob: &Problem, basis: &Csr, y0: Vec<f64>, params: L1Params) -> Result<L1Solution> {
    let width = atoms.width;
    let na = atoms.len();
    let jac = prob.k1.matmul(basis)?;
    let u0: Vec<f64> = prob.k1.mul_vec(&y0).iter().zip(&prob.c1).map(|(a, b)| a + b).collect();
    let mut z = vec![0.0; basis.cols];
    let mut u = u0.clone();
    let p0 = atoms.mass(&prob.m.mul_vec(&y0).iter().zip(&prob.base).map(|(a, b)| a + b).collect::<Vec<_>>());
    let active = atoms.weights.iter().filter(|w| **w > 0.0).count().max(1) as f64;
    let mut mu = (p0 / active).max(f64::MIN_POSITIVE);
    let mu_floor = mu * 1e-16;
    let scale_w = atoms.weights.iter().sum::<f64>() / na.max(1) as f64;
    let mut log = Vec::new();
    let mut best: Option<Certificate> = None;
    let mut newton_steps = 0;
    let mut stalled = 0;
    // per-atom column sets of the Jacobian
    let atom_cols: Vec<Vec<usize>> = (0..na)
        .map(|a| {
            let mut cols: Vec<usize> = (a * width..(a + 1) * width).flat_map(|r| jac.row(r).map(|e| e.0)).collect();
            cols.sort_unstable();
            cols.dedup();
            cols
        })
        .collect();
    loop {
        for _ in 0..60 {
            if z.is_empty() || p0 == 0.0 {
                break;
            }
            let mut grad_u = vec![0.0; u.len()];
            let mut trip = Vec::new();
            for a in 0..na {
                let w = atoms.weights[a];
                if w <= 0.0 {
                    continue;
                }
                let ua = &u[a * width..(a + 1) * width];
                let (_, t, q) = smoothed_atom(w, ua, mu);
                for j in 0..width {
                    grad_u[a * width + j] = w * ua[j] / t;
                }
                // Hessian (w/t)(I − w/(t q) u uᵀ) pulled back to the atom's columns
                let cols = &atom_cols[a];
                let k = cols.len();
                let mut ja = vec![0.0; width * k];
                for j in 0..width {
                    for (c, v) in jac.row(a * width + j) {
                        let pos = cols.binary_search(&c).expect("column of this atom");
                        ja[j * k + pos] = v;
                    }
                }
                let (f0, f1) = (w / t, w * w / (t * t * q));
                let proj: Vec<f64> = (0..k).map(|p| (0..width).map(|j| ua[j] * ja[j * k + p]).sum()).collect();
                for p in 0..k {
                    for r in 0..k {
                        let jj: f64 = (0..width).map(|j| ja[j * k + p] * ja[j * k + r]).sum();
                        let h = f0 * jj - f1 * proj[p] * proj[r];
                        if h != 0.0 {
                            trip.push((cols[p], cols[r], h));
                        }
                    }
                }
            }
            let g = jac.mul_vec_t(&grad_u);
            let mut hess = Csr::from_triplets(z.len(), z.len(), &trip)?;
            let max_diag = (0..z.len()).fold(0.0f64, |m, i| m.max(hess.get(i, i)));
            hess = hess.add_diagonal(1e-14 * max_diag.max(f64::MIN_POSITIVE));
            let chol = super::skyline::SkylineCholesky::factor(&hess)?;
            // the barrier makes H ill-conditioned; refine the solve against the exact H
            let mut step: Vec<f64> = chol.solve(&g).iter().map(|v| -v).collect();
            for _ in 0..2 {
                let r: Vec<f64> = hess.mul_vec(&step).iter().zip(&g).map(|(a, b)| -b - a).collect();
                for (si, c) in step.iter_mut().zip(chol.solve(&r)) {
                    *si += c;
                }
            }
            let decrement = -dot(&g, &step);
            newton_steps += 1;
            if !(decrement.is_finite()) || decrement <= 0.0 {
                break;
            }
            let du = jac.mul_vec(&step);
            // F/μ is self-concordant: inside λ² < 1/16 the full step is safe,
            // and there the Armijo test would drown in round-off anyway
            let lambda2 = decrement / mu;
            let mut alpha = 1.0;
            if lambda2 >= 0.0625 {
                let f_now = smoothed_objective(atoms, &u, mu);
                let mut accepted = false;
                for _ in 0..60 {
                    let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
                    if smoothed_objective(atoms, &trial, mu) <= f_now - 0.25 * alpha * decrement {
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            for (ui, d) in u.iter_mut().zip(&du) {
                *ui += alpha * d;
            }
            for (zi, si) in z.iter_mut().zip(&step) {
                *zi += alpha * si;
            }
            if lambda2 < 1e-10 {
                break;
            }
        }
        let y: Vec<f64> = basis.mul_vec(&z).iter().zip(&y0).map(|(a, b)| a + b).collect();
        let zeta: Vec<f64> = (0..na)
            .flat_map(|a| {
                let w = atoms.weights[a];
                let ua = &u[a * width..(a + 1) * width];
                let t = if w > 0.0 { smoothed_atom(w, ua, mu).1 } else { 0.0 };
                ua.iter().map(move |v| if t > 0.0 { w * v / t } else { 0.0 }).collect::<Vec<_>>()
            })
            .collect();
        let phi = vec![0.0; prob.k2.as_ref().map_or(0, |(k, _)| k.rows)];
        let cert = certify(prob, atoms, &y, &zeta, &phi, scale_w, params.cg)?;
        log::debug!("barrier {mu:.3e}: primal {:.9e} dual {:.9e} gap {:.3e}", cert.primal, cert.dual, cert.gap);
        log.push(IterLog { iteration: newton_steps, primal: cert.primal, dual: cert.dual, gap: cert.gap });
        let done = cert.gap <= params.tol_gap;
        if best.as_ref().is_none_or(|b| cert.gap < b.gap) {
            best = Some(cert);
            stalled = 0;
        } else {
            stalled += 1;
        }
        // at very small μ round-off in the Newton systems dominates
        if done || z.is_empty() || p0 == 0.0 || mu < mu_floor || stalled >= 2 || newton_steps >= params.max_iters {
            break;
        }
        mu *= 0.1;
    }
    let cert = best.expect("at least one certificate is computed");
    finish(cx, atoms, prob, cert, newton_steps, log, params)
}

struct Certificate {
    y: Vec<f64>,
    zeta: Vec<f64>,
    phi: Vec<f64>,
    primal: f64,
    dual: f64,
    gap: f64,
}

/// Feasible primal and dual points near the current iterates.
fn certify(prob: &Problem, atoms: &Atoms, y: &[f64], zeta: &[f64], phi: &[f64], s_phi: f64, cg: CgOptions) -> Result<Certificate> {
    let width = atoms.width;
    // primal: project onto K2 y = f with the unweighted normal equations
    let mut yf = y.to_vec();
    if let Some((k2, f)) = &prob.k2 {
        let r: Vec<f64> = k2.mul_vec(y).iter().zip(f).map(|(a, b)| a - b).collect();
        let proj: &dyn Fn(&mut [f64]) = &remove_mean;
        let (lam, _) = conjugate_gradient(|v| k2.mul_vec(&k2.mul_vec_t(v)), &r, None, Some(proj), cg)?;
        for (yi, c) in yf.iter_mut().zip(k2.mul_vec_t(&lam)) {
            *yi -= c;
        }
    }
    let beta: Vec<f64> = prob.m.mul_vec(&yf).iter().zip(&prob.base).map(|(a, b)| a + b).collect();
    let primal = atoms.mass(&beta);
    // dual: closest (ζ', φ') with K1ᵀζ' + K2ᵀφ' = 0 in the weighted norm
    let wrow: Vec<f64> = atoms.weights.iter().flat_map(|w| std::iter::repeat_n(*w, width)).collect();
    let mut phi = phi.to_vec();
    let mut res = prob.k1.mul_vec_t(zeta);
    if let Some((k2, _)) = &prob.k2 {
        for (r, v) in res.iter_mut().zip(k2.mul_vec_t(&phi)) {
            *r += v;
        }
        // absorb the part of the residual that φ alone can cancel
        let rhs: Vec<f64> = k2.mul_vec(&res).iter().map(|v| -v).collect();
        let proj: &dyn Fn(&mut [f64]) = &remove_mean;
        let (dphi, _) = conjugate_gradient(|v| k2.mul_vec(&k2.mul_vec_t(v)), &rhs, None, Some(proj), cg)?;
        for (r, v) in res.iter_mut().zip(k2.mul_vec_t(&dphi)) {
            *r += v;
        }
        for (p, d) in phi.iter_mut().zip(&dphi) {
            *p += d;
        }
    }
    let apply = |l: &[f64]| {
        let k1l: Vec<f64> = prob.k1.mul_vec(l).iter().zip(&wrow).map(|(a, w)| a * w).collect();
        let mut out = prob.k1.mul_vec_t(&k1l);
        if let Some((k2, _)) = &prob.k2 {
            let k2l: Vec<f64> = k2.mul_vec(l).iter().map(|a| a * s_phi).collect();
            for (o, v) in out.iter_mut().zip(k2.mul_vec_t(&k2l)) {
                *o += v;
            }
        }
        out
    };
    let (lam, _) = conjugate_gradient(apply, &res, None, None, cg)?;
    let k1l = prob.k1.mul_vec(&lam);
    let mut zc: Vec<f64> = zeta.iter().zip(&k1l).zip(&wrow).map(|((z, k), w)| z - w * k).collect();
    let mut pc = phi;
    if let Some((k2, _)) = &prob.k2 {
        for (p, k) in pc.iter_mut().zip(k2.mul_vec(&lam)) {
            *p -= s_phi * k;
        }
    }
    let mut s = 1.0f64;
    for (a, w) in atoms.weights.iter().enumerate() {
        let nz = norm(&zc[a * width..(a + 1) * width]);
        if *w > 0.0 {
            s = s.max(nz / w);
        } else if nz > 0.0 {
            // a zero-weight atom must carry no dual mass
            zc[a * width..(a + 1) * width].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    zc.iter_mut().for_each(|v| *v /= s);
    pc.iter_mut().for_each(|v| *v /= s);
    let mut dual = dot(&prob.c1, &zc);
    if let Some((_, f)) = &prob.k2 {
        dual -= dot(f, &pc);
    }
    let gap = if primal > 0.0 { (primal - dual) / primal } else { (primal - dual).abs() };
    Ok(Certificate { y: yf, zeta: zc, phi: pc, primal, dual, gap })
}

/// Cell-wise complementary slackness `max_a |A_a β|(1 − ξ_a·A_aβ/|A_aβ|)`,
/// relative to `max_a |A_a β|`.
pub fn complementary_slackness(atoms: &Atoms, beta: &[f64], xi: &[Vec<f64>]) -> f64 {
    let p = atoms.proxies(beta);
    let max = p.iter().fold(0.0f64, |m, v| m.max(norm(v)));
    if max == 0.0 {
        return 0.0;
    }
    p.iter().zip(xi).fold(0.0f64, |m, (b, x)| m.max(norm(b) - dot(b, x))) / max
}
