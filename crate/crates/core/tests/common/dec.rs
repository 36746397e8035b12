//! Grid fixtures and dense oracles for the flux solvers.

use conflux::dec::{Complex, Cochain};
use conflux::fields::{ChartDomain, FieldKind, SmoothField};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use super::lp::simplex;

pub fn unit_square(n: usize) -> Complex {
    Complex::build_grid(&ChartDomain::boxed(vec![(0.0, 1.0); 2]), &[n, n]).unwrap()
}

pub fn vector_field(name: &str, n: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> SmoothField {
    SmoothField::new(name, FieldKind::Vector, n, Arc::new(f))
}

/// Coefficient of a boundary face in its only adjacent top cell (+1 outward).
pub fn outward(cx: &Complex, f: usize) -> f64 {
    let n = cx.dim;
    (0..cx.count(n)).find_map(|c| cx.d[n - 1].row(c).find(|e| e.0 == f).map(|e| e.1)).unwrap()
}

pub fn nearest_boundary_face(cx: &Complex, p: &[f64]) -> usize {
    let n = cx.dim;
    let dist = |f: usize| cx.centers[n - 1][f].iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    cx.boundary_cells(n - 1).into_iter().min_by(|a, b| dist(*a).total_cmp(&dist(*b))).unwrap()
}

/// Unit mass entering near p and leaving near q.
pub fn two_mass_trace(cx: &Complex, p: &[f64], q: &[f64]) -> Cochain {
    let mut t = Cochain::zeros(cx, cx.dim - 1);
    let (fp, fq) = (nearest_boundary_face(cx, p), nearest_boundary_face(cx, q));
    t.values[fp] = -outward(cx, fp);
    t.values[fq] = outward(cx, fq);
    t
}

pub fn random_balanced_trace(cx: &Complex, rng: &mut ChaCha8Rng) -> Cochain {
    let n = cx.dim;
    let mut t = Cochain::zeros(cx, n - 1);
    let faces = cx.boundary_cells(n - 1);
    let mut total = 0.0;
    for &f in &faces {
        t.values[f] = rng.gen_range(-1.0..1.0);
        total += outward(cx, f) * t.values[f];
    }
    for &f in &faces {
        t.values[f] -= total / faces.len() as f64 * outward(cx, f);
    }
    t
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Dense KKT solve of min ½ Σ w y² subject to D y = f (one redundant row dropped).
pub fn dense_l2_oracle(cx: &Complex, trace: &Cochain) -> Vec<f64> {
    let n = cx.dim;
    let interior = cx.interior(n - 1);
    let cells = cx.count(n);
    let d = cx.d[n - 1].to_dense();
    let w = cx.hodge(n - 1);
    let f = cx.d[n - 1].mul_vec(&trace.values);
    let (ni, m) = (interior.len(), cells - 1);
    let mut k = DMatrix::zeros(ni + m, ni + m);
    let mut rhs = DVector::zeros(ni + m);
    for (i, &fi) in interior.iter().enumerate() {
        k[(i, i)] = w[fi];
        for c in 0..m {
            k[(i, ni + c)] = d[(c, fi)];
            k[(ni + c, i)] = d[(c, fi)];
        }
    }
    for c in 0..m {
        rhs[ni + c] = -f[c];
    }
    let sol = k.lu().solve(&rhs).unwrap();
    let mut beta = trace.values.clone();
    for (i, &fi) in interior.iter().enumerate() {
        beta[fi] = sol[i];
    }
    beta
}

/// Unit circulation around the inner ring of cells of a polar annulus grid.
pub fn inner_ring_circulation(cx: &Complex) -> Cochain {
    let mut b = Cochain::zeros(cx, 1);
    let r0 = cx.centers[0].iter().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).fold(f64::INFINITY, f64::min);
    let nodes_r = |e: usize| {
        let v = cx.cell_vertices(1, e);
        v.iter().map(|&i| (cx.centers[0][i][0].powi(2) + cx.centers[0][i][1].powi(2)).sqrt()).collect::<Vec<_>>()
    };
    for e in 0..cx.count(1) {
        let r = nodes_r(e);
        // radial edges touching the inner circle
        if (r[0] - r[1]).abs() > 1e-9 && r.iter().any(|x| (x - r0).abs() < 1e-9) {
            let t = &cx.cell_nodes(1, e, 1)[0];
            let p = &t.point;
            // flux of a counterclockwise flow through the edge: ι_F μ on the tangent, F = (−y, x)/r
            let rr = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let v = (-p[1] * t.tangents[0][1] - p[0] * t.tangents[0][0]) / rr;
            b.values[e] = v.signum();
        }
    }
    b
}

pub fn face_costs(cx: &Complex) -> Vec<f64> {
    let n = cx.dim;
    cx.metric_dual_volume(n - 1)
}

/// LP value of the face-weighted mass over closed cochains with the given trace.
pub fn lp_exact_level(cx: &Complex, trace: &Cochain) -> f64 {
    let n = cx.dim;
    let interior = cx.interior(n - 1);
    let cost = face_costs(cx);
    let d = cx.d[n - 1].to_dense();
    let f = cx.d[n - 1].mul_vec(&trace.values);
    let (ni, m) = (interior.len(), cx.count(n) - 1);
    let mut a = DMatrix::zeros(m, 2 * ni);
    for c in 0..m {
        for (i, &fi) in interior.iter().enumerate() {
            a[(c, i)] = d[(c, fi)];
            a[(c, ni + i)] = -d[(c, fi)];
        }
    }
    let b: Vec<f64> = f[..m].iter().map(|v| -v).collect();
    let c: Vec<f64> = interior.iter().chain(interior.iter()).map(|&fi| cost[fi]).collect();
    let fixed: f64 = cx.boundary_cells(n - 1).iter().map(|&fi| cost[fi] * trace.values[fi].abs()).sum();
    simplex(&a, &b, &c).unwrap().0 + fixed
}
