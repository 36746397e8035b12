//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod dec;
pub mod lp;

use conflux::exterior::{hodge_star, interior_product, AlternatingForm, MetricAtPoint, TangentVec};
use conflux::fields::{flux_form_at, MetricField, SmoothField};
use nalgebra::DMatrix;

/// Christoffel symbols from central differences of the effective metric.
pub fn fd_christoffel(g: &MetricField, p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let mat = |q: &[f64]| g.at(q).unwrap().matrix().clone();
    let g0 = mat(p);
    let gi = g0.clone().try_inverse().unwrap();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[k] += h;
            b[k] -= h;
            (mat(&a) - mat(&b)) / (2.0 * h)
        })
        .collect();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += 0.5 * gi[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[(k * n + i) * n + j] = s;
            }
        }
    }
    out
}

/// `d` of a pointwise-defined 1-form by central differences.
pub fn fd_d_one_form(f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], h: f64) -> AlternatingForm {
    let n = p.len();
    let partial = |k: usize| {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        let (fa, fb) = (f(&a), f(&b));
        fa.iter().zip(&fb).map(|(x, y)| (x - y) / (2.0 * h)).collect::<Vec<f64>>()
    };
    let parts: Vec<Vec<f64>> = (0..n).map(partial).collect();
    let mut out = AlternatingForm::zero(n, 2);
    for i in 0..n {
        for j in i + 1..n {
            out.set_component(&[i, j], parts[i][j] - parts[j][i]);
        }
    }
    out
}

/// `ι_B d⋆β` with `⋆β` recomputed pointwise through the Hodge star of `ι_B μ`
/// and differentiated numerically.
pub fn fd_force_free(b: &SmoothField, g: &MetricField, p: &[f64], h: f64) -> AlternatingForm {
    let star_beta = |q: &[f64]| {
        let m = g.at(q).unwrap();
        let beta = flux_form_at(b, g, q).unwrap();
        hodge_star(&m, &beta).unwrap().into_comps()
    };
    let d = fd_d_one_form(&star_beta, p, h);
    interior_product(&b.vector(p).unwrap(), &d).unwrap()
}

/// Covariant derivative `∇_X Y` in a chart from FD Christoffels and the field jacobian.
pub fn fd_covariant(g: &MetricField, x: &[f64], y: &SmoothField, p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let gamma = fd_christoffel(g, p, h);
    let jac = y.fd_jacobian(p).unwrap();
    let yv = y.value(p).unwrap();
    (0..n)
        .map(|k| {
            let mut s = 0.0;
            for j in 0..n {
                s += jac[(k, j)] * x[j];
                for i in 0..n {
                    s += gamma[(k * n + i) * n + j] * x[i] * yv[j];
                }
            }
            s
        })
        .collect()
}

/// Metric norm of a one-form given by components.
pub fn one_form_norm(m: &MetricAtPoint, comps: &[f64]) -> f64 {
    let v = nalgebra::DVector::from_column_slice(comps);
    (v.transpose() * m.inverse() * v)[0].max(0.0).sqrt()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn vec_close(a: &TangentVec, b: &[f64], tol: f64) -> bool {
    a.as_slice().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
