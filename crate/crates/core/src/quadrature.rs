//! Tensor quadrature rules on chart domains.
//!
//! Weights integrate against the reference measure of the metric's local
//! coordinates: Lebesgue measure in charts, the round volume on S³. Integrals
//! of densities therefore multiply by `√det g` of the local metric.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ChartDomain, Constraint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Golub–Welsch).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn rule_1d(a: f64, b: f64, count: usize, midpoint: bool) -> (Vec<f64>, Vec<f64>) {
    if midpoint {
        let h = (b - a) / count as f64;
        ((0..count).map(|i| a + h * (i as f64 + 0.5)).collect(), vec![h; count])
    } else {
        let (x, w) = gauss_legendre(count);
        let half = 0.5 * (b - a);
        (x.iter().map(|t| a + half * (t + 1.0)).collect(), w.iter().map(|w| w * half).collect())
    }
}

fn tensor(rules: &[(Vec<f64>, Vec<f64>)]) -> Quadrature {
    let mut points = vec![Vec::new()];
    let mut weights = vec![1.0];
    for (x, w) in rules {
        let mut np = Vec::with_capacity(points.len() * x.len());
        let mut nw = Vec::with_capacity(points.len() * x.len());
        for (p, pw) in points.iter().zip(&weights) {
            for (xi, wi) in x.iter().zip(w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        points = np;
        weights = nw;
    }
    Quadrature { points, weights }
}

impl Quadrature {
    /// Midpoint rule on periodic axes and Gauss–Legendre elsewhere, `count` nodes per axis.
    ///
    /// Annuli and disks use polar coordinates; the sphere S³ uses Hopf coordinates.
    pub fn for_domain(domain: &ChartDomain, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParams("quadrature needs at least one node per axis".into()));
        }
        let tau = std::f64::consts::TAU;
        let n = domain.dim();
        match domain.constraint {
            None => {
                let rules: Vec<_> =
                    (0..n).map(|i| rule_1d(domain.bounds[i].0, domain.bounds[i].1, count, domain.is_periodic(i))).collect();
                Ok(tensor(&rules))
            }
            Some(Constraint::Annulus { .. }) | Some(Constraint::Disk { .. }) => {
                let (r0, r1) = match domain.constraint {
                    Some(Constraint::Annulus { r0, r1 }) => (r0, r1),
                    Some(Constraint::Disk { radius }) => (0.0, radius),
                    _ => unreachable!(),
                };
                let mut rules = vec![rule_1d(r0, r1, count, false), rule_1d(0.0, tau, count, true)];
                for i in 2..n {
                    rules.push(rule_1d(domain.bounds[i].0, domain.bounds[i].1, count, domain.is_periodic(i)));
                }
                let polar = tensor(&rules);
                let (points, weights) = polar
                    .points
                    .into_iter()
                    .zip(polar.weights)
                    .map(|(p, w)| {
                        let mut q = p.clone();
                        q[0] = p[0] * p[1].cos();
                        q[1] = p[0] * p[1].sin();
                        (q, w * p[0])
                    })
                    .unzip();
                Ok(Quadrature { points, weights })
            }
            Some(Constraint::UnitSphere) => {
                if n != 4 {
                    return Err(Error::Unsupported("sphere quadrature is implemented for S3 only".into()));
                }
                // x = (√s cos a, √s sin a, √(1−s) cos b, √(1−s) sin b), round volume ½ ds da db
                let rules = [rule_1d(0.0, 1.0, count, false), rule_1d(0.0, tau, count, true), rule_1d(0.0, tau, count, true)];
                let hopf = tensor(&rules);
                let (points, weights) = hopf
                    .points
                    .into_iter()
                    .zip(hopf.weights)
                    .map(|(u, w)| {
                        let (r1, r2) = (u[0].sqrt(), (1.0 - u[0]).sqrt());
                        (vec![r1 * u[1].cos(), r1 * u[1].sin(), r2 * u[2].cos(), r2 * u[2].sin()], 0.5 * w)
                    })
                    .unzip();
                Ok(Quadrature { points, weights })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}
