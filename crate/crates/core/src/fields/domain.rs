use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::halton;

/// Extra restriction on top of the coordinate box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Constraint {
    /// Unit sphere in the ambient coordinates (S³ ⊂ R⁴ when the box is 4D).
    UnitSphere,
    /// `r0 ≤ √(x₀² + x₁²) ≤ r1` on the first two coordinates.
    Annulus { r0: f64, r1: f64 },
    /// `√(x₀² + x₁²) ≤ radius` on the first two coordinates.
    Disk { radius: f64 },
}

/// A chart domain: a coordinate box with periodic axes and an optional constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub bounds: Vec<(f64, f64)>,
    #[serde(default)]
    pub periodic: Vec<bool>,
    #[serde(default)]
    pub constraint: Option<Constraint>,
}

const CONTAINS_TOL: f64 = 1e-9;

impl ChartDomain {
    pub fn new(bounds: Vec<(f64, f64)>, periodic: Vec<bool>, constraint: Option<Constraint>) -> Result<Self> {
        let d = Self { bounds, periodic, constraint };
        d.validate()?;
        Ok(d)
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Self {
        let n = bounds.len();
        Self { bounds, periodic: vec![false; n], constraint: None }
    }

    /// The flat torus `(R/2πZ)ⁿ`.
    pub fn torus(n: usize) -> Self {
        let tau = std::f64::consts::TAU;
        Self { bounds: vec![(0.0, tau); n], periodic: vec![true; n], constraint: None }
    }

    pub fn sphere3() -> Self {
        Self { bounds: vec![(-1.0, 1.0); 4], periodic: vec![false; 4], constraint: Some(Constraint::UnitSphere) }
    }

    /// Planar annulus `r0 ≤ r ≤ r1`, optionally times extra box axes.
    pub fn annulus(r0: f64, r1: f64, extra: &[(f64, f64)]) -> Result<Self> {
        let mut bounds = vec![(-r1, r1), (-r1, r1)];
        bounds.extend_from_slice(extra);
        let n = bounds.len();
        Self::new(bounds, vec![false; n], Some(Constraint::Annulus { r0, r1 }))
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(vec![(-radius, radius); 2], vec![false; 2], Some(Constraint::Disk { radius }))
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::InvalidDimension("domain has no axes".into()));
        }
        if self.periodic.len() != self.bounds.len() && !self.periodic.is_empty() {
            return Err(Error::DimensionMismatch { expected: self.bounds.len(), found: self.periodic.len() });
        }
        for (i, &(a, b)) in self.bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidParams(format!("axis {i} has invalid bounds [{a}, {b}]")));
            }
        }
        match self.constraint {
            Some(Constraint::Annulus { r0, r1 }) if !(r0 > 0.0 && r0 < r1) => {
                Err(Error::InvalidParams(format!("annulus needs 0 < r0 < r1, got r0={r0}, r1={r1}")))
            }
            Some(Constraint::Disk { radius }) if !(radius > 0.0) => {
                Err(Error::InvalidParams(format!("disk radius must be positive, got {radius}")))
            }
            Some(Constraint::Annulus { .. }) | Some(Constraint::Disk { .. }) if self.bounds.len() < 2 => {
                Err(Error::InvalidDimension("planar constraint needs two axes".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Intrinsic dimension: one less than the ambient one for the sphere.
    pub fn intrinsic_dim(&self) -> usize {
        match self.constraint {
            Some(Constraint::UnitSphere) => self.dim() - 1,
            _ => self.dim(),
        }
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic.get(axis).copied().unwrap_or(false)
    }

    pub fn period(&self, axis: usize) -> Option<f64> {
        self.is_periodic(axis).then(|| self.bounds[axis].1 - self.bounds[axis].0)
    }

    /// Maps periodic coordinates back into their fundamental interval.
    pub fn wrap(&self, p: &mut [f64]) {
        for (i, x) in p.iter_mut().enumerate() {
            if self.is_periodic(i) {
                let (a, b) = self.bounds[i];
                *x = a + (*x - a).rem_euclid(b - a);
            }
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim() || !p.iter().all(|x| x.is_finite()) {
            return false;
        }
        for (i, &x) in p.iter().enumerate() {
            let (a, b) = self.bounds[i];
            let slack = CONTAINS_TOL * (b - a);
            if !self.is_periodic(i) && (x < a - slack || x > b + slack) {
                return false;
            }
        }
        match self.constraint {
            None => true,
            Some(Constraint::UnitSphere) => {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                (r2 - 1.0).abs() < 1e-8
            }
            Some(Constraint::Annulus { r0, r1 }) => {
                let r = p[0].hypot(p[1]);
                r >= r0 * (1.0 - CONTAINS_TOL) && r <= r1 * (1.0 + CONTAINS_TOL)
            }
            Some(Constraint::Disk { radius }) => p[0].hypot(p[1]) <= radius * (1.0 + CONTAINS_TOL),
        }
    }

    /// Nearest point satisfying the constraint (identity for plain boxes).
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        let mut q = p.to_vec();
        match self.constraint {
            Some(Constraint::UnitSphere) => {
                let r = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 0.0 {
                    q.iter_mut().for_each(|x| *x /= r);
                }
            }
            Some(Constraint::Annulus { r0, r1 }) => {
                let r = q[0].hypot(q[1]);
                if r > 0.0 {
                    let s = r.clamp(r0, r1) / r;
                    q[0] *= s;
                    q[1] *= s;
                }
            }
            Some(Constraint::Disk { radius }) => {
                let r = q[0].hypot(q[1]);
                if r > radius {
                    q[0] *= radius / r;
                    q[1] *= radius / r;
                }
            }
            None => {}
        }
        self.wrap(&mut q);
        q
    }

    /// Deterministic low-discrepancy interior points.
    ///
    /// Unit cube samples are mapped area- (or volume-) uniformly onto the
    /// domain; `margin` is the relative distance kept from the box faces and
    /// from the annulus circles, periodic axes excepted.
    pub fn sample_halton(&self, count: usize, skip: usize, margin: f64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let dims_needed = match self.constraint {
            Some(Constraint::UnitSphere) => 3,
            _ => n,
        };
        let inset = |u: f64, periodic: bool| if periodic { u } else { margin + (1.0 - 2.0 * margin) * u };
        (0..count)
            .map(|i| {
                let u = halton(i + 1 + skip, dims_needed);
                self.map_unit(&u, &inset)
            })
            .collect()
    }

    fn map_unit(&self, u: &[f64], inset: &dyn Fn(f64, bool) -> f64) -> Vec<f64> {
        let tau = std::f64::consts::TAU;
        let n = self.dim();
        let mut p = vec![0.0; n];
        let lerp = |axis: usize, t: f64| {
            let (a, b) = self.bounds[axis];
            a + (b - a) * t
        };
        match self.constraint {
            Some(Constraint::UnitSphere) => {
                // Hopf coordinates: uniform on S³ when sin²η is uniform.
                let s = inset(u[0], false);
                let (a, b) = (tau * u[1], tau * u[2]);
                let (r1, r2) = (s.sqrt(), (1.0 - s).sqrt());
                p[0] = r1 * a.cos();
                p[1] = r1 * a.sin();
                p[2] = r2 * b.cos();
                p[3] = r2 * b.sin();
                for (i, x) in p.iter_mut().enumerate().skip(4) {
                    *x = lerp(i, inset(0.5, false));
                }
            }
            Some(Constraint::Annulus { r0, r1 }) => {
                let t = inset(u[0], false);
                let r = (r0 * r0 + t * (r1 * r1 - r0 * r0)).sqrt();
                let th = tau * u[1];
                p[0] = r * th.cos();
                p[1] = r * th.sin();
                for i in 2..n {
                    p[i] = lerp(i, inset(u[i], self.is_periodic(i)));
                }
            }
            Some(Constraint::Disk { radius }) => {
                let r = radius * (inset(u[0], false)).sqrt();
                let th = tau * u[1];
                p[0] = r * th.cos();
                p[1] = r * th.sin();
                for i in 2..n {
                    p[i] = lerp(i, inset(u[i], self.is_periodic(i)));
                }
            }
            None => {
                for i in 0..n {
                    p[i] = lerp(i, inset(u[i], self.is_periodic(i)));
                }
            }
        }
        p
    }

    /// Deterministic tensor grid of cell midpoints (box domains), filtered by the constraint.
    pub fn sample_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total = per_axis.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; n];
            for (i, x) in p.iter_mut().enumerate() {
                let k = rem % per_axis;
                rem /= per_axis;
                let (a, b) = self.bounds[i];
                *x = a + (b - a) * (k as f64 + 0.5) / per_axis as f64;
            }
            if self.constraint.is_none() || self.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_samples_lie_on_sphere() {
        let d = ChartDomain::sphere3();
        for p in d.sample_halton(200, 0, 0.0) {
            let r: f64 = p.iter().map(|x| x * x).sum();
            assert!((r - 1.0).abs() < 1e-12);
            assert!(d.contains(&p));
        }
    }

    #[test]
    fn annulus_samples_respect_radii() {
        let d = ChartDomain::annulus(0.5, 2.0, &[]).unwrap();
        for p in d.sample_halton(500, 0, 0.01) {
            let r = p[0].hypot(p[1]);
            assert!(r > 0.5 && r < 2.0);
        }
        assert!(ChartDomain::annulus(0.0, 1.0, &[]).is_err());
        assert!(ChartDomain::annulus(2.0, 1.0, &[]).is_err());
    }

    #[test]
    fn wrap_and_project() {
        let d = ChartDomain::torus(3);
        let mut p = vec![-0.5, 7.0, 3.0];
        d.wrap(&mut p);
        assert!((p[0] - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
        assert!((p[1] - (7.0 - std::f64::consts::TAU)).abs() < 1e-12);
        let s = ChartDomain::sphere3();
        let q = s.project(&[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn samples_are_deterministic() {
        let d = ChartDomain::torus(3);
        assert_eq!(d.sample_halton(10, 3, 0.0), d.sample_halton(10, 3, 0.0));
    }
}
