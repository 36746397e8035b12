//! Metric fields: a closed-form base metric times `e^{2u}` for a sum of log factors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::{FieldKind, SmoothField};
use super::jet::Jet;
use crate::error::{Error, Result};
use crate::exterior::MetricAtPoint;

/// Support threshold below which `|B|` counts as zero.
pub const DEFAULT_EPS_SUPP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseMetric {
    Euclidean { dim: usize },
    /// `|dx|² / x_{n-1}²` on the half-space `x_{n-1} > 0` (the hyperbolic half-plane for n = 2).
    HalfSpace { dim: usize },
    /// `dr² + r² dθ²` in coordinates `(r, θ)`.
    Polar,
    /// Round metric pulled back by stereographic projection: `4|dx|² / (1 + |x|²)²`.
    StereographicSphere { dim: usize },
    /// Metric induced on the unit sphere S³ ⊂ R⁴. Local quantities are expressed
    /// in an orthonormal tangent frame chosen deterministically at each point.
    RoundSphere,
    Constant { matrix: Vec<Vec<f64>> },
}

impl BaseMetric {
    pub fn ambient_dim(&self) -> usize {
        match self {
            BaseMetric::Euclidean { dim } | BaseMetric::HalfSpace { dim } | BaseMetric::StereographicSphere { dim } => *dim,
            BaseMetric::Polar => 2,
            BaseMetric::RoundSphere => 4,
            BaseMetric::Constant { matrix } => matrix.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaseMetric::Euclidean { .. } => "euclidean",
            BaseMetric::HalfSpace { .. } => "half_space",
            BaseMetric::Polar => "polar",
            BaseMetric::StereographicSphere { .. } => "stereographic_sphere",
            BaseMetric::RoundSphere => "round_sphere",
            BaseMetric::Constant { .. } => "constant",
        }
    }

    /// Chart metric and its coordinate derivatives `∂_k g` (chart bases only).
    fn chart_at(&self, p: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let n = self.ambient_dim();
        let zeros = || vec![DMatrix::zeros(n, n); n];
        match self {
            BaseMetric::Euclidean { .. } => Ok((DMatrix::identity(n, n), zeros())),
            BaseMetric::HalfSpace { .. } => {
                let y = p[n - 1];
                if !(y > 0.0) {
                    return Err(Error::OutOfDomain(p.to_vec()));
                }
                let mut dg = zeros();
                dg[n - 1] = DMatrix::identity(n, n) * (-2.0 / (y * y * y));
                Ok((DMatrix::identity(n, n) / (y * y), dg))
            }
            BaseMetric::Polar => {
                let r = p[0];
                if !(r > 0.0) {
                    return Err(Error::OutOfDomain(p.to_vec()));
                }
                let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, r * r]));
                let mut dg = zeros();
                dg[0][(1, 1)] = 2.0 * r;
                Ok((g, dg))
            }
            BaseMetric::StereographicSphere { .. } => {
                let s: f64 = p.iter().map(|x| x * x).sum();
                let c = 4.0 / (1.0 + s).powi(2);
                let dc = -16.0 / (1.0 + s).powi(3);
                let dg = (0..n).map(|k| DMatrix::identity(n, n) * (dc * p[k])).collect();
                Ok((DMatrix::identity(n, n) * c, dg))
            }
            BaseMetric::Constant { matrix } => {
                let g = DMatrix::from_fn(n, n, |i, j| matrix[i].get(j).copied().unwrap_or(f64::NAN));
                Ok((g, zeros()))
            }
            BaseMetric::RoundSphere => Err(Error::Unsupported("round sphere has no chart coordinates".into())),
        }
    }
}

/// Orthonormal frame of `T_p S³` (4×3), oriented so that `(p, e₁, e₂, e₃)` is positive in R⁴.
pub fn sphere_frame(p: &[f64]) -> Result<DMatrix<f64>> {
    let r2: f64 = p.iter().map(|x| x * x).sum();
    if p.len() != 4 || (r2 - 1.0).abs() > 1e-8 {
        return Err(Error::OutOfDomain(p.to_vec()));
    }
    let pv = DVector::from_column_slice(p);
    let m = (0..4).max_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).expect("four entries");
    let s = if p[m] >= 0.0 { 1.0 } else { -1.0 };
    // Householder reflection H with H p = -s e_m; its other columns span p⊥.
    let mut v = pv.clone();
    v[m] += s;
    let h = DMatrix::identity(4, 4) - (&v * v.transpose()) * (2.0 / v.norm_squared());
    let cols: Vec<usize> = (0..4).filter(|&c| c != m).collect();
    let mut e = DMatrix::from_fn(4, 3, |i, j| h[(i, cols[j])]);
    let mut full = DMatrix::zeros(4, 4);
    full.set_column(0, &pv);
    for j in 0..3 {
        full.set_column(j + 1, &e.column(j));
    }
    if full.determinant() < 0.0 {
        let c = -e.column(2).into_owned();
        e.set_column(2, &c);
    }
    Ok(e)
}

/// Contribution `u` to the log conformal factor.
#[derive(Debug, Clone)]
pub enum LogFactor {
    /// An explicit scalar field `u`.
    Scalar(SmoothField),
    /// `u = power · log |B|_metric`, defined where `|B| > eps_supp`.
    NormPower { field: SmoothField, metric: Box<MetricField>, power: f64, eps_supp: f64 },
}

/// Effective metric `e^{2u} · base` with `u` the sum of the log factors.
#[derive(Debug, Clone)]
pub struct MetricField {
    name: String,
    base: BaseMetric,
    factors: Vec<LogFactor>,
}

/// Coefficients `Γ^k_{ij}`, stored as `data[(k * n + i) * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[(k * n + i) * n + j] = v;
    }

    /// `Γ^k_{ij} u^i v^j` for each k.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Levi-Civita coefficients from `g` and its coordinate derivatives.
    pub fn from_metric(g_inv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Self {
        let n = g_inv.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                // lowered Γ_{l,ij} = ½ (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
                let lowered: Vec<f64> = (0..n).map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).collect();
                for k in 0..n {
                    let v: f64 = (0..n).map(|l| g_inv[(k, l)] * lowered[l]).sum();
                    out.set(k, i, j, v);
                    out.set(k, j, i, v);
                }
            }
        }
        out
    }
}

impl MetricField {
    pub fn new(base: BaseMetric) -> Self {
        Self { name: base.name().to_string(), base, factors: Vec::new() }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(BaseMetric::Euclidean { dim })
    }

    pub fn round_sphere() -> Self {
        Self::new(BaseMetric::RoundSphere)
    }

    pub fn half_plane() -> Self {
        Self::new(BaseMetric::HalfSpace { dim: 2 }).renamed("half_plane")
    }

    pub fn stereographic_sphere() -> Self {
        Self::new(BaseMetric::StereographicSphere { dim: 3 })
    }

    pub fn constant(matrix: &DMatrix<f64>) -> Self {
        let rows = (0..matrix.nrows()).map(|i| matrix.row(i).iter().copied().collect()).collect();
        Self::new(BaseMetric::Constant { matrix: rows })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Adds a log factor: the result is `e^{2u} · self`.
    pub fn with_factor(mut self, factor: LogFactor) -> Self {
        self.factors.push(factor);
        self
    }

    /// `e^{2u} · self` for an explicit scalar field `u`.
    pub fn conformal(self, u: SmoothField) -> Result<Self> {
        if u.kind() != FieldKind::Scalar {
            return Err(Error::InvalidParams("conformal factor must be a scalar field".into()));
        }
        if u.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: u.dim() });
        }
        let name = format!("{}_conformal", self.name);
        Ok(self.with_factor(LogFactor::Scalar(u)).renamed(name))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &BaseMetric {
        &self.base
    }

    pub fn factors(&self) -> &[LogFactor] {
        &self.factors
    }

    pub fn has_factors(&self) -> bool {
        !self.factors.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    /// Intrinsic dimension (3 for the round S³).
    pub fn dim(&self) -> usize {
        match self.base {
            BaseMetric::RoundSphere => 3,
            _ => self.ambient_dim(),
        }
    }

    pub fn is_embedded(&self) -> bool {
        matches!(self.base, BaseMetric::RoundSphere)
    }

    /// Tangent frame at p (embedded bases only).
    pub fn frame(&self, p: &[f64]) -> Result<Option<DMatrix<f64>>> {
        if self.is_embedded() {
            sphere_frame(p).map(Some)
        } else {
            Ok(None)
        }
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: p.len() });
        }
        Ok(())
    }

    /// Total log factor `u` and its differential in local coordinates
    /// (chart coordinates, or frame components on embedded bases).
    pub fn log_factor(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_point(p)?;
        let n = self.dim();
        let frame = self.frame(p)?;
        let mut u = 0.0;
        let mut du = vec![0.0; n];
        for f in &self.factors {
            match f {
                LogFactor::Scalar(s) => {
                    u += s.scalar(p)?;
                    let grad = s.jacobian(p)?;
                    let local: Vec<f64> = match &frame {
                        Some(e) => (e.transpose() * grad.transpose()).iter().copied().collect(),
                        None => grad.iter().copied().collect(),
                    };
                    du.iter_mut().zip(local).for_each(|(a, b)| *a += b);
                }
                LogFactor::NormPower { field, metric, power, eps_supp } => {
                    let jet = Jet::new(field, metric, p)?;
                    let nsq = jet.norm_sq();
                    if nsq.sqrt() <= *eps_supp {
                        return Err(Error::OutOfSupport { magnitude: nsq.sqrt(), threshold: *eps_supp });
                    }
                    u += 0.5 * power * nsq.ln();
                    for (a, d) in du.iter_mut().zip(jet.d_norm_sq.comps()) {
                        *a += 0.5 * power * d / nsq;
                    }
                }
            }
        }
        Ok((u, du))
    }

    /// Effective metric in local coordinates at p.
    pub fn at(&self, p: &[f64]) -> Result<MetricAtPoint> {
        self.check_point(p)?;
        let u = if self.factors.is_empty() { 0.0 } else { self.log_factor(p)?.0 };
        let g0 = match self.base {
            BaseMetric::RoundSphere => {
                sphere_frame(p)?;
                DMatrix::identity(3, 3)
            }
            _ => self.base.chart_at(p)?.0,
        };
        MetricAtPoint::new(g0 * (2.0 * u).exp(), 1)
    }

    /// Base metric (without factors) in local coordinates at p.
    pub fn base_at(&self, p: &[f64]) -> Result<MetricAtPoint> {
        self.check_point(p)?;
        match self.base {
            BaseMetric::RoundSphere => {
                sphere_frame(p)?;
                Ok(MetricAtPoint::euclidean(3))
            }
            _ => MetricAtPoint::new(self.base.chart_at(p)?.0, 1),
        }
    }

    /// Effective chart metric and its first coordinate derivatives.
    pub fn chart_derivatives(&self, p: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        self.check_point(p)?;
        let (g0, dg0) = self.base.chart_at(p)?;
        if self.factors.is_empty() {
            return Ok((g0, dg0));
        }
        let (u, du) = self.log_factor(p)?;
        let e = (2.0 * u).exp();
        let dg = dg0.iter().zip(&du).map(|(d, dk)| (d + &g0 * (2.0 * dk)) * e).collect();
        Ok((g0 * e, dg))
    }

    /// Levi-Civita coefficients in chart coordinates.
    pub fn christoffel(&self, p: &[f64]) -> Result<Christoffel> {
        if self.is_embedded() {
            return Err(Error::Unsupported(
                "Christoffel symbols need chart coordinates; embedded metrics use ambient projection".into(),
            ));
        }
        let (g, dg) = self.chart_derivatives(p)?;
        let m = MetricAtPoint::new(g, 1)?;
        Ok(Christoffel::from_metric(m.inverse(), &dg))
    }
}
