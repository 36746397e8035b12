use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::domain::ChartDomain;
use crate::error::{Error, Result};
use crate::exterior::{binomial, AlternatingForm, TangentVec};

/// Default central-difference step.
pub const DEFAULT_H_FD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    /// A differential form of the given degree (degree 1 is a one-form).
    Form(usize),
}

pub type ValueFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Finite-difference settings used when no closed-form jacobian exists
/// (or when one is requested explicitly for comparison).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    pub h_fd: f64,
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { h_fd: DEFAULT_H_FD, richardson: false }
    }
}

/// A field over a chart domain with value and first derivatives.
///
/// Values are flat component arrays: one entry for scalars, `n` for vectors and
/// `C(n,k)` for k-forms (lexicographic multi-index order). The jacobian has one
/// row per component and one column per coordinate.
#[derive(Clone)]
pub struct SmoothField {
    name: String,
    kind: FieldKind,
    dim: usize,
    domain: Option<ChartDomain>,
    value: ValueFn,
    jacobian: Option<JacobianFn>,
    fd: FdOptions,
}

impl fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothField")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("closed_form_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl SmoothField {
    pub fn new(name: impl Into<String>, kind: FieldKind, dim: usize, value: ValueFn) -> Self {
        Self { name: name.into(), kind, dim, domain: None, value, jacobian: None, fd: FdOptions::default() }
    }

    pub fn with_jacobian(mut self, jacobian: JacobianFn) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn with_domain(mut self, domain: ChartDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_fd(mut self, fd: FdOptions) -> Self {
        self.fd = fd;
        self
    }

    /// Drops the closed-form jacobian so derivatives come from finite differences.
    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = None;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Number of chart (ambient) coordinates.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Option<&ChartDomain> {
        self.domain.as_ref()
    }

    pub fn fd_options(&self) -> FdOptions {
        self.fd
    }

    pub fn has_closed_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn component_count(&self) -> usize {
        match self.kind {
            FieldKind::Scalar => 1,
            FieldKind::Vector => self.dim,
            FieldKind::Form(k) => binomial(self.dim, k),
        }
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        if let Some(d) = &self.domain {
            if !d.contains(p) {
                return Err(Error::OutOfDomain(p.to_vec()));
            }
        }
        Ok(())
    }

    /// Raw evaluation with only a finiteness check; used by stencils that may
    /// step marginally outside the domain.
    pub fn eval_unchecked(&self, p: &[f64]) -> Result<Vec<f64>> {
        let v = (self.value)(p);
        if v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(Error::OutOfDomain(p.to_vec()))
        }
    }

    pub fn value(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_point(p)?;
        self.eval_unchecked(p)
    }

    pub fn scalar(&self, p: &[f64]) -> Result<f64> {
        Ok(self.value(p)?[0])
    }

    pub fn vector(&self, p: &[f64]) -> Result<TangentVec> {
        Ok(TangentVec::new(self.value(p)?))
    }

    pub fn form(&self, p: &[f64]) -> Result<AlternatingForm> {
        let k = match self.kind {
            FieldKind::Form(k) => k,
            FieldKind::Scalar => 0,
            FieldKind::Vector => return Err(Error::Unsupported(format!("{} is a vector field, not a form", self.name))),
        };
        AlternatingForm::new(self.dim, k, self.value(p)?)
    }

    /// Jacobian, closed-form when available, otherwise central differences.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        match &self.jacobian {
            Some(j) => {
                let m = j(p);
                if m.iter().all(|x| x.is_finite()) {
                    Ok(m)
                } else {
                    Err(Error::OutOfDomain(p.to_vec()))
                }
            }
            None => self.fd_jacobian_with(p, self.fd),
        }
    }

    /// Central-difference jacobian regardless of closed-form availability.
    pub fn fd_jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        self.fd_jacobian_with(p, self.fd)
    }

    pub fn fd_jacobian_with(&self, p: &[f64], fd: FdOptions) -> Result<DMatrix<f64>> {
        let central = |h: f64| -> Result<DMatrix<f64>> {
            let m = self.component_count();
            let mut jac = DMatrix::zeros(m, self.dim);
            let mut q = p.to_vec();
            for j in 0..self.dim {
                q[j] = p[j] + h;
                let fp = self.eval_unchecked(&q)?;
                q[j] = p[j] - h;
                let fm = self.eval_unchecked(&q)?;
                q[j] = p[j];
                for i in 0..m {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            Ok(jac)
        };
        let coarse = central(fd.h_fd)?;
        if fd.richardson {
            let fine = central(0.5 * fd.h_fd)?;
            Ok((fine * 4.0 - coarse) / 3.0)
        } else {
            Ok(coarse)
        }
    }

    /// Reinterprets a vector field as a one-form with the same components, or
    /// the reverse (the Euclidean musical isomorphism).
    pub fn euclidean_dual(&self) -> Result<SmoothField> {
        let kind = match self.kind {
            FieldKind::Vector => FieldKind::Form(1),
            FieldKind::Form(1) => FieldKind::Vector,
            _ => return Err(Error::Unsupported("euclidean_dual needs a vector field or one-form".into())),
        };
        let mut out = self.clone();
        out.kind = kind;
        out.name = format!("{}_dual", self.name);
        Ok(out)
    }

    /// Pointwise scaling by a constant.
    pub fn scaled(&self, c: f64) -> SmoothField {
        let v = self.value.clone();
        let mut out = SmoothField {
            name: format!("{}_x{}", self.name, c),
            kind: self.kind,
            dim: self.dim,
            domain: self.domain.clone(),
            value: Arc::new(move |p| v(p).into_iter().map(|x| c * x).collect()),
            jacobian: None,
            fd: self.fd,
        };
        if let Some(j) = &self.jacobian {
            let j = j.clone();
            out.jacobian = Some(Arc::new(move |p| j(p) * c));
        }
        out
    }
}
