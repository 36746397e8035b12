//! Named analytic fields with closed-form jacobians.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::domain::ChartDomain;
use super::expr::{default_variables, Expr};
use super::field::{FieldKind, SmoothField};
use crate::error::{Error, Result};
use crate::exterior::binomial;

pub const CATALOG_NAMES: &[&str] = &[
    "abc_flow",
    "hopf",
    "hopf_stereographic",
    "annulus_grad_log_r",
    "annulus_rotational",
    "annulus_product",
    "contact_standard_alpha",
    "reeb_standard",
    "rotation_killing",
    "hyperbolic_killing",
    "constant",
    "shear",
    "custom",
];

/// Short description and parameter list for each catalog entry.
pub fn describe(name: &str) -> Option<(&'static str, &'static [&'static str])> {
    Some(match name {
        "abc_flow" => ("(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x) on the flat 3-torus", &["A", "B", "C"]),
        "hopf" => ("(-x2, x1, -x4, x3) on the unit sphere S3 in R4", &[]),
        "hopf_stereographic" => ("stereographic image of the Hopf field in R3, unit length for the pulled-back round metric", &["extent"]),
        "annulus_grad_log_r" => ("(x, y)/r^2 on r0 <= r <= r1", &["r0", "r1"]),
        "annulus_rotational" => ("(-y, x)/r^2 on r0 <= r <= r1", &["r0", "r1"]),
        "annulus_product" => ("(x/r^2, y/r^2, 0, 0) on annulus x [0,1]^2", &["r0", "r1"]),
        "contact_standard_alpha" => ("one-form dz + y dx in odd dimension", &["dim"]),
        "reeb_standard" => ("constant vector field d/dz", &["dim"]),
        "rotation_killing" => ("(-y, x, 0, ...) off the rotation axis", &["dim"]),
        "hyperbolic_killing" => ("d/dx on the upper half-plane", &[]),
        "constant" => ("constant vector field (c1, ..., cn)", &["dim", "c1", "c2", "c3", "c4", "c5"]),
        "shear" => ("(y, 0, 0)", &[]),
        "custom" => ("fields built from JSON expressions", &[]),
        _ => return None,
    })
}

struct Params<'a> {
    name: &'a str,
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn get(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }

    fn dim(&self, default: usize, min: usize) -> Result<usize> {
        let d = self.get("dim", default as f64);
        if d.fract() != 0.0 || d < min as f64 || d > crate::exterior::MAX_DIM as f64 {
            return Err(Error::InvalidParams(format!("{}: dim must be an integer in {min}..={}", self.name, crate::exterior::MAX_DIM)));
        }
        Ok(d as usize)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, v) in self.map {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidParams(format!("{}: unknown parameter `{k}`", self.name)));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{}: parameter `{k}` is not finite", self.name)));
            }
        }
        Ok(())
    }

    fn radii(&self) -> Result<(f64, f64)> {
        let (r0, r1) = (self.get("r0", 0.5), self.get("r1", 2.0));
        if !(r0 > 0.0 && r1 > r0) {
            return Err(Error::InvalidParams(format!("{}: need 0 < r0 < r1, got r0={r0}, r1={r1}", self.name)));
        }
        Ok((r0, r1))
    }
}

/// Builds a catalog field. `custom` needs expressions and goes through [`custom_field`].
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<SmoothField> {
    let p = Params { name, map: params };
    if let Some((_, keys)) = describe(name) {
        p.check_keys(keys)?;
    }
    match name {
        "abc_flow" => Ok(abc_flow(p.get("A", 1.0), p.get("B", 1.0), p.get("C", 1.0))),
        "hopf" => Ok(hopf()),
        "hopf_stereographic" => {
            let l = p.get("extent", 2.0);
            if !(l > 0.0) {
                return Err(Error::InvalidParams("hopf_stereographic: extent must be positive".into()));
            }
            Ok(hopf_stereographic(l))
        }
        "annulus_grad_log_r" => {
            let (r0, r1) = p.radii()?;
            annulus_grad_log_r(r0, r1)
        }
        "annulus_rotational" => {
            let (r0, r1) = p.radii()?;
            annulus_rotational(r0, r1)
        }
        "annulus_product" => {
            let (r0, r1) = p.radii()?;
            annulus_product(r0, r1)
        }
        "contact_standard_alpha" => {
            let n = p.dim(3, 3)?;
            if n % 2 == 0 {
                return Err(Error::EvenDimension(n));
            }
            Ok(contact_standard_alpha(n))
        }
        "reeb_standard" => Ok(reeb_standard(p.dim(3, 3)?)),
        "rotation_killing" => Ok(rotation_killing(p.dim(3, 2)?)),
        "hyperbolic_killing" => Ok(hyperbolic_killing()),
        "constant" => {
            let n = p.dim(3, 1)?;
            let c: Vec<f64> = (1..=n).map(|i| p.get(&format!("c{i}"), 0.0)).collect();
            Ok(constant(&c))
        }
        "shear" => Ok(shear()),
        "custom" => Err(Error::InvalidParams("custom fields need expressions; use a custom field spec".into())),
        other => Err(Error::UnknownField(other.to_string())),
    }
}

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub fn abc_flow(a: f64, b: f64, c: f64) -> SmoothField {
    SmoothField::new(
        "abc_flow",
        FieldKind::Vector,
        3,
        Arc::new(move |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            vec![a * z.sin() + c * y.cos(), b * x.sin() + a * z.cos(), c * y.sin() + b * x.cos()]
        }),
    )
    .with_jacobian(Arc::new(move |p| {
        let (x, y, z) = (p[0], p[1], p[2]);
        mat(3, 3, &[0.0, -c * y.sin(), a * z.cos(), b * x.cos(), 0.0, -a * z.sin(), -b * x.sin(), c * y.cos(), 0.0])
    }))
    .with_domain(ChartDomain::torus(3))
}

pub fn hopf() -> SmoothField {
    SmoothField::new("hopf", FieldKind::Vector, 4, Arc::new(|p| vec![-p[1], p[0], -p[3], p[2]]))
        .with_jacobian(Arc::new(|_| {
            let mut j = DMatrix::zeros(4, 4);
            j[(0, 1)] = -1.0;
            j[(1, 0)] = 1.0;
            j[(2, 3)] = -1.0;
            j[(3, 2)] = 1.0;
            j
        }))
        .with_domain(ChartDomain::sphere3())
}

/// Hopf field pushed to R³ by stereographic projection; every orbit is a
/// circle (or the vertical axis) of period 2π.
pub fn hopf_stereographic(extent: f64) -> SmoothField {
    SmoothField::new(
        "hopf_stereographic",
        FieldKind::Vector,
        3,
        Arc::new(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            vec![x * z - y, y * z + x, 0.5 * (1.0 + z * z - x * x - y * y)]
        }),
    )
    .with_jacobian(Arc::new(|p| {
        let (x, y, z) = (p[0], p[1], p[2]);
        mat(3, 3, &[z, -1.0, x, 1.0, z, y, -x, -y, z])
    }))
    .with_domain(ChartDomain::boxed(vec![(-extent, extent); 3]))
}

fn planar_jacobian(data: [f64; 4], n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    j[(0, 0)] = data[0];
    j[(0, 1)] = data[1];
    j[(1, 0)] = data[2];
    j[(1, 1)] = data[3];
    j
}

fn radial(n: usize) -> (Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>, Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>) {
    (
        Arc::new(move |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            let mut v = vec![0.0; n];
            v[0] = p[0] / r2;
            v[1] = p[1] / r2;
            v
        }),
        Arc::new(move |p| {
            let (x, y) = (p[0], p[1]);
            let r4 = (x * x + y * y).powi(2);
            planar_jacobian([(y * y - x * x) / r4, -2.0 * x * y / r4, -2.0 * x * y / r4, (x * x - y * y) / r4], n)
        }),
    )
}

pub fn annulus_grad_log_r(r0: f64, r1: f64) -> Result<SmoothField> {
    let (v, j) = radial(2);
    Ok(SmoothField::new("annulus_grad_log_r", FieldKind::Vector, 2, v)
        .with_jacobian(j)
        .with_domain(ChartDomain::annulus(r0, r1, &[])?))
}

pub fn annulus_rotational(r0: f64, r1: f64) -> Result<SmoothField> {
    Ok(SmoothField::new(
        "annulus_rotational",
        FieldKind::Vector,
        2,
        Arc::new(|p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            vec![-p[1] / r2, p[0] / r2]
        }),
    )
    .with_jacobian(Arc::new(|p| {
        let (x, y) = (p[0], p[1]);
        let r4 = (x * x + y * y).powi(2);
        planar_jacobian([2.0 * x * y / r4, (y * y - x * x) / r4, (y * y - x * x) / r4, -2.0 * x * y / r4], 2)
    }))
    .with_domain(ChartDomain::annulus(r0, r1, &[])?))
}

/// `grad log r` on the annulus extended trivially by two flat directions.
pub fn annulus_product(r0: f64, r1: f64) -> Result<SmoothField> {
    let (v, j) = radial(4);
    Ok(SmoothField::new("annulus_product", FieldKind::Vector, 4, v)
        .with_jacobian(j)
        .with_domain(ChartDomain::annulus(r0, r1, &[(0.0, 1.0), (0.0, 1.0)])?))
}

/// The one-form `dz + y dx` (coordinates x, y, z, ...).
pub fn contact_standard_alpha(n: usize) -> SmoothField {
    SmoothField::new(
        "contact_standard_alpha",
        FieldKind::Form(1),
        n,
        Arc::new(move |p| {
            let mut a = vec![0.0; n];
            a[0] = p[1];
            a[2] = 1.0;
            a
        }),
    )
    .with_jacobian(Arc::new(move |_| {
        let mut j = DMatrix::zeros(n, n);
        j[(0, 1)] = 1.0;
        j
    }))
    .with_domain(ChartDomain::boxed(vec![(-1.0, 1.0); n]))
}

pub fn reeb_standard(n: usize) -> SmoothField {
    let mut c = vec![0.0; n];
    c[2] = 1.0;
    constant(&c).renamed("reeb_standard")
}

/// Rotation about the axis `x = y = 0`, sampled off the axis.
pub fn rotation_killing(n: usize) -> SmoothField {
    let extra = vec![(-1.0, 1.0); n - 2];
    SmoothField::new(
        "rotation_killing",
        FieldKind::Vector,
        n,
        Arc::new(move |p| {
            let mut v = vec![0.0; n];
            v[0] = -p[1];
            v[1] = p[0];
            v
        }),
    )
    .with_jacobian(Arc::new(move |_| planar_jacobian([0.0, -1.0, 1.0, 0.0], n)))
    .with_domain(ChartDomain::annulus(0.25, 2.0, &extra).expect("valid annulus"))
}

pub fn hyperbolic_killing() -> SmoothField {
    constant(&[1.0, 0.0])
        .renamed("hyperbolic_killing")
        .with_domain(ChartDomain::boxed(vec![(-1.0, 1.0), (0.5, 2.0)]))
}

pub fn constant(c: &[f64]) -> SmoothField {
    let n = c.len();
    let v = c.to_vec();
    SmoothField::new("constant", FieldKind::Vector, n, Arc::new(move |_| v.clone()))
        .with_jacobian(Arc::new(move |_| DMatrix::zeros(n, n)))
        .with_domain(ChartDomain::boxed(vec![(-1.0, 1.0); n]))
}

pub fn shear() -> SmoothField {
    SmoothField::new("shear", FieldKind::Vector, 3, Arc::new(|p| vec![p[1], 0.0, 0.0]))
        .with_jacobian(Arc::new(|_| mat(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])))
        .with_domain(ChartDomain::boxed(vec![(-1.0, 1.0); 3]))
}

/// User-defined field given by one JSON expression per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomFieldSpec {
    pub kind: FieldKind,
    pub dim: usize,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    pub components: Vec<Value>,
    #[serde(default)]
    pub domain: Option<ChartDomain>,
    #[serde(default)]
    pub name: Option<String>,
}

pub fn custom_field(spec: &CustomFieldSpec) -> Result<SmoothField> {
    let n = spec.dim;
    if n == 0 || n > crate::exterior::MAX_DIM {
        return Err(Error::InvalidDimension(format!("custom field dimension {n}")));
    }
    let vars = spec.variables.clone().unwrap_or_else(|| default_variables(n));
    if vars.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: vars.len() });
    }
    let expected = match spec.kind {
        FieldKind::Scalar => 1,
        FieldKind::Vector => n,
        FieldKind::Form(k) if k <= n => binomial(n, k),
        FieldKind::Form(k) => return Err(Error::InvalidDegree { op: "custom_field", degree: k }),
    };
    if spec.components.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: spec.components.len() });
    }
    if let Some(d) = &spec.domain {
        d.validate()?;
        if d.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d.dim() });
        }
    }
    let exprs: Vec<Expr> = spec.components.iter().map(|c| Expr::parse(c, &vars)).collect::<Result<_>>()?;
    let derivs: Vec<Vec<Expr>> = exprs.iter().map(|e| (0..n).map(|i| e.diff(i)).collect()).collect();
    let exprs = Arc::new(exprs);
    let derivs = Arc::new(derivs);
    let m = expected;
    let mut field = SmoothField::new(
        spec.name.clone().unwrap_or_else(|| "custom".into()),
        spec.kind,
        n,
        Arc::new(move |p| exprs.iter().map(|e| e.eval(p)).collect()),
    )
    .with_jacobian(Arc::new(move |p| DMatrix::from_fn(m, n, |i, j| derivs[i][j].eval(p))));
    if let Some(d) = &spec.domain {
        field = field.with_domain(d.clone());
    }
    Ok(field)
}

/// Catalog name plus parameters, or a custom expression field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomFieldSpec>,
}

impl FieldSpec {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), params: BTreeMap::new(), custom: None }
    }

    pub fn build(&self) -> Result<SmoothField> {
        match (&self.custom, self.name.as_str()) {
            (Some(spec), _) => custom_field(spec),
            (None, name) => catalog(name, &self.params),
        }
    }
}
