//! The run configuration: one JSON document describing a whole job.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use conflux::conformal::{killing_unit_factor, make_pair_eps};
use conflux::dec::l1::L1Params;
use conflux::dec::CgOptions;
use conflux::diagnostics::{ResidualKind, NONZERO_TOL, ZERO_TOL};
use conflux::fields::catalog::{custom_field, CustomFieldSpec, FieldSpec};
use conflux::fields::{BaseMetric, ChartDomain, FdOptions, FieldKind, MetricField, SmoothField, DEFAULT_EPS_SUPP, DEFAULT_H_FD};
use conflux::flowlines::TraceMode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Conformal,
    Solve,
    Trace,
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Conformal => "conformal",
            Command::Solve => "solve",
            Command::Trace => "trace",
            Command::Catalog => "catalog",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub metric: MetricSpec,
    /// Overrides the field's own domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<ChartDomain>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub solver_params: SolverParams,
    #[serde(default)]
    pub outputs: Outputs,
    /// Start index of the Halton sequence.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConformalMode {
    None,
    /// `ḡ = |β|² ĝ` built from the configured field.
    CanonicalBetaSquared,
    /// `h = g / |B|²_g`.
    KillingUnit,
    /// `e^{2u} g` with `u` a JSON expression in the field's variables.
    ExplicitU { u: Value },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    /// Defaults to the Euclidean metric of the field's dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseMetric>,
    #[serde(default = "no_conformal")]
    pub conformal: ConformalMode,
    #[serde(default = "default_eps_supp")]
    pub eps_supp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn no_conformal() -> ConformalMode {
    ConformalMode::None
}

fn default_eps_supp() -> f64 {
    DEFAULT_EPS_SUPP
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self { base: None, conformal: ConformalMode::None, eps_supp: DEFAULT_EPS_SUPP, name: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    Halton {
        count: usize,
        /// Relative distance kept from non-periodic faces.
        #[serde(default)]
        margin: f64,
    },
    Grid { per_axis: usize },
    Points { points: Vec<Vec<f64>> },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Halton { count: 1000, margin: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Finite-difference step for fields without closed-form derivatives.
    pub h_fd: f64,
    pub richardson: bool,
    pub zero_tol: f64,
    pub nonzero_tol: f64,
    pub check: CheckParams,
    pub conformal: ConformalParams,
    pub solve: SolveParams,
    pub trace: TraceParams,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            h_fd: DEFAULT_H_FD,
            richardson: false,
            zero_tol: ZERO_TOL,
            nonzero_tol: NONZERO_TOL,
            check: CheckParams::default(),
            conformal: ConformalParams::default(),
            solve: SolveParams::default(),
            trace: TraceParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    pub kind: ResidualKind,
    /// Bound on the largest residual.
    pub threshold: f64,
    /// Divide residuals by `|B|^power` first (2 makes force-free and geodesic scale-free).
    #[serde(default)]
    pub relative_power: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CheckParams {
    pub thresholds: Vec<Threshold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConformalParams {
    /// Nodes per axis of the energy quadrature (0 skips the energy identity).
    pub quadrature_nodes: usize,
    pub law_tol: f64,
    pub energy_tol: f64,
    /// `|log|B||` below this everywhere means `ḡ = ĝ`.
    pub unit_tol: f64,
}

impl Default for ConformalParams {
    fn default() -> Self {
        Self { quadrature_nodes: 32, law_tol: 1e-9, energy_tol: 1e-6, unit_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// Minimal L² energy with prescribed boundary flux.
    #[default]
    L2Exact,
    /// Minimal L² energy in the class of a closed β₀.
    L2Homological,
    L1Exact,
    L1Homological,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSource {
    /// Boundary fluxes (exact problems) or all fluxes (homological problems) of the field.
    Field,
    Zero,
    /// Unit mass entering at the boundary face nearest `from` and leaving nearest `to`.
    TwoMass { from: Vec<f64>, to: Vec<f64> },
    /// A container document holding the complex geometry's cochain `name`.
    Container { path: PathBuf, name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveParams {
    pub problem: Problem,
    pub resolution: Vec<usize>,
    pub trace: TraceSource,
    /// Gauss order for sampling fluxes of the field.
    pub quadrature_order: usize,
    pub cg: CgOptions,
    pub l1: L1Params,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            problem: Problem::L2Exact,
            resolution: vec![16, 16],
            trace: TraceSource::Field,
            quadrature_order: 3,
            cg: CgOptions::default(),
            l1: L1Params::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub origin: Vec<f64>,
    pub normal: Vec<f64>,
    pub crossings: usize,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceParams {
    /// Explicit seeds; otherwise `sampling` generates them.
    pub seeds: Option<Vec<Vec<f64>>>,
    pub h_int: f64,
    pub steps: usize,
    pub mode: TraceMode,
    /// Metrics for the defect table; empty means the configured metric.
    pub metrics: Vec<MetricSpec>,
    pub section: Option<SectionSpec>,
    /// Fraction of seeds that must trace successfully.
    pub min_success: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self { seeds: None, h_int: 1e-2, steps: 1000, mode: TraceMode::Parameter, metrics: Vec::new(), section: None, min_success: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: PathBuf,
    pub vtk: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: PathBuf::from("conflux-out"), vtk: true }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run configuration serializes")
    }

    /// Checks values that the schema alone cannot.
    pub fn validate(&self) -> Result<()> {
        let s = &self.solver_params;
        let positive = [("h_fd", s.h_fd), ("zero_tol", s.zero_tol), ("nonzero_tol", s.nonzero_tol), ("trace.h_int", s.trace.h_int)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                bail!("solver_params.{name} must be positive and finite, got {v}");
            }
        }
        if s.zero_tol > s.nonzero_tol {
            bail!("solver_params.zero_tol must not exceed nonzero_tol");
        }
        for t in &s.check.thresholds {
            if !(t.threshold.is_finite() && t.threshold >= 0.0) {
                bail!("threshold for {} must be finite and non-negative", t.kind.name());
            }
        }
        if !(0.0..=1.0).contains(&s.trace.min_success) {
            bail!("solver_params.trace.min_success must lie in [0, 1]");
        }
        if !(self.metric.eps_supp.is_finite() && self.metric.eps_supp >= 0.0) {
            bail!("metric.eps_supp must be finite and non-negative");
        }
        match &self.sampling {
            Sampling::Halton { count: 0, .. } | Sampling::Grid { per_axis: 0 } => bail!("sampling produces no points"),
            Sampling::Halton { margin, .. } if !(0.0..0.5).contains(margin) => bail!("sampling.margin must lie in [0, 0.5)"),
            Sampling::Points { points } if points.is_empty() => bail!("sampling produces no points"),
            Sampling::Points { points } if points.iter().flatten().any(|x| !x.is_finite()) => bail!("sample points must be finite"),
            _ => {}
        }
        Ok(())
    }

    pub fn build_field(&self) -> Result<SmoothField> {
        let spec = self.field.as_ref().ok_or_else(|| anyhow!("this command needs a `field`"))?;
        let mut field = spec.build().with_context(|| format!("cannot build field `{}`", spec.name))?;
        if let Some(d) = &self.domain {
            d.validate()?;
            if d.dim() != field.dim() {
                bail!("domain has dimension {} but the field has {}", d.dim(), field.dim());
            }
            field = field.with_domain(d.clone());
        }
        let fd = FdOptions { h_fd: self.solver_params.h_fd, richardson: self.solver_params.richardson };
        Ok(field.with_fd(fd))
    }

    pub fn domain_of(&self, field: &SmoothField) -> Result<ChartDomain> {
        field.domain().cloned().ok_or_else(|| anyhow!("field `{}` has no domain; set `domain`", field.name()))
    }

    /// Sample points, Halton indices offset by the seed.
    pub fn points(&self, domain: &ChartDomain) -> Result<Vec<Vec<f64>>> {
        let skip = usize::try_from(self.seed).context("seed too large")?;
        let pts = match &self.sampling {
            Sampling::Halton { count, margin } => domain.sample_halton(*count, skip, *margin),
            Sampling::Grid { per_axis } => domain.sample_grid(*per_axis),
            Sampling::Points { points } => {
                if let Some(p) = points.iter().find(|p| p.len() != domain.dim()) {
                    bail!("sample point {p:?} does not have dimension {}", domain.dim());
                }
                points.clone()
            }
        };
        if pts.is_empty() {
            bail!("sampling produced no points inside the domain");
        }
        Ok(pts)
    }
}

impl MetricSpec {
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let base = self.base.as_ref().map_or("euclidean", |b| b.name());
        match &self.conformal {
            ConformalMode::None => base.to_string(),
            ConformalMode::CanonicalBetaSquared => format!("{base}_canonical"),
            ConformalMode::KillingUnit => format!("{base}_killing_unit"),
            ConformalMode::ExplicitU { .. } => format!("{base}_explicit_u"),
        }
    }

    pub fn base_metric(&self, field: &SmoothField) -> Result<MetricField> {
        let base = self.base.clone().unwrap_or(BaseMetric::Euclidean { dim: field.dim() });
        if base.ambient_dim() != field.dim() {
            bail!("metric `{}` acts on dimension {} but the field has {}", base.name(), base.ambient_dim(), field.dim());
        }
        if let BaseMetric::Constant { matrix } = &base {
            if matrix.iter().any(|r| r.len() != matrix.len() || r.iter().any(|x| !x.is_finite())) {
                bail!("constant metric must be a finite square matrix");
            }
        }
        Ok(MetricField::new(base))
    }

    /// The effective metric; canonical mode refuses surfaces.
    pub fn build(&self, field: &SmoothField) -> Result<MetricField> {
        let g = self.base_metric(field)?;
        let g = match &self.conformal {
            ConformalMode::None => g,
            ConformalMode::CanonicalBetaSquared => make_pair_eps(field, &g, self.eps_supp)?.bar().clone(),
            ConformalMode::KillingUnit => killing_unit_factor(field, &g)?,
            ConformalMode::ExplicitU { u } => {
                let spec = CustomFieldSpec {
                    kind: FieldKind::Scalar,
                    dim: field.dim(),
                    variables: None,
                    components: vec![u.clone()],
                    domain: None,
                    name: Some("u".into()),
                };
                g.conformal(custom_field(&spec)?)?
            }
        };
        Ok(match &self.name {
            Some(n) => g.renamed(n.clone()),
            None => g,
        })
    }
}
