use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pointwise::*;
use crate::error::{Error, Result};
use crate::exterior::form_norm;
use crate::fields::{divergence, Jet, MetricField, SmoothField, DEFAULT_EPS_SUPP};
use crate::sampling::quantile_sorted;

/// Default "clearly zero" and "clearly nonzero" thresholds.
pub const ZERO_TOL: f64 = 1e-6;
pub const NONZERO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Zero,
    Nonzero,
    Indeterminate,
}

pub fn classify(value: f64, zero_tol: f64, nonzero_tol: f64) -> Classification {
    if value < zero_tol {
        Classification::Zero
    } else if value > nonzero_tol {
        Classification::Nonzero
    } else {
        Classification::Indeterminate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    ForceFree,
    Beltrami,
    Geodesic,
    Wadsley,
    Normalization,
    Eikonal,
    EikonalContraction,
    Killing,
    KillingIdentity,
    Divergence,
    UnitNorm,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 11] = [
        ResidualKind::ForceFree,
        ResidualKind::Beltrami,
        ResidualKind::Geodesic,
        ResidualKind::Wadsley,
        ResidualKind::Normalization,
        ResidualKind::Eikonal,
        ResidualKind::EikonalContraction,
        ResidualKind::Killing,
        ResidualKind::KillingIdentity,
        ResidualKind::Divergence,
        ResidualKind::UnitNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::ForceFree => "force_free",
            ResidualKind::Beltrami => "beltrami",
            ResidualKind::Geodesic => "geodesic",
            ResidualKind::Wadsley => "wadsley",
            ResidualKind::Normalization => "normalization",
            ResidualKind::Eikonal => "eikonal",
            ResidualKind::EikonalContraction => "eikonal_contraction",
            ResidualKind::Killing => "killing",
            ResidualKind::KillingIdentity => "killing_identity",
            ResidualKind::Divergence => "divergence",
            ResidualKind::UnitNorm => "unit_norm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
}

/// Per-point residual magnitudes with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    pub quantiles: Quantiles,
    /// Per-point auxiliary scalars such as λ, ρ and |B|.
    pub auxiliary: BTreeMap<String, Vec<f64>>,
    /// Number of sample points outside the support of the field.
    pub skipped: usize,
}

/// One evaluated sample: the residual magnitude and named auxiliaries.
pub type Sample = (f64, Vec<(&'static str, f64)>);

impl ResidualReport {
    /// Evaluates `eval` at every point in parallel. Points reporting
    /// out-of-support errors are skipped; other errors abort.
    pub fn evaluate<F>(name: &str, points: &[Vec<f64>], eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Sample> + Sync,
    {
        let results: Vec<Result<Option<Sample>>> = points
            .par_iter()
            .map(|p| match eval(p) {
                Ok(s) => Ok(Some(s)),
                Err(Error::OutOfSupport { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect();
        let mut kept = Vec::new();
        let mut values = Vec::new();
        let mut auxiliary: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut skipped = 0;
        for (p, r) in points.iter().zip(results) {
            match r? {
                Some((v, aux)) => {
                    kept.push(p.clone());
                    values.push(v);
                    for (k, x) in aux {
                        auxiliary.entry(k.to_string()).or_default().push(x);
                    }
                }
                None => skipped += 1,
            }
        }
        Ok(Self::from_values(name, kept, values, auxiliary, skipped))
    }

    pub fn from_values(
        name: &str,
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
        auxiliary: BTreeMap<String, Vec<f64>>,
        skipped: usize,
    ) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let max = sorted.last().copied().unwrap_or(0.0);
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
        let quantiles = Quantiles {
            q50: quantile_sorted(&sorted, 0.5),
            q90: quantile_sorted(&sorted, 0.9),
            q99: quantile_sorted(&sorted, 0.99),
        };
        Self { name: name.to_string(), points, values, max, mean, quantiles, auxiliary, skipped }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Residuals divided by `|B|^power`, using the `b_norm` auxiliary.
    ///
    /// With `power = 2` the force-free and geodesic residuals become invariant
    /// under rescaling of the field, which keeps the two-threshold
    /// classification meaningful near zeros of the field.
    pub fn relative_values(&self, power: i32) -> Result<Vec<f64>> {
        let norms = self
            .auxiliary
            .get("b_norm")
            .ok_or_else(|| Error::InvalidParams(format!("report {} carries no b_norm", self.name)))?;
        Ok(self.values.iter().zip(norms).map(|(v, n)| v / n.powi(power)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per point: coordinates, residual, auxiliaries (sorted by name).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.points.first().map_or(0, |p| p.len());
        let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        header.push("residual".into());
        header.extend(self.auxiliary.keys().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            row.push(self.values[i].to_string());
            row.extend(self.auxiliary.values().map(|v| v[i].to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Residual magnitude of one kind at p, measured in the norm of `g`.
pub fn residual_sample(kind: ResidualKind, b: &SmoothField, g: &MetricField, p: &[f64]) -> Result<Sample> {
    let jet = Jet::new(b, g, p)?;
    let bn = jet.norm();
    Ok(match kind {
        ResidualKind::ForceFree => (form_norm(&jet.metric, &force_free_from_jet(&jet)?)?, vec![("b_norm", bn)]),
        ResidualKind::Beltrami => {
            let c = curl_from_jet(&jet, DEFAULT_EPS_SUPP)?;
            match (c.lambda, c.beltrami) {
                (Some(l), Some(r)) => (c.metric.norm(&r), vec![("lambda", l), ("b_norm", bn)]),
                _ => return Err(Error::OutOfSupport { magnitude: bn, threshold: DEFAULT_EPS_SUPP }),
            }
        }
        ResidualKind::Geodesic => {
            let r = geodesic_from_jet(&jet, DEFAULT_EPS_SUPP)?;
            (r.perp_norm, vec![("rho", r.rho), ("b_norm", bn)])
        }
        ResidualKind::Wadsley => (form_norm(&jet.metric, &wadsley_from_jet(&jet)?)?, vec![("b_norm", bn)]),
        ResidualKind::Normalization => {
            let eta = normalization(b, g, p)?;
            let m = g.at(p)?;
            let en = form_norm(&m, &eta)?;
            // |⋆β| η − ⋆β, with ⋆β recomputed from the flux form
            let star_beta = crate::exterior::hodge_star(&m, &crate::fields::flux_form_at(b, g, p)?)?;
            let sn = form_norm(&m, &star_beta)?;
            let defect = form_norm(&m, &(&eta.scale(sn) - &star_beta))?;
            (defect, vec![("eta_norm", en), ("b_norm", bn)])
        }
        ResidualKind::Eikonal => {
            let e = eikonal_from_jet(&jet, DEFAULT_EPS_SUPP)?;
            (e.d_eta_norm, vec![("contraction", e.contraction_norm), ("b_norm", bn)])
        }
        ResidualKind::EikonalContraction => {
            let e = eikonal_from_jet(&jet, DEFAULT_EPS_SUPP)?;
            (e.contraction_norm, vec![("d_eta", e.d_eta_norm), ("b_norm", bn)])
        }
        ResidualKind::Killing => (symmetric_tensor_norm(&jet.metric, &killing_from_jet(&jet)), vec![("b_norm", bn)]),
        ResidualKind::KillingIdentity => {
            let r = killing_identity_residual(b, g, p)?;
            (form_norm(&jet.metric, &r)?, vec![("b_norm", bn)])
        }
        ResidualKind::Divergence => (divergence(b, g, p)?.abs(), vec![("b_norm", bn)]),
        ResidualKind::UnitNorm => ((bn - 1.0).abs(), vec![("b_norm", bn)]),
    })
}

pub fn residual_report(kind: ResidualKind, b: &SmoothField, g: &MetricField, points: &[Vec<f64>]) -> Result<ResidualReport> {
    let name = format!("{}:{}:{}", kind.name(), b.name(), g.name());
    ResidualReport::evaluate(&name, points, |p| residual_sample(kind, b, g, p))
}
