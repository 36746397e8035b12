//! Per-point transformation-law table and the energy identity for `ḡ = |β|² ĝ`.

use anyhow::anyhow;
use conflux::conformal::{energy_identity, make_pair_eps};
use conflux::quadrature::Quadrature;
use conflux::Error;
use serde_json::{json, Value};

use crate::config::{ConformalMode, RunConfig};
use crate::output::{csv_writer, OutDir};
use crate::{Outcome, Phase, RunError};

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, RunError> {
    let params = &cfg.solver_params.conformal;
    if !matches!(cfg.metric.conformal, ConformalMode::None | ConformalMode::CanonicalBetaSquared) {
        return Err(RunError::Config(anyhow!("conformal builds ḡ from the base metric; set metric.conformal to none or canonical_beta_squared")));
    }
    let field = cfg.build_field().config()?;
    let hat = cfg.metric.base_metric(&field).config()?;
    let pair = match make_pair_eps(&field, &hat, cfg.metric.eps_supp) {
        Ok(p) => p,
        // on surfaces the core error already points at the surface-case operations
        Err(e @ Error::InvalidDimension(_)) => return Err(RunError::Config(e.into())),
        Err(e) => return Err(RunError::Config(e.into())),
    };
    let domain = cfg.domain_of(&field).config()?;
    let points = cfg.points(&domain).config()?;

    let mut wr = csv_writer(out, "conformal.csv").failure()?;
    let n = points[0].len();
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    header.extend(["log_factor", "norm_hat", "norm_bar", "metric", "vector", "volume", "norms", "hodge"].map(String::from));
    wr.write_record(&header).failure()?;
    let (mut worst, mut max_u, mut evaluated, mut skipped) = (0.0f64, 0.0f64, 0usize, 0usize);
    for p in &points {
        let r = match pair.law_residuals(p) {
            Ok(r) => r,
            Err(Error::OutOfSupport { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(RunError::Failure(e.into())),
        };
        evaluated += 1;
        worst = worst.max(r.max());
        max_u = max_u.max(r.log_factor.abs());
        let mut row: Vec<String> = p.iter().map(f64::to_string).collect();
        row.extend([r.log_factor, r.norm_hat, r.norm_bar, r.metric, r.vector, r.volume, r.norms, r.hodge].map(|v| v.to_string()));
        wr.write_record(&row).failure()?;
    }
    wr.flush().failure()?;
    if evaluated == 0 {
        return Err(RunError::Failure(anyhow!("no sample point lies in the support of {}", field.name())));
    }
    let unit = max_u < params.unit_tol;
    if unit {
        log::info!("|B| = 1 at every sample: ḡ = ĝ");
    }

    let mut pass = worst <= params.law_tol;
    let energy = if params.quadrature_nodes > 0 {
        let q = Quadrature::for_domain(&domain, params.quadrature_nodes).config()?;
        let e = energy_identity(&pair, &q).failure()?;
        pass &= e.rel_diff <= params.energy_tol;
        serde_json::to_value(e).failure()?
    } else {
        Value::Null
    };
    let summary = json!({
        "field": field.name(),
        "hat": hat.name(),
        "bar": pair.bar().name(),
        "dimension": pair.dim(),
        "points": evaluated,
        "skipped": skipped,
        "max_law_residual": worst,
        "law_tol": params.law_tol,
        "max_abs_log_factor": max_u,
        "bar_equals_hat": unit,
        "note": if unit { "ḡ = ĝ" } else { "ḡ ≠ ĝ" },
        "energy_identity": energy,
        "energy_tol": params.energy_tol,
        "pass": pass,
    });
    out.write_json("conformal.json", &summary).failure()?;
    Ok(Outcome { pass, summary })
}
