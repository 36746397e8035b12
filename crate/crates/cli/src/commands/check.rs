//! Pointwise residual reports against configured thresholds.

use anyhow::anyhow;
use conflux::diagnostics::residual_report;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::OutDir;
use crate::{Outcome, Phase, RunError};

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, RunError> {
    let thresholds = &cfg.solver_params.check.thresholds;
    if thresholds.is_empty() {
        return Err(RunError::Config(anyhow!("check needs at least one entry in solver_params.check.thresholds")));
    }
    let mut stems = Vec::new();
    for t in thresholds {
        let stem = match t.relative_power {
            0 => t.kind.name().to_string(),
            p => format!("{}_rel{p}", t.kind.name()),
        };
        if stems.contains(&stem) {
            return Err(RunError::Config(anyhow!("threshold `{stem}` is listed twice")));
        }
        stems.push(stem);
    }
    let field = cfg.build_field().config()?;
    let metric = cfg.metric.build(&field).config()?;
    let domain = cfg.domain_of(&field).config()?;
    let points = cfg.points(&domain).config()?;

    let mut rows = Vec::new();
    let mut all = true;
    for (t, stem) in thresholds.iter().zip(&stems) {
        let report = residual_report(t.kind, &field, &metric, &points).failure()?;
        let values = if t.relative_power == 0 { report.values.clone() } else { report.relative_values(t.relative_power).failure()? };
        let max = values.iter().copied().fold(0.0f64, f64::max);
        // an empty report (every point outside the support) proves nothing
        let pass = !values.is_empty() && max <= t.threshold;
        all &= pass;
        log::info!("{stem}: max {max:e} (threshold {:e}) {}", t.threshold, if pass { "pass" } else { "fail" });
        out.write_json(&format!("{stem}.json"), &report).failure()?;
        out.with_writer(&format!("{stem}.csv"), |w| report.write_csv(w)).failure()?;
        rows.push(json!({
            "kind": t.kind,
            "relative_power": t.relative_power,
            "threshold": t.threshold,
            "max": max,
            "evaluated": values.len(),
            "skipped": report.skipped,
            "pass": pass,
        }));
    }
    let summary = json!({
        "field": field.name(),
        "metric": metric.name(),
        "points": points.len(),
        "checks": rows,
        "pass": all,
    });
    out.write_json("summary.json", &summary).failure()?;
    Ok(Outcome { pass: all, summary })
}
