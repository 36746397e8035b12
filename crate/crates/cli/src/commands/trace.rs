//! Field lines, their geodesic defects under each configured metric, and
//! optional Poincaré sections (emitted without assertions).

use anyhow::anyhow;
use conflux::flowlines::{geodesic_defect_along, poincare_section, trace_many, write_lines_csv, write_lines_vtk, write_section_csv, Polyline};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{csv_writer, OutDir};
use crate::{Outcome, Phase, RunError};

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, RunError> {
    let params = &cfg.solver_params.trace;
    if params.steps == 0 {
        return Err(RunError::Config(anyhow!("solver_params.trace.steps must be positive")));
    }
    let field = cfg.build_field().config()?;
    let domain = cfg.domain_of(&field).config()?;
    let seeds = match &params.seeds {
        Some(s) if s.is_empty() => return Err(RunError::Config(anyhow!("solver_params.trace.seeds is empty"))),
        Some(s) => s.clone(),
        None => cfg.points(&domain).config()?,
    };
    let specs = if params.metrics.is_empty() { vec![cfg.metric.clone()] } else { params.metrics.clone() };
    let metrics = specs.iter().map(|s| Ok((s.label(), s.build(&field)?))).collect::<anyhow::Result<Vec<_>>>().config()?;

    let results = trace_many(&field, &seeds, params.h_int, params.steps, params.mode);
    let lines: Vec<Polyline> = results.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    let succeeded = lines.len();
    let fraction = succeeded as f64 / seeds.len() as f64;

    let mut wr = csv_writer(out, "defects.csv").failure()?;
    let dim = seeds[0].len();
    let mut header = vec!["line".to_string()];
    header.extend((0..dim).map(|i| format!("seed{i}")));
    header.extend(["stop", "points", "closure_error"].map(String::from));
    header.extend(metrics.iter().map(|(label, _)| format!("defect_{label}")));
    wr.write_record(&header).failure()?;
    let mut table = Vec::new();
    let mut line_id = 0;
    for (seed, r) in seeds.iter().zip(&results) {
        let mut row: Vec<String> = vec![String::new()];
        row.extend(seed.iter().map(f64::to_string));
        match r {
            Ok(line) => {
                row[0] = line_id.to_string();
                let stop = serde_json::to_value(line.stop).failure()?;
                row.extend([stop.as_str().unwrap_or_default().to_string(), line.points.len().to_string(), line.closure_error().to_string()]);
                let mut defects = serde_json::Map::new();
                for (label, g) in &metrics {
                    // a defect that cannot be evaluated is reported, not fatal
                    let d = geodesic_defect_along(line, g, Some(&domain));
                    row.push(d.as_ref().map_or_else(|_| "NaN".to_string(), f64::to_string));
                    defects.insert(label.clone(), d.map_or_else(|e| json!({"error": e.to_string()}), Value::from));
                }
                table.push(json!({
                    "line": line_id,
                    "seed": seed,
                    "stop": stop,
                    "points": line.points.len(),
                    "closure_error": line.closure_error(),
                    "defects": defects,
                }));
                line_id += 1;
            }
            Err(e) => {
                row[0] = "-".into();
                row.extend(["error".to_string(), "0".into(), "NaN".into()]);
                row.extend(metrics.iter().map(|_| "NaN".to_string()));
                table.push(json!({"seed": seed, "error": e.to_string()}));
            }
        }
        wr.write_record(&row).failure()?;
    }
    wr.flush().failure()?;

    out.with_writer("lines.csv", |w| write_lines_csv(&lines, w)).failure()?;
    if cfg.outputs.vtk {
        out.with_writer("lines.vtk", |w| write_lines_vtk(&lines, w, field.name())).failure()?;
    }
    let section = match &params.section {
        Some(s) => {
            if s.origin.len() != dim || s.normal.len() != dim {
                return Err(RunError::Config(anyhow!("section origin and normal need dimension {dim}")));
            }
            let res = poincare_section(&field, &s.origin, &s.normal, &seeds, params.h_int, s.crossings, s.max_steps);
            out.with_writer("section.csv", |w| write_section_csv(&res, w)).failure()?;
            let errors: Vec<Value> =
                res.iter().filter_map(|r| r.error.as_ref().map(|e| json!({"seed": r.seed_id, "error": e}))).collect();
            json!({"seeds": res.len(), "crossings": res.iter().map(|r| r.crossings.len()).sum::<usize>(), "errors": errors})
        }
        None => Value::Null,
    };

    let pass = fraction >= params.min_success;
    let summary = json!({
        "field": field.name(),
        "metrics": metrics.iter().map(|(label, g)| json!({"label": label, "name": g.name()})).collect::<Vec<_>>(),
        "seeds": seeds.len(),
        "traced": succeeded,
        "success_fraction": fraction,
        "min_success": params.min_success,
        "lines": table,
        "section": section,
        "pass": pass,
    });
    out.write_json("defects.json", &summary).failure()?;
    Ok(Outcome { pass, summary })
}
