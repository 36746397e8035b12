//! L² and L¹ flux problems on a grid or triangle mesh.

use anyhow::{anyhow, bail};
use conflux::dec::io::{write_vtk, ComplexDocument};
use conflux::dec::l1::{solve_l1_eikonal, solve_l1_exact_eikonal};
use conflux::dec::l2::{solve_l2_exact_harmonic, solve_l2_harmonic};
use conflux::dec::{hierarchy_report, sample_to_cochain_with, Cochain, Complex};
use serde_json::json;

use crate::config::{Problem, RunConfig, TraceSource};
use crate::output::{csv_writer, OutDir};
use crate::{Outcome, Phase, RunError};

/// Unit mass entering through the boundary face nearest `from` and leaving nearest `to`.
fn two_mass(cx: &Complex, from: &[f64], to: &[f64]) -> anyhow::Result<Cochain> {
    let n = cx.dim;
    let faces = cx.boundary_cells(n - 1);
    if faces.is_empty() {
        bail!("two-mass traces need a complex with boundary");
    }
    let nearest = |p: &[f64]| -> anyhow::Result<usize> {
        if p.len() != cx.centers[n - 1][0].len() {
            bail!("two-mass point {p:?} has the wrong dimension");
        }
        let dist = |f: usize| cx.centers[n - 1][f].iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        Ok(faces.iter().copied().min_by(|a, b| dist(*a).total_cmp(&dist(*b))).unwrap())
    };
    // +1 when the face orientation points out of its only cell
    let outward = |f: usize| (0..cx.count(n)).find_map(|c| cx.d[n - 1].row(c).find(|e| e.0 == f).map(|e| e.1)).unwrap_or(1.0);
    let (fp, fq) = (nearest(from)?, nearest(to)?);
    if fp == fq {
        bail!("both masses sit on the same boundary face");
    }
    let mut t = Cochain::zeros(cx, n - 1);
    t.values[fp] = -outward(fp);
    t.values[fq] = outward(fq);
    Ok(t)
}

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, RunError> {
    let params = &cfg.solver_params.solve;
    let homological = matches!(params.problem, Problem::L2Homological | Problem::L1Homological);
    let field = match &cfg.field {
        Some(_) => Some(cfg.build_field().config()?),
        None => None,
    };

    let (cx, input) = match &params.trace {
        TraceSource::Container { path, name } => {
            let text = std::fs::read_to_string(path).map_err(|e| anyhow!("cannot read {}: {e}", path.display())).config()?;
            let doc = ComplexDocument::from_json(&text).config()?;
            let (cx, mut cochains) = doc.build().config()?;
            let c = cochains.remove(name).ok_or_else(|| anyhow!("container has no cochain `{name}`")).config()?;
            (cx, c)
        }
        source => {
            let domain = match (&cfg.domain, &field) {
                (Some(d), _) => d.clone(),
                (None, Some(f)) => cfg.domain_of(f).config()?,
                (None, None) => return Err(RunError::Config(anyhow!("solve needs a `domain` or a `field`"))),
            };
            let cx = Complex::build_grid(&domain, &params.resolution).config()?;
            let n = cx.dim;
            let c = match source {
                TraceSource::Zero => Cochain::zeros(&cx, n - 1),
                TraceSource::TwoMass { .. } if homological => {
                    return Err(RunError::Config(anyhow!("two-mass traces apply to the exact problems")));
                }
                TraceSource::TwoMass { from, to } => two_mass(&cx, from, to).config()?,
                TraceSource::Field => {
                    let f = field.as_ref().ok_or_else(|| anyhow!("trace source `field` needs a `field`")).config()?;
                    let sampled = sample_to_cochain_with(f, &cx, n - 1, params.quadrature_order).config()?;
                    if homological {
                        sampled
                    } else {
                        sampled.boundary_part(&cx)
                    }
                }
                TraceSource::Container { .. } => unreachable!(),
            };
            (cx, c)
        }
    };
    let n = cx.dim;
    log::info!("complex with {} top cells, problem {:?}", cx.count(n), params.problem);

    let mut doc = ComplexDocument::new(&cx).with_cochain(if homological { "beta0" } else { "trace" }, &input);
    let mut vtk_scalars: Vec<(&str, Vec<f64>)> = Vec::new();
    let (beta, eta, summary, pass) = match params.problem {
        Problem::L2Exact | Problem::L2Homological => {
            let sol = if homological { solve_l2_harmonic(&cx, &input, params.cg) } else { solve_l2_exact_harmonic(&cx, &input, params.cg) }.failure()?;
            if !sol.phi.is_empty() {
                doc = doc.with_cochain("phi", &Cochain { degree: n, values: sol.phi.clone() });
                vtk_scalars.push(("phi", sol.phi.clone()));
            }
            let mut wr = csv_writer(out, "convergence.csv").failure()?;
            wr.write_record(["iterations", "residual"]).failure()?;
            wr.write_record([sol.cg.iterations.to_string(), sol.cg.residual.to_string()]).failure()?;
            wr.flush().failure()?;
            let summary = json!({
                "problem": params.problem,
                "energy": sol.energy,
                "stationarity_residual": sol.residual,
                "trace_defect": sol.trace_defect,
                "cg": sol.cg,
            });
            (sol.beta, None, summary, true)
        }
        Problem::L1Exact | Problem::L1Homological => {
            let sol = if homological { solve_l1_eikonal(&cx, &input, params.l1) } else { solve_l1_exact_eikonal(&cx, &input, params.l1) }.failure()?;
            doc = doc.with_cochain("eta", &Cochain { degree: n - 1, values: sol.eta.clone() });
            if !sol.psi.is_empty() {
                doc = doc.with_cochain("psi", &Cochain { degree: n, values: sol.psi.clone() });
                vtk_scalars.push(("psi", sol.psi.clone()));
            }
            out.with_writer("convergence.csv", |w| sol.write_log(w)).failure()?;
            if !sol.converged {
                log::warn!("L¹ solve stopped at relative gap {:e} (target {:e})", sol.gap, params.l1.tol_gap);
            }
            let summary = json!({
                "problem": params.problem,
                "primal": sol.primal,
                "dual": sol.dual,
                "gap": sol.gap,
                "tol_gap": params.l1.tol_gap,
                "iterations": sol.iterations,
                "converged": sol.converged,
                "trace_defect": sol.trace_defect,
            });
            (sol.beta, Some(sol.eta), summary, sol.converged)
        }
    };
    doc = doc.with_cochain("beta", &beta);
    let hierarchy = hierarchy_report(&cx, &beta, eta.as_deref()).failure()?;
    let summary = json!({
        "solution": summary,
        "cells": cx.count(n),
        "hierarchy": hierarchy,
        "pass": pass,
    });
    out.write_json("hierarchy.json", &hierarchy).failure()?;
    let text = doc.to_json().failure()?;
    out.with_writer("solution.json", |w| {
        use std::io::Write;
        Ok(w.write_all(text.as_bytes())?)
    })
    .failure()?;
    if cfg.outputs.vtk {
        let scalars: Vec<(&str, &[f64])> = vtk_scalars.iter().map(|(k, v)| (*k, v.as_slice())).collect();
        out.with_writer("solution.vtk", |w| write_vtk(&cx, w, "conflux solve", Some(&beta), &scalars, &[])).failure()?;
    }
    out.write_json("summary.json", &summary).failure()?;
    if !pass {
        log::error!("solver did not reach the gap target: {}", summary["solution"]);
    }
    Ok(Outcome { pass, summary })
}
