//! Field-line tracing with classical RK4, geodesic defects of traced lines
//! under a chosen metric, and Poincaré sections.
//!
//! Lines on periodic domains are traced in the universal cover: stored points
//! are continuous lifts and the field is evaluated at their wrapped images.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ChartDomain, MetricField, SmoothField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// Steps along B/|B| (chart norm), so h_int is a chart arclength step.
    Arclength,
    /// Steps along B itself, so h_int is a flow-time step.
    #[default]
    Parameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// The next step would have left the domain.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Vec<f64>>,
    pub h_int: f64,
    pub mode: TraceMode,
    pub field: String,
    pub seed: Vec<f64>,
    pub stop: StopReason,
}

impl Polyline {
    /// Distance between the last and first point (lifted coordinates).
    pub fn closure_error(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
            _ => 0.0,
        }
    }

    /// Points mapped into the fundamental domain.
    pub fn wrapped_points(&self, domain: &ChartDomain) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| {
                let mut q = p.clone();
                domain.wrap(&mut q);
                q
            })
            .collect()
    }

    /// Every other point: the same curve at half density.
    pub fn decimated(&self) -> Polyline {
        Polyline { points: self.points.iter().step_by(2).cloned().collect(), h_int: 2.0 * self.h_int, ..self.clone() }
    }
}

fn velocity(field: &SmoothField, p: &[f64], mode: TraceMode) -> Result<Option<Vec<f64>>> {
    let mut q = p.to_vec();
    if let Some(d) = field.domain() {
        d.wrap(&mut q);
        if !d.contains(&q) {
            return Ok(None);
        }
    }
    let v = field.value(&q)?;
    Ok(Some(match mode {
        TraceMode::Parameter => v,
        TraceMode::Arclength => {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv == 0.0 {
                return Err(Error::OutOfSupport { magnitude: 0.0, threshold: 0.0 });
            }
            v.iter().map(|x| x / nv).collect()
        }
    }))
}

/// One RK4 step; None when a stage leaves the domain.
fn rk4_step(field: &SmoothField, p: &[f64], h: f64, mode: TraceMode) -> Result<Option<Vec<f64>>> {
    let shift = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, v)| x + s * v).collect() };
    let Some(k1) = velocity(field, p, mode)? else { return Ok(None) };
    let Some(k2) = velocity(field, &shift(p, &k1, 0.5 * h), mode)? else { return Ok(None) };
    let Some(k3) = velocity(field, &shift(p, &k2, 0.5 * h), mode)? else { return Ok(None) };
    let Some(k4) = velocity(field, &shift(p, &k3, h), mode)? else { return Ok(None) };
    let next: Vec<f64> = (0..p.len()).map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    if let Some(d) = field.domain() {
        let mut q = next.clone();
        d.wrap(&mut q);
        if !d.contains(&q) {
            return Ok(None);
        }
    }
    Ok(Some(next))
}

/// Integral curve of B from `seed` with `steps` fixed RK4 steps of size `h_int`.
pub fn trace(field: &SmoothField, seed: &[f64], h_int: f64, steps: usize, mode: TraceMode) -> Result<Polyline> {
    if !(h_int > 0.0 && h_int.is_finite()) {
        return Err(Error::InvalidParams(format!("h_int must be positive, found {h_int}")));
    }
    if seed.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), found: seed.len() });
    }
    if let Some(d) = field.domain() {
        let mut q = seed.to_vec();
        d.wrap(&mut q);
        if !d.contains(&q) {
            return Err(Error::OutOfDomain(seed.to_vec()));
        }
    }
    let mut points = Vec::with_capacity(steps + 1);
    points.push(seed.to_vec());
    let mut stop = StopReason::Completed;
    for _ in 0..steps {
        match rk4_step(field, points.last().expect("seed is stored"), h_int, mode)? {
            Some(p) => points.push(p),
            None => {
                stop = StopReason::Boundary;
                break;
            }
        }
    }
    Ok(Polyline { points, h_int, mode, field: field.name().to_string(), seed: seed.to_vec(), stop })
}

/// Independent traces from many seeds, in seed order.
pub fn trace_many(field: &SmoothField, seeds: &[Vec<f64>], h_int: f64, steps: usize, mode: TraceMode) -> Vec<Result<Polyline>> {
    seeds.par_iter().map(|s| trace(field, s, h_int, steps, mode)).collect()
}

fn metric_at(g: &MetricField, domain: Option<&ChartDomain>, p: &[f64]) -> Result<(nalgebra::DMatrix<f64>, crate::fields::Christoffel)> {
    let mut q = p.to_vec();
    if let Some(d) = domain {
        d.wrap(&mut q);
    }
    Ok((g.at(&q)?.matrix().clone(), g.christoffel(&q)?))
}

fn quad(m: &nalgebra::DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * u[i] * v[j]).sum()
}

/// Largest g-normal component of the covariant acceleration along the line,
/// in metric arclength: zero iff the line is a g-geodesic up to
/// reparametrization. Second differences with nonuniform spacing; the two
/// endpoints are excluded. `domain` wraps periodic points before the metric
/// is evaluated.
pub fn geodesic_defect_along(line: &Polyline, g: &MetricField, domain: Option<&ChartDomain>) -> Result<f64> {
    let pts = &line.points;
    if pts.len() < 3 {
        return Err(Error::InvalidParams(format!("a geodesic defect needs at least 3 points, found {}", pts.len())));
    }
    let n = pts[0].len();
    // metric length of each segment from the metric at its midpoint
    let seg: Vec<f64> = pts
        .windows(2)
        .map(|w| {
            let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let d: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| b - a).collect();
            let (m, _) = metric_at(g, domain, &mid)?;
            Ok(quad(&m, &d, &d).sqrt())
        })
        .collect::<Result<_>>()?;
    let mut defect = Vec::with_capacity(pts.len() - 2);
    for i in 1..pts.len() - 1 {
        let (h1, h2) = (seg[i - 1], seg[i]);
        if h1 <= 0.0 || h2 <= 0.0 {
            return Err(Error::DegenerateCell(format!("repeated point {i} on the line")));
        }
        let (a, b, c) = (&pts[i - 1], &pts[i], &pts[i + 1]);
        let vel: Vec<f64> = (0..n).map(|k| (h1 * h1 * c[k] - h2 * h2 * a[k] + (h2 * h2 - h1 * h1) * b[k]) / (h1 * h2 * (h1 + h2))).collect();
        let acc2: Vec<f64> = (0..n).map(|k| 2.0 * ((c[k] - b[k]) / h2 - (b[k] - a[k]) / h1) / (h1 + h2)).collect();
        let (m, gamma) = metric_at(g, domain, b)?;
        let corr = gamma.contract(&vel, &vel);
        let acc: Vec<f64> = acc2.iter().zip(&corr).map(|(x, y)| x + y).collect();
        let vv = quad(&m, &vel, &vel);
        let av = quad(&m, &acc, &vel);
        let normal: Vec<f64> = acc.iter().zip(&vel).map(|(x, v)| x - av / vv * v).collect();
        defect.push(quad(&m, &normal, &normal).max(0.0).sqrt() / vv);
    }
    // refine the sampled maximum with a parabola in arclength, so the value
    // does not depend on where the samples fall
    let (k, &top) = defect.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("at least one interior point");
    if k == 0 || k + 1 == defect.len() {
        return Ok(top);
    }
    let (s0, s2) = (-seg[k], seg[k + 1]);
    let (f0, f1, f2) = (defect[k - 1], top, defect[k + 1]);
    // Lagrange parabola through (s0, f0), (0, f1), (s2, f2)
    let a = (f0 / (s0 * (s0 - s2)) + f2 / (s2 * (s2 - s0)) - f1 / (s0 * s2)).min(0.0);
    let b = (f0 * s2 * s2 - f2 * s0 * s0 - f1 * (s2 * s2 - s0 * s0)) / (s0 * s2 * (s2 - s0));
    if a >= 0.0 {
        return Ok(top);
    }
    let peak = -b / (2.0 * a);
    if peak < s0 || peak > s2 {
        return Ok(top);
    }
    Ok(top.max(f1 - b * b / (4.0 * a)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub index: usize,
    /// +1 when crossing along the plane normal, −1 against it.
    pub sign: i8,
    /// Crossing point in the fundamental domain.
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionResult {
    pub seed_id: usize,
    pub crossings: Vec<Crossing>,
    pub error: Option<String>,
}

/// Signed distance to the plane with periodic components reduced to half a period.
fn plane_distance(domain: Option<&ChartDomain>, origin: &[f64], normal: &[f64], p: &[f64]) -> f64 {
    p.iter()
        .zip(origin)
        .enumerate()
        .map(|(i, (x, o))| {
            let mut d = x - o;
            if let Some(l) = domain.and_then(|dm| dm.period(i)) {
                d -= l * (d / l).round();
            }
            d * normal[i]
        })
        .sum()
}

fn hermite(p0: &[f64], p1: &[f64], v0: &[f64], v1: &[f64], h: f64, s: f64) -> Vec<f64> {
    let (h00, h10, h01, h11) = (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s, -2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
    (0..p0.len()).map(|i| h00 * p0[i] + h10 * h * v0[i] + h01 * p1[i] + h11 * h * v1[i]).collect()
}

/// Successive crossings of the plane `(origin, normal)` by the lines from
/// each seed, located by cubic Hermite interpolation between RK4 steps.
pub fn poincare_section(
    field: &SmoothField,
    origin: &[f64],
    normal: &[f64],
    seeds: &[Vec<f64>],
    h_int: f64,
    crossings: usize,
    max_steps: usize,
) -> Vec<SectionResult> {
    let domain = field.domain();
    seeds
        .par_iter()
        .enumerate()
        .map(|(seed_id, seed)| {
            let mut out = SectionResult { seed_id, crossings: Vec::new(), error: None };
            let mut run = || -> Result<()> {
                let mut p = seed.clone();
                let mut dist = plane_distance(domain, origin, normal, &p);
                let Some(mut v) = velocity(field, &p, TraceMode::Parameter)? else { return Err(Error::OutOfDomain(seed.clone())) };
                for _ in 0..max_steps {
                    let Some(q) = rk4_step(field, &p, h_int, TraceMode::Parameter)? else {
                        return Err(Error::InvalidParams("line left the domain".into()));
                    };
                    let Some(w) = velocity(field, &q, TraceMode::Parameter)? else { return Err(Error::OutOfDomain(q)) };
                    let next = plane_distance(domain, origin, normal, &q);
                    let step: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    let nn: f64 = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
                    // a jump across half a period is not a crossing
                    if dist * next < 0.0 || (dist != 0.0 && next == 0.0) {
                        if (dist - next).abs() <= step * nn * (1.0 + 1e-9) {
                            let (mut lo, mut hi) = (0.0, 1.0);
                            for _ in 0..60 {
                                let mid = 0.5 * (lo + hi);
                                let x = hermite(&p, &q, &v, &w, h_int, mid);
                                if plane_distance(domain, origin, normal, &x) * dist > 0.0 {
                                    lo = mid;
                                } else {
                                    hi = mid;
                                }
                            }
                            let mut x = hermite(&p, &q, &v, &w, h_int, 0.5 * (lo + hi));
                            if let Some(d) = domain {
                                d.wrap(&mut x);
                            }
                            out.crossings.push(Crossing { index: out.crossings.len(), sign: if next > dist { 1 } else { -1 }, point: x });
                            if out.crossings.len() >= crossings {
                                return Ok(());
                            }
                        }
                    }
                    p = q;
                    v = w;
                    dist = next;
                }
                if out.crossings.is_empty() {
                    return Err(Error::InvalidParams(format!("no crossings within {max_steps} steps")));
                }
                Ok(())
            };
            if let Err(e) = run() {
                out.error = Some(e.to_string());
            }
            out
        })
        .collect()
}

/// CSV with columns `line, index, x0, x1, …` over lifted points.
pub fn write_lines_csv<W: Write>(lines: &[Polyline], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let dim = lines.iter().find_map(|l| l.points.first().map(|p| p.len())).unwrap_or(0);
    let mut header = vec!["line".to_string(), "index".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    wr.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (l, line) in lines.iter().enumerate() {
        for (i, p) in line.points.iter().enumerate() {
            let mut rec = vec![l.to_string(), i.to_string()];
            rec.extend(p.iter().map(|x| format!("{x:e}")));
            wr.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// CSV with columns `seed, crossing, sign, x0, x1, …`.
pub fn write_section_csv<W: Write>(sections: &[SectionResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let dim = sections.iter().flat_map(|s| s.crossings.first()).map(|c| c.point.len()).next().unwrap_or(0);
    let mut header = vec!["seed".to_string(), "crossing".to_string(), "sign".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    wr.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for s in sections {
        for c in &s.crossings {
            let mut rec = vec![s.seed_id.to_string(), c.index.to_string(), c.sign.to_string()];
            rec.extend(c.point.iter().map(|x| format!("{x:e}")));
            wr.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Legacy-VTK polydata of the lifted lines.
pub fn write_lines_vtk<W: Write>(lines: &[Polyline], w: W, title: &str) -> Result<()> {
    let pts: Vec<Vec<Vec<f64>>> = lines.iter().map(|l| l.points.clone()).collect();
    let ids: Vec<f64> = lines.iter().enumerate().flat_map(|(i, l)| std::iter::repeat_n(i as f64, l.points.len())).collect();
    crate::vtk::write_polylines(w, title, &pts, &[("line", &ids)])
}
