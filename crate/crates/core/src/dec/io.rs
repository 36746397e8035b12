//! JSON container for a complex and named cochains, and VTK export of
//! top-cell data.
//!
//! The container stores only the geometry description (plus a conformal log
//! factor when one is set); coboundaries and volumes are rebuilt on load, so
//! a document can never carry an inconsistent complex.
//!
//! ```json
//! {
//!   "format": "conflux.complex",
//!   "version": 1,
//!   "geometry": { "kind": "grid", "resolution": [4, 4], "bounds": [[0, 1], [0, 1]],
//!                 "periodic": [false, false], "map": "identity" },
//!   "log_factor": null,
//!   "cochains": { "beta": { "degree": 1, "values": [ ... ] } }
//! }
//! ```

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cochain::Cochain;
use super::complex::{Complex, Geometry};
use super::kkt::Reconstruction;
use crate::error::{Error, Result};
use crate::vtk::{write_unstructured, VTK_HEXAHEDRON, VTK_QUAD, VTK_TRIANGLE};

pub const CONTAINER_FORMAT: &str = "conflux.complex";
pub const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDocument {
    pub format: String,
    pub version: u32,
    pub geometry: Geometry,
    /// Per-degree conformal log factor at cell centers; absent means zero.
    #[serde(default)]
    pub log_factor: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub cochains: BTreeMap<String, Cochain>,
}

impl ComplexDocument {
    pub fn new(cx: &Complex) -> Self {
        let conformal = cx.log_factor.iter().flatten().any(|u| *u != 0.0);
        Self {
            format: CONTAINER_FORMAT.into(),
            version: CONTAINER_VERSION,
            geometry: cx.geometry.clone(),
            log_factor: conformal.then(|| cx.log_factor.clone()),
            cochains: BTreeMap::new(),
        }
    }

    pub fn with_cochain(mut self, name: impl Into<String>, c: &Cochain) -> Self {
        self.cochains.insert(name.into(), c.clone());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses a document without building the complex.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.format != CONTAINER_FORMAT || doc.version != CONTAINER_VERSION {
            return Err(Error::Parse(format!("unsupported container {} v{}", doc.format, doc.version)));
        }
        Ok(doc)
    }

    /// Rebuilds the complex and checks every cochain against it.
    pub fn build(&self) -> Result<(Complex, BTreeMap<String, Cochain>)> {
        let mut cx = match &self.geometry {
            Geometry::Grid(g) => Complex::grid(g.clone())?,
            Geometry::Simplicial(s) => Complex::simplicial(s.clone())?,
        };
        if let Some(u) = &self.log_factor {
            if u.len() != cx.dim + 1 {
                return Err(Error::DimensionMismatch { expected: cx.dim + 1, found: u.len() });
            }
            for (k, uk) in u.iter().enumerate() {
                if uk.len() != cx.count(k) {
                    return Err(Error::DimensionMismatch { expected: cx.count(k), found: uk.len() });
                }
                if uk.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse(format!("non-finite log factor in degree {k}")));
                }
            }
            cx.log_factor = u.clone();
        }
        for (name, c) in &self.cochains {
            c.check(&cx).map_err(|e| Error::Parse(format!("cochain {name}: {e}")))?;
            if c.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse(format!("cochain {name} has non-finite values")));
            }
        }
        Ok((cx, self.cochains.clone()))
    }
}

/// Top cells as VTK cells over the complex vertices.
fn vtk_cells(cx: &Complex) -> Result<Vec<(u8, Vec<usize>)>> {
    let n = cx.dim;
    match &cx.geometry {
        Geometry::Simplicial(s) => Ok(s.triangles.iter().map(|t| (VTK_TRIANGLE, t.to_vec())).collect()),
        Geometry::Grid(g) => {
            let (kind, order): (u8, &[usize]) = match n {
                2 => (VTK_QUAD, &[0, 1, 3, 2]),
                3 => (VTK_HEXAHEDRON, &[0, 1, 3, 2, 4, 5, 7, 6]),
                _ => return Err(Error::Unsupported(format!("VTK export of a {n}-dimensional grid"))),
            };
            (0..cx.count(n))
                .map(|c| {
                    let (_, pos) = g.decode(n, c);
                    // corner b has offset bit a along axis a (VTK pixel/voxel order)
                    let corners: Vec<usize> = (0..1usize << n)
                        .map(|b| {
                            let p: Vec<isize> = (0..n).map(|a| (pos[a] + ((b >> a) & 1)) as isize).collect();
                            g.encode(0, &p).ok_or_else(|| Error::DegenerateCell(format!("corner of cell {c}")))
                        })
                        .collect::<Result<_>>()?;
                    Ok((kind, order.iter().map(|&i| corners[i]).collect()))
                })
                .collect()
        }
    }
}

/// Writes β on top cells: the reconstructed flux vector and its metric
/// magnitude, plus any extra per-cell scalars and vectors.
pub fn write_vtk<W: Write>(
    cx: &Complex,
    w: W,
    title: &str,
    beta: Option<&Cochain>,
    scalars: &[(&str, &[f64])],
    vectors: &[(&str, &[Vec<f64>])],
) -> Result<()> {
    let n = cx.dim;
    let mut flux = Vec::new();
    let mut magnitude = Vec::new();
    if let Some(b) = beta {
        if b.degree != n - 1 || b.values.len() != cx.count(n - 1) {
            return Err(Error::DimensionMismatch { expected: cx.count(n - 1), found: b.values.len() });
        }
        let rec = Reconstruction::new(cx)?;
        for c in 0..cx.count(n) {
            let f = rec.flux_density(c, &b.values);
            let s = (-(n as f64 - 1.0) * cx.log_factor[n][c]).exp();
            magnitude.push(s * f.iter().map(|x| x * x).sum::<f64>().sqrt());
            flux.push(f);
        }
    }
    let mut all_s: Vec<(&str, &[f64])> = scalars.to_vec();
    let mut all_v: Vec<(&str, &[Vec<f64>])> = vectors.to_vec();
    if beta.is_some() {
        all_s.push(("flux_magnitude", &magnitude));
        all_v.push(("flux", &flux));
    }
    write_unstructured(w, title, &cx.centers[0], &vtk_cells(cx)?, &all_s, &all_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::complex::{disk_mesh, GridSpec};
    use crate::dec::ChartMap;

    #[test]
    fn container_round_trip_and_rejections() {
        let cx = Complex::grid(GridSpec { resolution: vec![3, 2], bounds: vec![(0.0, 1.0); 2], periodic: vec![false, true], map: ChartMap::Identity }).unwrap();
        let beta = Cochain::new(&cx, 1, (0..cx.count(1)).map(|i| i as f64).collect()).unwrap();
        let doc = ComplexDocument::new(&cx).with_cochain("beta", &beta);
        let back = ComplexDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
        let (cx2, cs) = back.build().unwrap();
        assert_eq!(cx2, cx);
        assert_eq!(cs["beta"], beta);
        let mut bad = doc.clone();
        bad.cochains.get_mut("beta").unwrap().values.pop();
        assert!(bad.build().is_err());
        let mut bad = doc.clone();
        bad.cochains.get_mut("beta").unwrap().degree = 5;
        assert!(bad.build().is_err());
        assert!(ComplexDocument::from_json(&doc.to_json().unwrap().replace("conflux.complex", "other")).is_err());
    }

    #[test]
    fn vtk_lists_every_top_cell() {
        let cx = Complex::simplicial(disk_mesh(1.0, 3)).unwrap();
        let beta = Cochain::zeros(&cx, 1);
        let mut out = Vec::new();
        write_vtk(&cx, &mut out, "disk", Some(&beta), &[], &[]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains(&format!("CELL_TYPES {}", cx.count(2))));
        let grid = Complex::grid(GridSpec { resolution: vec![2, 2, 2], bounds: vec![(0.0, 1.0); 3], periodic: vec![false; 3], map: ChartMap::Identity }).unwrap();
        let mut out = Vec::new();
        write_vtk(&grid, &mut out, "cube", None, &[], &[]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("CELLS 8 72") && text.contains("POINTS 27 double"));
    }
}
