//! Cell complexes: cubical grids on charts (optionally periodic or polar) and
//! 2D simplicial meshes, with integer coboundaries and diagonal Hodge weights.
//!
//! k-cells of a grid are boxes spanned by a set S of k axes. They are listed
//! degree by degree, by S in lexicographic mask order, then row-major by
//! position. A box is oriented by its axes in increasing order; top cells and
//! triangles carry the chart orientation.

use serde::{Deserialize, Serialize};

use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::exterior::{basis_masks, mask_indices};
use crate::fields::{ChartDomain, Constraint};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartMap {
    /// Grid parameters are the chart coordinates.
    Identity,
    /// Parameters `(r, θ, …)` mapped to `(r cos θ, r sin θ, …)`.
    Polar,
}

impl ChartMap {
    fn point(self, u: &[f64]) -> Vec<f64> {
        match self {
            ChartMap::Identity => u.to_vec(),
            ChartMap::Polar => {
                let mut x = u.to_vec();
                x[0] = u[0] * u[1].cos();
                x[1] = u[0] * u[1].sin();
                x
            }
        }
    }

    /// Column `a` of the jacobian `∂x/∂u`.
    fn tangent(self, u: &[f64], a: usize) -> Vec<f64> {
        let mut t = vec![0.0; u.len()];
        match (self, a) {
            (ChartMap::Polar, 0) => {
                t[0] = u[1].cos();
                t[1] = u[1].sin();
            }
            (ChartMap::Polar, 1) => {
                t[0] = -u[0] * u[1].sin();
                t[1] = u[0] * u[1].cos();
            }
            _ => t[a] = 1.0,
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cells per axis.
    pub resolution: Vec<usize>,
    /// Parameter bounds per axis.
    pub bounds: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    pub map: ChartMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicialSpec {
    pub vertices: Vec<Vec<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Grid(GridSpec),
    Simplicial(SimplicialSpec),
}

/// One quadrature node on a cell: position, oriented tangent vectors, weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CellNode {
    pub point: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub geometry: Geometry,
    pub dim: usize,
    pub counts: Vec<usize>,
    /// `d[k]` maps k-cochains to (k+1)-cochains.
    pub d: Vec<Csr>,
    pub primal_volume: Vec<Vec<f64>>,
    pub dual_volume: Vec<Vec<f64>>,
    pub centers: Vec<Vec<Vec<f64>>>,
    pub boundary: Vec<Vec<bool>>,
    /// Conformal log factor u sampled at cell centers; the effective metric is `e^{2u}` times the chart metric.
    pub log_factor: Vec<Vec<f64>>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    fn nodes(&self, a: usize) -> usize {
        if self.periodic[a] {
            self.resolution[a]
        } else {
            self.resolution[a] + 1
        }
    }

    fn step(&self, a: usize) -> f64 {
        (self.bounds[a].1 - self.bounds[a].0) / self.resolution[a] as f64
    }

    fn shape(&self, mask: u32) -> Vec<usize> {
        (0..self.dim()).map(|a| if mask & (1 << a) != 0 { self.resolution[a] } else { self.nodes(a) }).collect()
    }

    fn block_len(&self, mask: u32) -> usize {
        self.shape(mask).iter().product()
    }

    pub fn cell_count(&self, k: usize) -> usize {
        basis_masks(self.dim(), k).iter().map(|&m| self.block_len(m)).sum()
    }

    /// Axis mask and position of cell `idx` in degree k.
    pub fn decode(&self, k: usize, mut idx: usize) -> (u32, Vec<usize>) {
        for &m in basis_masks(self.dim(), k) {
            let len = self.block_len(m);
            if idx < len {
                let shape = self.shape(m);
                let mut pos = vec![0; self.dim()];
                for a in (0..self.dim()).rev() {
                    pos[a] = idx % shape[a];
                    idx /= shape[a];
                }
                return (m, pos);
            }
            idx -= len;
        }
        panic!("cell index out of range");
    }

    /// Index of the cell with axes `mask` at `pos`, wrapping periodic axes.
    pub fn encode(&self, mask: u32, pos: &[isize]) -> Option<usize> {
        let k = mask.count_ones() as usize;
        let mut offset = 0;
        for &m in basis_masks(self.dim(), k) {
            if m == mask {
                break;
            }
            offset += self.block_len(m);
        }
        let shape = self.shape(mask);
        let mut idx = 0;
        for a in 0..self.dim() {
            let mut p = pos[a];
            let s = shape[a] as isize;
            if self.periodic[a] {
                p = p.rem_euclid(s);
            } else if p < 0 || p >= s {
                return None;
            }
            idx = idx * shape[a] + p as usize;
        }
        Some(offset + idx)
    }

    fn node_param(&self, a: usize, i: f64) -> f64 {
        self.bounds[a].0 + i * self.step(a)
    }

    fn cell_nodes(&self, mask: u32, pos: &[usize], order: usize) -> Vec<CellNode> {
        let n = self.dim();
        let axes = mask_indices(mask);
        let (gx, gw) = gauss_legendre(order.max(1));
        let k = axes.len();
        let mut out = Vec::new();
        let total = gx.len().pow(k as u32);
        for flat in 0..total {
            let mut f = flat;
            let mut u: Vec<f64> = (0..n).map(|a| self.node_param(a, pos[a] as f64)).collect();
            let mut w = 1.0;
            let mut along = Vec::with_capacity(k);
            for &a in &axes {
                let q = f % gx.len();
                f /= gx.len();
                let t = 0.5 * (gx[q] + 1.0);
                u[a] = self.node_param(a, pos[a] as f64 + t);
                w *= 0.5 * gw[q];
                along.push(a);
            }
            let tangents = along
                .iter()
                .map(|&a| self.map.tangent(&u, a).into_iter().map(|c| c * self.step(a)).collect())
                .collect();
            out.push(CellNode { point: self.map.point(&u), tangents, weight: w });
        }
        out
    }

    /// Dual volume: integral over the dual box (axes not in `mask`, half a cell
    /// on each side, clipped at non-periodic boundaries) of the scale factors.
    fn dual_volume(&self, mask: u32, pos: &[usize], order: usize) -> f64 {
        let n = self.dim();
        let axes: Vec<usize> = (0..n).filter(|a| mask & (1 << a) == 0).collect();
        if axes.is_empty() {
            return 1.0;
        }
        let (gx, gw) = gauss_legendre(order.max(1));
        let mut total = 0.0;
        let count = gx.len().pow(axes.len() as u32);
        for flat in 0..count {
            let mut f = flat;
            let mut u: Vec<f64> = (0..n)
                .map(|a| if mask & (1 << a) != 0 { self.node_param(a, pos[a] as f64 + 0.5) } else { 0.0 })
                .collect();
            let mut w = 1.0;
            let mut tangents = Vec::new();
            for &a in &axes {
                let q = f % gx.len();
                f /= gx.len();
                let mut lo = pos[a] as f64 - 0.5;
                let mut hi = pos[a] as f64 + 0.5;
                if !self.periodic[a] {
                    lo = lo.max(0.0);
                    hi = hi.min(self.resolution[a] as f64);
                }
                let t = lo + 0.5 * (gx[q] + 1.0) * (hi - lo);
                u[a] = self.node_param(a, t);
                w *= 0.5 * gw[q] * (hi - lo) * self.step(a);
                tangents.push(a);
            }
            let tv: Vec<Vec<f64>> = tangents.iter().map(|&a| self.map.tangent(&u, a)).collect();
            total += w * gram_sqrt(&tv);
        }
        total
    }
}

/// `√det(TᵀT)` for tangent vectors T.
pub fn gram_sqrt(t: &[Vec<f64>]) -> f64 {
    if t.is_empty() {
        return 1.0;
    }
    let g = nalgebra::DMatrix::from_fn(t.len(), t.len(), |i, j| t[i].iter().zip(&t[j]).map(|(a, b)| a * b).sum::<f64>());
    g.determinant().max(0.0).sqrt()
}

fn det(cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| cols[j][i]).determinant()
}

fn cotan(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    // cotangent of the angle at a in triangle abc
    let u = [b[0] - a[0], b[1] - a[1]];
    let v = [c[0] - a[0], c[1] - a[1]];
    let dot = u[0] * v[0] + u[1] * v[1];
    let cross = (u[0] * v[1] - u[1] * v[0]).abs();
    dot / cross
}

impl Complex {
    /// Grid on a chart domain with `resolution` cells per axis.
    ///
    /// Boxes become cubical grids (periodic axes close up); annuli become polar
    /// grids with resolution `[radial, angular, …]`; disks become ring
    /// triangulations with `resolution[0]` rings.
    pub fn build_grid(domain: &ChartDomain, resolution: &[usize]) -> Result<Self> {
        domain.validate()?;
        let n = domain.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidDimension(format!("complexes are 2D or 3D, got {n}")));
        }
        if resolution.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: resolution.len() });
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::InvalidParams("resolution must be at least 2 per axis".into()));
        }
        match domain.constraint {
            None => Self::grid(GridSpec {
                resolution: resolution.to_vec(),
                bounds: domain.bounds.clone(),
                periodic: (0..n).map(|a| domain.is_periodic(a)).collect(),
                map: ChartMap::Identity,
            }),
            Some(Constraint::Annulus { r0, r1 }) => {
                let mut bounds = vec![(r0, r1), (0.0, std::f64::consts::TAU)];
                let mut periodic = vec![false, true];
                for a in 2..n {
                    bounds.push(domain.bounds[a]);
                    periodic.push(domain.is_periodic(a));
                }
                Self::grid(GridSpec { resolution: resolution.to_vec(), bounds, periodic, map: ChartMap::Polar })
            }
            Some(Constraint::Disk { radius }) if n == 2 => Self::simplicial(disk_mesh(radius, resolution[0])),
            _ => Err(Error::Unsupported("no grid construction for this domain".into())),
        }
    }

    pub fn grid(spec: GridSpec) -> Result<Self> {
        let n = spec.dim();
        if !(1..=3).contains(&n) || spec.bounds.len() != n || spec.periodic.len() != n {
            return Err(Error::InvalidParams("grid spec axes are inconsistent".into()));
        }
        for a in 0..n {
            let (lo, hi) = spec.bounds[a];
            if !(lo.is_finite() && hi.is_finite() && lo < hi) || spec.resolution[a] < 2 {
                return Err(Error::InvalidParams(format!("grid axis {a} is degenerate")));
            }
        }
        if spec.map == ChartMap::Polar && (n < 2 || spec.bounds[0].0 <= 0.0) {
            return Err(Error::DegenerateCell("polar grids need 0 < r0".into()));
        }
        let counts: Vec<usize> = (0..=n).map(|k| spec.cell_count(k)).collect();
        if counts.iter().any(|&c| c > 50_000_000) {
            return Err(Error::InvalidParams("grid too large".into()));
        }
        let mut d = Vec::with_capacity(n);
        for k in 0..n {
            let mut triplets = Vec::new();
            for row in 0..counts[k + 1] {
                let (mask, pos) = spec.decode(k + 1, row);
                let ipos: Vec<isize> = pos.iter().map(|&p| p as isize).collect();
                for (j, a) in mask_indices(mask).into_iter().enumerate() {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let sub = mask & !(1 << a);
                    let lo = spec.encode(sub, &ipos).expect("lower face exists");
                    let mut up = ipos.clone();
                    up[a] += 1;
                    let hi = spec.encode(sub, &up).expect("upper face exists");
                    triplets.push((row, hi, sign));
                    triplets.push((row, lo, -sign));
                }
            }
            d.push(Csr::from_triplets(counts[k + 1], counts[k], &triplets)?);
        }
        let mut primal_volume = Vec::with_capacity(n + 1);
        let mut dual_volume = Vec::with_capacity(n + 1);
        let mut centers = Vec::with_capacity(n + 1);
        for (k, &count) in counts.iter().enumerate() {
            let mut pv = Vec::with_capacity(count);
            let mut dv = Vec::with_capacity(count);
            let mut cs = Vec::with_capacity(count);
            for idx in 0..count {
                let (mask, pos) = spec.decode(k, idx);
                let nodes = spec.cell_nodes(mask, &pos, 3);
                pv.push(nodes.iter().map(|q| q.weight * gram_sqrt(&q.tangents)).sum());
                dv.push(spec.dual_volume(mask, &pos, 3));
                let mut u: Vec<f64> = (0..n).map(|a| spec.node_param(a, pos[a] as f64)).collect();
                for a in mask_indices(mask) {
                    u[a] = spec.node_param(a, pos[a] as f64 + 0.5);
                }
                cs.push(spec.map.point(&u));
            }
            primal_volume.push(pv);
            dual_volume.push(dv);
            centers.push(cs);
        }
        Self::finish(Geometry::Grid(spec), n, counts, d, primal_volume, dual_volume, centers)
    }

    /// 2D simplicial complex with barycentric vertex duals and cotangent edge weights.
    pub fn simplicial(spec: SimplicialSpec) -> Result<Self> {
        let nv = spec.vertices.len();
        if nv < 3 || spec.triangles.is_empty() {
            return Err(Error::InvalidParams("mesh needs at least one triangle".into()));
        }
        if nv > 10_000_000 || spec.triangles.len() > 20_000_000 {
            return Err(Error::InvalidParams("mesh too large".into()));
        }
        for v in &spec.vertices {
            if v.len() != 2 || v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParams("vertices must be finite 2D points".into()));
            }
        }
        let mut edges: std::collections::BTreeMap<(usize, usize), usize> = std::collections::BTreeMap::new();
        for t in &spec.triangles {
            if t.iter().any(|&i| i >= nv) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidParams(format!("bad triangle {t:?}")));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                let key = (a.min(b), a.max(b));
                let next = edges.len();
                edges.entry(key).or_insert(next);
            }
        }
        let mut edge_list = vec![(0, 0); edges.len()];
        for (&e, &i) in &edges {
            edge_list[i] = e;
        }
        let ne = edge_list.len();
        let nt = spec.triangles.len();
        let p = |i: usize| &spec.vertices[i];
        let mut d0 = Vec::with_capacity(2 * ne);
        for (i, &(a, b)) in edge_list.iter().enumerate() {
            d0.push((i, b, 1.0));
            d0.push((i, a, -1.0));
        }
        let mut d1 = Vec::with_capacity(3 * nt);
        let mut area = Vec::with_capacity(nt);
        let mut edge_faces = vec![0usize; ne];
        let mut vertex_area = vec![0.0; nv];
        let mut cot = vec![0.0; ne];
        for (ti, t) in spec.triangles.iter().enumerate() {
            let mut s = *t;
            s.sort_unstable();
            let (a, b, c) = (s[0], s[1], s[2]);
            let sa = det(&[sub(p(b), p(a)), sub(p(c), p(a))]);
            if sa.abs() < 1e-14 {
                return Err(Error::DegenerateCell(format!("triangle {ti} has zero area")));
            }
            let orient = sa.signum();
            // ∂[a,b,c] = [b,c] − [a,c] + [a,b], flipped for negatively oriented triangles
            for (x, y, sign) in [(b, c, 1.0), (a, c, -1.0), (a, b, 1.0)] {
                let e = edges[&(x, y)];
                d1.push((ti, e, orient * sign));
                edge_faces[e] += 1;
            }
            area.push(0.5 * sa.abs());
            for v in s {
                vertex_area[v] += sa.abs() / 6.0;
            }
            for (x, y, z) in [(a, b, c), (b, c, a), (a, c, b)] {
                cot[edges[&(x, y)]] += 0.5 * cotan(p(z), p(x), p(y));
            }
        }
        if edge_faces.iter().any(|&c| c > 2) {
            return Err(Error::DegenerateCell("non-manifold edge".into()));
        }
        let d = vec![Csr::from_triplets(ne, nv, &d0)?, Csr::from_triplets(nt, ne, &d1)?];
        let lengths: Vec<f64> = edge_list.iter().map(|&(a, b)| norm(&sub(p(b), p(a)))).collect();
        let primal_volume = vec![vec![1.0; nv], lengths.clone(), area];
        let dual_volume = vec![vertex_area, cot.iter().zip(&lengths).map(|(c, l)| c * l).collect(), vec![1.0; nt]];
        let centers = vec![
            spec.vertices.clone(),
            edge_list.iter().map(|&(a, b)| mid(&[p(a), p(b)])).collect(),
            spec.triangles.iter().map(|t| mid(&[p(t[0]), p(t[1]), p(t[2])])).collect(),
        ];
        let counts = vec![nv, ne, nt];
        Self::finish(Geometry::Simplicial(spec), 2, counts, d, primal_volume, dual_volume, centers)
    }

    fn finish(
        geometry: Geometry,
        n: usize,
        counts: Vec<usize>,
        d: Vec<Csr>,
        primal_volume: Vec<Vec<f64>>,
        dual_volume: Vec<Vec<f64>>,
        centers: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        // boundary: (n−1)-cells with one coface, and all their faces
        let mut boundary: Vec<Vec<bool>> = counts.iter().map(|&c| vec![false; c]).collect();
        let cofaces = d[n - 1].abs_col_sums();
        for (f, &c) in cofaces.iter().enumerate() {
            boundary[n - 1][f] = c < 1.5;
        }
        for k in (0..n - 1).rev() {
            for f in 0..counts[k + 1] {
                if boundary[k + 1][f] {
                    for (c, _) in d[k].row(f) {
                        boundary[k][c] = true;
                    }
                }
            }
        }
        let log_factor = counts.iter().map(|&c| vec![0.0; c]).collect();
        let cx = Self { geometry, dim: n, counts, d, primal_volume, dual_volume, centers, boundary, log_factor };
        for k in 0..=n {
            for (i, (&p, &q)) in cx.primal_volume[k].iter().zip(&cx.dual_volume[k]).enumerate() {
                if !(p > 0.0 && p.is_finite()) || (!cx.boundary[k][i] && !(q > 0.0 && q.is_finite())) {
                    return Err(Error::DegenerateCell(format!("cell {i} of degree {k} has non-positive volume")));
                }
            }
        }
        Ok(cx)
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts[k]
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.geometry, Geometry::Grid(_))
    }

    /// Diagonal Hodge weights `⋆_k = |dual|/|primal| · e^{(n−2k)u}`.
    pub fn hodge(&self, k: usize) -> Vec<f64> {
        let s = self.dim as f64 - 2.0 * k as f64;
        (0..self.counts[k])
            .map(|i| self.dual_volume[k][i] / self.primal_volume[k][i] * (s * self.log_factor[k][i]).exp())
            .collect()
    }

    /// Metric volume of k-cells, `|σ| e^{ku}`.
    pub fn metric_volume(&self, k: usize) -> Vec<f64> {
        (0..self.counts[k]).map(|i| self.primal_volume[k][i] * (k as f64 * self.log_factor[k][i]).exp()).collect()
    }

    /// Metric volume of dual cells of k-cells, `|⋆σ| e^{(n−k)u}`.
    pub fn metric_dual_volume(&self, k: usize) -> Vec<f64> {
        let s = (self.dim - k) as f64;
        (0..self.counts[k]).map(|i| self.dual_volume[k][i] * (s * self.log_factor[k][i]).exp()).collect()
    }

    /// Copy with the metric multiplied by `e^{2u}`, u sampled at cell centers.
    pub fn with_log_factor<F>(&self, u: F) -> Result<Self>
    where
        F: Fn(usize, usize, &[f64]) -> Result<f64>,
    {
        let mut out = self.clone();
        for k in 0..=self.dim {
            for i in 0..self.counts[k] {
                let v = u(k, i, &self.centers[k][i])?;
                if !v.is_finite() {
                    return Err(Error::InvalidParams(format!("non-finite conformal factor at cell {i} of degree {k}")));
                }
                out.log_factor[k][i] = v;
            }
        }
        Ok(out)
    }

    /// Quadrature nodes on cell `i` of degree k, carrying the cell orientation.
    pub fn cell_nodes(&self, k: usize, i: usize, order: usize) -> Vec<CellNode> {
        match &self.geometry {
            Geometry::Grid(g) => {
                let (mask, pos) = g.decode(k, i);
                g.cell_nodes(mask, &pos, order)
            }
            Geometry::Simplicial(s) => simplex_nodes(self, s, k, i, order),
        }
    }

    /// Vertex indices of cell `i` in degree k.
    pub fn cell_vertices(&self, k: usize, i: usize) -> Vec<usize> {
        let mut set = vec![i];
        for j in (0..k).rev() {
            let mut next = Vec::new();
            for &c in &set {
                for (f, _) in self.d[j].row(c) {
                    if !next.contains(&f) {
                        next.push(f);
                    }
                }
            }
            set = next;
        }
        set
    }

    /// Faces of top cell `c` with their incidence signs.
    pub fn top_faces(&self, c: usize) -> Vec<(usize, f64)> {
        self.d[self.dim - 1].row(c).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
    }

    /// Betti numbers from ranks of the coboundaries over a large prime field.
    pub fn betti_numbers(&self) -> Vec<usize> {
        let ranks: Vec<usize> = self.d.iter().map(rank_mod_p).collect();
        (0..=self.dim)
            .map(|k| {
                let kernel = self.counts[k] - if k < self.dim { ranks[k] } else { 0 };
                kernel - if k > 0 { ranks[k - 1] } else { 0 }
            })
            .collect()
    }

    /// Maximum absolute entry of `d_{k+1} d_k`.
    pub fn dd_defect(&self) -> f64 {
        (0..self.dim.saturating_sub(1))
            .map(|k| {
                let dd = self.d[k + 1].matmul(&self.d[k]).expect("consecutive coboundaries compose");
                dd.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0, f64::max)
    }

    pub fn interior(&self, k: usize) -> Vec<usize> {
        (0..self.counts[k]).filter(|&i| !self.boundary[k][i]).collect()
    }

    pub fn boundary_cells(&self, k: usize) -> Vec<usize> {
        (0..self.counts[k]).filter(|&i| self.boundary[k][i]).collect()
    }

    /// Unit-free diameter proxy: largest edge length.
    pub fn mesh_size(&self) -> f64 {
        self.primal_volume[1].iter().fold(0.0, |m: f64, v| m.max(*v))
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mid(ps: &[&Vec<f64>]) -> Vec<f64> {
    let n = ps[0].len();
    (0..n).map(|i| ps.iter().map(|p| p[i]).sum::<f64>() / ps.len() as f64).collect()
}

fn simplex_nodes(cx: &Complex, s: &SimplicialSpec, k: usize, i: usize, order: usize) -> Vec<CellNode> {
    match k {
        0 => vec![CellNode { point: s.vertices[i].clone(), tangents: vec![], weight: 1.0 }],
        1 => {
            let mut ends = [0usize; 2];
            for (v, sign) in cx.d[0].row(i) {
                ends[if sign > 0.0 { 1 } else { 0 }] = v;
            }
            let (a, b) = (&s.vertices[ends[0]], &s.vertices[ends[1]]);
            let t = sub(b, a);
            let (gx, gw) = gauss_legendre(order.max(1));
            gx.iter()
                .zip(&gw)
                .map(|(x, w)| {
                    let l = 0.5 * (x + 1.0);
                    CellNode { point: a.iter().zip(&t).map(|(p, d)| p + l * d).collect(), tangents: vec![t.clone()], weight: 0.5 * w }
                })
                .collect()
        }
        _ => {
            let mut v = s.triangles[i];
            v.sort_unstable();
            let (a, b, c) = (&s.vertices[v[0]], &s.vertices[v[1]], &s.vertices[v[2]]);
            let (mut t1, mut t2) = (sub(b, a), sub(c, a));
            if det(&[t1.clone(), t2.clone()]) < 0.0 {
                std::mem::swap(&mut t1, &mut t2);
            }
            let pts: &[(f64, f64, f64)] = if order <= 1 {
                &[(1.0 / 3.0, 1.0 / 3.0, 0.5)]
            } else {
                &[(1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0), (2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0), (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0)]
            };
            pts.iter()
                .map(|&(x, y, w)| CellNode {
                    point: (0..2).map(|j| a[j] + x * t1[j] + y * t2[j]).collect(),
                    tangents: vec![t1.clone(), t2.clone()],
                    weight: w,
                })
                .collect()
        }
    }
}

/// Ring triangulation of a disk: a center vertex and `rings` rings with `6j` vertices on ring j.
pub fn disk_mesh(radius: f64, rings: usize) -> SimplicialSpec {
    let tau = std::f64::consts::TAU;
    let mut vertices = vec![vec![0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for j in 1..=rings {
        ring_start.push(vertices.len());
        let count = 6 * j;
        for i in 0..count {
            let th = tau * i as f64 / count as f64;
            let r = radius * j as f64 / rings as f64;
            vertices.push(vec![r * th.cos(), r * th.sin()]);
        }
    }
    let mut triangles = Vec::new();
    for i in 0..6 {
        triangles.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    for j in 2..=rings {
        let (inner, outer) = (ring_start[j - 1], ring_start[j]);
        let (ni, no) = (6 * (j - 1), 6 * j);
        // advance along both rings by angle
        let (mut a, mut b) = (0usize, 0usize);
        while a < ni || b < no {
            let ta = (a + 1) as f64 / ni as f64;
            let tb = (b + 1) as f64 / no as f64;
            if b < no && (a >= ni || tb <= ta) {
                triangles.push([inner + a % ni, outer + b, outer + (b + 1) % no]);
                b += 1;
            } else {
                triangles.push([inner + a, outer + b % no, inner + (a + 1) % ni]);
                a += 1;
            }
        }
    }
    delaunay_flips(&vertices, &mut triangles);
    SimplicialSpec { vertices, triangles }
}

/// Flips interior edges until every edge has a nonnegative cotangent weight.
fn delaunay_flips(v: &[Vec<f64>], tris: &mut [[usize; 3]]) {
    for _ in 0..100 {
        let mut owners: std::collections::HashMap<(usize, usize), Vec<usize>> = std::collections::HashMap::new();
        for (ti, t) in tris.iter().enumerate() {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                owners.entry((a.min(b), a.max(b))).or_default().push(ti);
            }
        }
        let mut flipped = false;
        let mut touched = vec![false; tris.len()];
        let mut keys: Vec<_> = owners.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            let ts = &owners[&(a, b)];
            if ts.len() != 2 || touched[ts[0]] || touched[ts[1]] {
                continue;
            }
            let opp = |t: &[usize; 3]| *t.iter().find(|&&x| x != a && x != b).expect("triangle has a third vertex");
            let (c, d) = (opp(&tris[ts[0]]), opp(&tris[ts[1]]));
            if cotan(&v[c], &v[a], &v[b]) + cotan(&v[d], &v[a], &v[b]) < -1e-12 {
                tris[ts[0]] = [c, d, a];
                tris[ts[1]] = [d, c, b];
                touched[ts[0]] = true;
                touched[ts[1]] = true;
                flipped = true;
            }
        }
        if !flipped {
            return;
        }
    }
}

const PRIME: i64 = 2_147_483_647;

fn mod_inv(a: i64) -> i64 {
    let (mut r, mut new_r, mut t, mut new_t) = (PRIME, a.rem_euclid(PRIME), 0i64, 1i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(PRIME)
}

/// Rank of an integer matrix over GF(p) by sparse row reduction.
pub fn rank_mod_p(m: &Csr) -> usize {
    let mut pivots: std::collections::HashMap<usize, Vec<(usize, i64)>> = std::collections::HashMap::new();
    let mut rank = 0;
    for r in 0..m.rows {
        let mut row: Vec<(usize, i64)> =
            m.row(r).map(|(c, v)| (c, (v.round() as i64).rem_euclid(PRIME))).filter(|e| e.1 != 0).collect();
        while let Some(&(lead, val)) = row.first() {
            match pivots.get(&lead) {
                Some(p) => {
                    let factor = val * mod_inv(p[0].1) % PRIME;
                    row = axpy_mod(&row, p, factor);
                }
                None => {
                    pivots.insert(lead, row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn axpy_mod(row: &[(usize, i64)], pivot: &[(usize, i64)], factor: i64) -> Vec<(usize, i64)> {
    // row − factor·pivot, both sorted by column
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j >= pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i >= row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        let (c, v) = if take_row {
            i += 1;
            row[i - 1]
        } else if take_piv {
            j += 1;
            (pivot[j - 1].0, (PRIME - factor * pivot[j - 1].1 % PRIME) % PRIME)
        } else {
            i += 1;
            j += 1;
            (row[i - 1].0, (row[i - 1].1 - factor * pivot[j - 1].1 % PRIME).rem_euclid(PRIME))
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    out
}
