use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{signed_area, Domain, FieldPoint};
use crate::quad::{GL3_NODES, GL3_WEIGHTS, TRI6_POINTS, TRI6_WEIGHTS};

/// A quadrature point with its absolute weight and exact boundary distance.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub x: [f64; 2],
    pub bary: [f64; 3],
    pub weight: f64,
    pub d: f64,
}

/// Conforming P1 simplicial mesh of an interval or polygon.
#[derive(Debug, Clone)]
pub struct Mesh {
    domain: Domain,
    dim: usize,
    vertices: Vec<[f64; 2]>,
    /// flat connectivity, `dim + 1` vertices per cell
    cells: Vec<usize>,
    boundary: Vec<bool>,
    dof: Vec<Option<usize>>,
    free: Vec<usize>,
    /// boundary facets: vertex pairs in 2D, single vertices (duplicated) in 1D
    boundary_facets: Vec<[usize; 2]>,
    measure: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    quad: Vec<QuadPoint>,
    nq: usize,
    distance: Vec<f64>,
    h_max: f64,
    /// identity map, lets vertex evaluations borrow a one-node slice
    ids: Vec<usize>,
}

impl Mesh {
    /// Uniform mesh of [x0, x1] with `n` cells.
    pub fn interval(x0: f64, x1: f64, n: usize) -> Result<Self> {
        if n < 2 || !(x0 < x1) {
            return Err(Error::Domain(format!("interval mesh needs x0 < x1 and ≥ 2 cells, got [{x0}, {x1}] with {n}")));
        }
        let vertices: Vec<[f64; 2]> = (0..=n)
            .map(|i| {
                let x = if i == n { x1 } else { x0 + (x1 - x0) * i as f64 / n as f64 };
                [x, 0.0]
            })
            .collect();
        let cells: Vec<usize> = (0..n).flat_map(|i| [i, i + 1]).collect();
        Ok(Self::assemble(Domain::Interval { x0, x1 }, 1, vertices, cells))
    }

    pub fn unit_interval(n: usize) -> Result<Self> {
        Self::interval(0.0, 1.0, n)
    }

    /// Triangulates a simple polygon by ear clipping and splits every ear
    /// uniformly into k² similar triangles with k = ⌈longest polygon edge / h⌉.
    pub fn polygon(vertices: &[[f64; 2]], h: f64) -> Result<Self> {
        let domain = Domain::Polygon { vertices: vertices.to_vec() };
        domain.validate()?;
        if !(h > 0.0) {
            return Err(Error::Domain(format!("mesh size must be positive, got {h}")));
        }
        let mut loop_: Vec<[f64; 2]> = vertices.to_vec();
        if signed_area(&loop_) < 0.0 {
            loop_.reverse();
        }
        let ears = ear_clip(&loop_)?;
        let n = loop_.len();
        let longest = (0..n)
            .map(|i| dist(loop_[i], loop_[(i + 1) % n]))
            .fold(0.0f64, f64::max);
        let k = ((longest / h).ceil() as usize).max(1);

        let scale = domain.diameter();
        let mut pool = VertexPool::new(1e-9 * scale);
        let mut cells = Vec::new();
        for [a, b, c] in ears {
            let (pa, pb, pc) = (loop_[a], loop_[b], loop_[c]);
            let node = |i: usize, j: usize| -> [f64; 2] {
                // point a + (i/k)(b − a) + (j/k)(c − a)
                let (s, t) = (i as f64 / k as f64, j as f64 / k as f64);
                [
                    pa[0] + s * (pb[0] - pa[0]) + t * (pc[0] - pa[0]),
                    pa[1] + s * (pb[1] - pa[1]) + t * (pc[1] - pa[1]),
                ]
            };
            let corner = |i: usize, j: usize| -> Option<[f64; 2]> {
                // snap exact polygon corners to avoid drift
                match (i, j) {
                    (0, 0) => Some(pa),
                    (i, 0) if i == k => Some(pb),
                    (0, j) if j == k => Some(pc),
                    _ => None,
                }
            };
            let mut id = |i: usize, j: usize| pool.insert(corner(i, j).unwrap_or_else(|| node(i, j)));
            for j in 0..k {
                for i in 0..k - j {
                    let v00 = id(i, j);
                    let v10 = id(i + 1, j);
                    let v01 = id(i, j + 1);
                    cells.extend([v00, v10, v01]);
                    if i + j + 1 < k {
                        let v11 = id(i + 1, j + 1);
                        cells.extend([v10, v11, v01]);
                    }
                }
            }
        }
        Ok(Self::assemble(domain, 2, pool.vertices, cells))
    }

    /// Structured triangulation of the unit square with `n` cells per side.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 1.0 / n as f64)
    }

    /// Mesh of `domain` at target size `h`.
    pub fn for_domain(domain: &Domain, h: f64) -> Result<Self> {
        match domain {
            Domain::Interval { x0, x1 } => Self::interval(*x0, *x1, ((x1 - x0) / h).round().max(2.0) as usize),
            Domain::Polygon { vertices } => Self::polygon(vertices, h),
        }
    }

    fn assemble(domain: Domain, dim: usize, vertices: Vec<[f64; 2]>, cells: Vec<usize>) -> Self {
        let nv = dim + 1;
        let ncell = cells.len() / nv;
        let nvert = vertices.len();
        let mut boundary = vec![false; vertices.len()];
        let mut boundary_facets = Vec::new();
        if dim == 1 {
            let last = vertices.len() - 1;
            boundary[0] = true;
            boundary[last] = true;
            boundary_facets.push([0, 0]);
            boundary_facets.push([last, last]);
        } else {
            let mut count: HashMap<(usize, usize), u32> = HashMap::new();
            for c in 0..ncell {
                let t = &cells[3 * c..3 * c + 3];
                for e in 0..3 {
                    let (a, b) = (t[e], t[(e + 1) % 3]);
                    *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
            let mut edges: Vec<(usize, usize)> = count.into_iter().filter(|(_, n)| *n == 1).map(|(e, _)| e).collect();
            edges.sort_unstable();
            for (a, b) in edges {
                boundary[a] = true;
                boundary[b] = true;
                boundary_facets.push([a, b]);
            }
        }
        let mut dof = vec![None; vertices.len()];
        let mut free = Vec::new();
        for (v, &on_b) in boundary.iter().enumerate() {
            if !on_b {
                dof[v] = Some(free.len());
                free.push(v);
            }
        }
        let distance: Vec<f64> = vertices
            .iter()
            .zip(&boundary)
            .map(|(&p, &b)| if b { 0.0 } else { domain.distance(p) })
            .collect();

        let nq = if dim == 1 { 3 } else { 6 };
        let mut measure = Vec::with_capacity(ncell);
        let mut grads = Vec::with_capacity(ncell);
        let mut quad = Vec::with_capacity(ncell * nq);
        let mut h_max = 0.0f64;
        for c in 0..ncell {
            let t = &cells[nv * c..nv * c + nv];
            if dim == 1 {
                let (xa, xb) = (vertices[t[0]][0], vertices[t[1]][0]);
                let h = xb - xa;
                measure.push(h);
                grads.push([[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0; 2]]);
                h_max = h_max.max(h);
                for (s, w) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                    let x = [xa + s * h, 0.0];
                    quad.push(QuadPoint {
                        x,
                        bary: [1.0 - s, *s, 0.0],
                        weight: w * h,
                        d: domain.distance(x),
                    });
                }
            } else {
                let (p0, p1, p2) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
                let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                let area = 0.5 * det.abs();
                measure.push(area);
                // ∇λ_i = rot90(opposite edge) / det
                let g = |a: [f64; 2], b: [f64; 2]| [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
                grads.push([g(p1, p2), g(p2, p0), g(p0, p1)]);
                h_max = h_max.max(dist(p0, p1)).max(dist(p1, p2)).max(dist(p2, p0));
                for (b, w) in TRI6_POINTS.iter().zip(TRI6_WEIGHTS) {
                    let x = [
                        b[0] * p0[0] + b[1] * p1[0] + b[2] * p2[0],
                        b[0] * p0[1] + b[1] * p1[1] + b[2] * p2[1],
                    ];
                    quad.push(QuadPoint {
                        x,
                        bary: *b,
                        weight: w * area,
                        d: domain.distance(x),
                    });
                }
            }
        }
        Mesh {
            domain,
            dim,
            vertices,
            cells,
            boundary,
            dof,
            free,
            boundary_facets,
            measure,
            grads,
            quad,
            nq,
            distance,
            h_max,
            ids: (0..nvert).collect(),
        }
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_cells(&self) -> usize {
        self.measure.len()
    }
    pub fn n_free(&self) -> usize {
        self.free.len()
    }
    pub fn h_max(&self) -> f64 {
        self.h_max
    }
    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }
    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[nv * c..nv * c + nv]
    }
    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }
    pub fn dof(&self, v: usize) -> Option<usize> {
        self.dof[v]
    }
    /// Interior vertices in dof order.
    pub fn free_vertices(&self) -> &[usize] {
        &self.free
    }
    pub fn boundary_facets(&self) -> &[[usize; 2]] {
        &self.boundary_facets
    }
    pub fn cell_measure(&self, c: usize) -> f64 {
        self.measure[c]
    }
    /// Gradients of the barycentric coordinates (only `dim + 1` entries used).
    pub fn basis_gradients(&self, c: usize) -> &[[f64; 2]; 3] {
        &self.grads[c]
    }
    pub fn quad_points(&self, c: usize) -> &[QuadPoint] {
        &self.quad[self.nq * c..self.nq * (c + 1)]
    }
    /// Exact nodal distance to the boundary.
    pub fn distance(&self) -> &[f64] {
        &self.distance
    }
    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Field-evaluation context for quadrature point `q` of cell `c`.
    pub fn field_point(&self, c: usize, q: &QuadPoint) -> FieldPoint<'_> {
        FieldPoint {
            x: q.x,
            d: q.d,
            nodes: self.cell(c),
            bary: q.bary,
        }
    }

    /// Field-evaluation context at vertex `v`.
    pub fn vertex_point(&self, v: usize) -> FieldPoint<'_> {
        FieldPoint {
            x: self.vertices[v],
            d: self.distance[v],
            nodes: &self.ids[v..v + 1],
            bary: [1.0, 0.0, 0.0],
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

struct VertexPool {
    q: f64,
    map: HashMap<(i64, i64), usize>,
    vertices: Vec<[f64; 2]>,
}

impl VertexPool {
    fn new(q: f64) -> Self {
        Self {
            q,
            map: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn insert(&mut self, p: [f64; 2]) -> usize {
        let key = ((p[0] / self.q).round() as i64, (p[1] / self.q).round() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&id) = self.map.get(&(key.0 + dx, key.1 + dy)) {
                    if dist(self.vertices[id], p) <= self.q {
                        return id;
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.map.insert(key, id);
        id
    }
}

/// Ear clipping of a counter-clockwise simple polygon.
fn ear_clip(p: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let inside = |q: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        cross(a, b, q) >= 0.0 && cross(b, c, q) >= 0.0 && cross(c, a, q) >= 0.0
    };
    let mut idx: Vec<usize> = (0..p.len()).collect();
    let mut out = Vec::new();
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&i| {
            let (a, b, c) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
            if cross(p[a], p[b], p[c]) <= 0.0 {
                return false;
            }
            idx.iter()
                .filter(|&&j| j != a && j != b && j != c)
                .all(|&j| !inside(p[j], p[a], p[b], p[c]))
        });
        let Some(i) = ear else {
            return Err(Error::Domain("polygon is not simple: no ear found".into()));
        };
        out.push([idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]]);
        idx.remove(i);
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_mesh_basics() {
        let m = Mesh::unit_interval(10).unwrap();
        assert_eq!(m.n_vertices(), 11);
        assert_eq!(m.n_free(), 9);
        assert!((m.total_measure() - 1.0).abs() < 1e-15);
        assert!((m.distance()[3] - 0.3).abs() < 1e-15);
        assert_eq!(m.distance()[0], 0.0);
    }

    #[test]
    fn unit_square_is_structured() {
        let m = Mesh::unit_square(8).unwrap();
        assert_eq!(m.n_vertices(), 81);
        assert_eq!(m.n_cells(), 128);
        assert_eq!(m.n_free(), 49);
        assert!((m.total_measure() - 1.0).abs() < 1e-13);
        assert_eq!(m.boundary_facets().len(), 32);
        let centre = m.vertices().iter().position(|v| dist(*v, [0.5, 0.5]) < 1e-12).unwrap();
        assert!((m.distance()[centre] - 0.5).abs() < 1e-15);
        let off = m.vertices().iter().position(|v| dist(*v, [0.125, 0.375]) < 1e-12).unwrap();
        assert!((m.distance()[off] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn l_shape_is_conforming() {
        let l = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let m = Mesh::polygon(&l, 0.25).unwrap();
        assert!((m.total_measure() - 3.0).abs() < 1e-12);
        // the boundary of a conforming mesh is a closed loop: every boundary vertex has two facets
        let mut deg = vec![0; m.n_vertices()];
        for [a, b] in m.boundary_facets() {
            deg[*a] += 1;
            deg[*b] += 1;
        }
        assert!(deg.iter().all(|&d| d == 0 || d == 2));
        assert!((0..m.n_cells()).all(|c| m.cell_measure(c) > 0.0));
    }

    #[test]
    fn distance_matches_dense_boundary_sampling() {
        let poly = [[0.0, 0.0], [3.0, 0.2], [2.0, 2.0], [0.5, 1.5]];
        let m = Mesh::polygon(&poly, 0.3).unwrap();
        let mut samples = Vec::new();
        for i in 0..4 {
            let (a, b) = (poly[i], poly[(i + 1) % 4]);
            for k in 0..=20000 {
                let s = k as f64 / 20000.0;
                samples.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
        for (v, &p) in m.vertices().iter().enumerate() {
            let brute = samples.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min);
            // sampled oracle is an upper bound within the sampling spacing
            assert!(m.distance()[v] <= brute + 1e-12);
            assert!(brute - m.distance()[v] <= 2e-4);
        }
    }

    #[test]
    fn distance_is_one_lipschitz_across_edges() {
        let m = Mesh::polygon(&[[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]], 0.2).unwrap();
        for c in 0..m.n_cells() {
            let t = m.cell(c);
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let diff = (m.distance()[a] - m.distance()[b]).abs();
                assert!(diff <= dist(m.vertex(a), m.vertex(b)) + 1e-12);
            }
        }
    }

    #[test]
    fn barycentric_gradients_sum_to_zero() {
        let m = Mesh::unit_square(3).unwrap();
        for c in 0..m.n_cells() {
            let g = m.basis_gradients(c);
            assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-12);
            assert!((g[0][1] + g[1][1] + g[2][1]).abs() < 1e-12);
        }
    }
}
