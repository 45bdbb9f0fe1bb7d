//! P1 finite elements: meshes, discrete fields, assembly of the regularized
//! operator and sparse linear algebra.

mod assembly;
mod mesh;
mod sparse;

pub use assembly::{assemble_jacobian, assemble_residual, Assembler};
pub use mesh::{Mesh, QuadPoint};
pub use sparse::{pcg, solve, solve_direct, CsrMatrix, LinearSolver};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nfunction::{luxemburg_norm, NFunction};

/// Nodal P1 field with homogeneous Dirichlet values.
#[derive(Clone)]
pub struct DiscreteField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl fmt::Debug for DiscreteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DiscreteField({} vertices, max |u| = {:e})",
            self.values.len(),
            self.max_norm()
        )
    }
}

impl PartialEq for DiscreteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) && self.values == other.values
    }
}

impl DiscreteField {
    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_vertices();
        Self { mesh, values: vec![0.0; n] }
    }

    /// Interpolates `f(x, d)` at interior vertices; boundary values are 0.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn([f64; 2], f64) -> f64) -> Self {
        let values = (0..mesh.n_vertices())
            .map(|v| if mesh.is_boundary(v) { 0.0 } else { f(mesh.vertex(v), mesh.distance()[v]) })
            .collect();
        Self { mesh, values }
    }

    /// Takes nodal values for every vertex; boundary entries must be 0.
    pub fn from_values(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::Domain(format!(
                "field has {} values for {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if let Some(v) = (0..values.len()).find(|&v| mesh.is_boundary(v) && values[v] != 0.0) {
            return Err(Error::Domain(format!("Dirichlet value at boundary vertex {v} is {}", values[v])));
        }
        Ok(Self { mesh, values })
    }

    pub fn from_free(mesh: Arc<Mesh>, free: &[f64]) -> Self {
        let mut u = Self::zeros(mesh);
        u.set_free(free);
        u
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn free_values(&self) -> Vec<f64> {
        self.mesh.free_vertices().iter().map(|&v| self.values[v]).collect()
    }

    pub fn set_free(&mut self, free: &[f64]) {
        assert_eq!(free.len(), self.mesh.n_free());
        for (&v, &x) in self.mesh.free_vertices().iter().zip(free) {
            self.values[v] = x;
        }
    }

    /// Applies `f` to every interior value (boundary stays 0).
    pub fn map_interior(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for &v in self.mesh.free_vertices() {
            out.values[v] = f(self.values[v]);
        }
        out
    }

    pub fn gradient(&self, c: usize) -> [f64; 2] {
        let g = self.mesh.basis_gradients(c);
        let mut out = [0.0; 2];
        for (i, &v) in self.mesh.cell(c).iter().enumerate() {
            out[0] += self.values[v] * g[i][0];
            out[1] += self.values[v] * g[i][1];
        }
        out
    }

    pub fn value_at(&self, c: usize, bary: &[f64; 3]) -> f64 {
        self.mesh.cell(c).iter().zip(bary).map(|(&v, w)| w * self.values[v]).sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self {
            mesh: self.mesh.clone(),
            values,
        }
    }

    /// Smallest interior value and its vertex.
    pub fn min_interior(&self) -> Option<(usize, f64)> {
        self.mesh
            .free_vertices()
            .iter()
            .map(|&v| (v, self.values[v]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Nodal distance to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub values: Vec<f64>,
}

/// Exact vertex distances: min(x − x0, x1 − x) in 1D, minimum point–segment
/// distance over the boundary polygon in 2D.
pub fn distance_field(mesh: &Mesh) -> DistanceField {
    DistanceField {
        values: mesh.distance().to_vec(),
    }
}

/// (Σ_cells |∇u|^ℓ |K|)^{1/ℓ}; with `min_distance = Some(δ)` only cells whose
/// vertices all satisfy d ≥ δ are included.
pub fn sobolev_seminorm_ell(u: &DiscreteField, ell: f64, min_distance: Option<f64>) -> f64 {
    let mesh = u.mesh();
    let d = mesh.distance();
    let sum: f64 = (0..mesh.n_cells())
        .filter(|&c| min_distance.map_or(true, |delta| mesh.cell(c).iter().all(|&v| d[v] >= delta)))
        .map(|c| {
            let g = u.gradient(c);
            (g[0] * g[0] + g[1] * g[1]).sqrt().powf(ell) * mesh.cell_measure(c)
        })
        .sum();
    sum.powf(1.0 / ell)
}

/// Luxemburg norm of |∇u| with respect to Φ (P1 gradients are cellwise constant).
pub fn gradient_luxemburg_norm(u: &DiscreteField, nf: &NFunction) -> f64 {
    let mesh = u.mesh();
    let (vals, w): (Vec<f64>, Vec<f64>) = (0..mesh.n_cells())
        .map(|c| {
            let g = u.gradient(c);
            ((g[0] * g[0] + g[1] * g[1]).sqrt(), mesh.cell_measure(c))
        })
        .unzip();
    luxemburg_norm(&vals, &w, |t| nf.big_phi(t))
}
