use std::fs;
use std::path::Path;

use crate::discretization::{DiscreteField, Mesh};
use crate::error::{Error, Result};

/// Fixed-width scientific notation; identical bits give identical text.
pub fn num(v: f64, prec: usize) -> String {
    format!("{v:.prec$e}")
}

pub fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| num(x, prec)).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Interior vertices: x, y, u, d, u/d.
pub fn solution_rows(u: &DiscreteField, prec: usize) -> Vec<Vec<String>> {
    let mesh = u.mesh();
    let d = mesh.distance();
    mesh.free_vertices()
        .iter()
        .map(|&v| {
            let p = mesh.vertex(v);
            let uv = u.values()[v];
            vec![num(p[0], prec), num(p[1], prec), num(uv, prec), num(d[v], prec), num(uv / d[v], prec)]
        })
        .collect()
}

/// One row per cell: its vertex indices.
pub fn mesh_rows(mesh: &Mesh) -> Vec<Vec<String>> {
    (0..mesh.n_cells())
        .map(|c| {
            let mut r: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
            r.resize(3, String::new());
            r
        })
        .collect()
}

pub fn vertex_rows(mesh: &Mesh, prec: usize) -> Vec<Vec<String>> {
    (0..mesh.n_vertices())
        .map(|v| {
            let p = mesh.vertex(v);
            vec![v.to_string(), num(p[0], prec), num(p[1], prec), (mesh.is_boundary(v) as u8).to_string()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed_width() {
        assert_eq!(num(0.25, 3), "2.500e-1");
        assert_eq!(num(-1234.5, 2), "-1.23e3");
        assert_eq!(opt(None, 4), "");
    }
}
