//! Hexahedral meshes: the node coordinates, the 8-node connectivity and the
//! per-element material coefficient.
//!
//! Structured cube meshes number nodes x-fastest, then y, then z. Every
//! element lists its corners bottom face first (counterclockwise seen from
//! +z), then the top face in the same order, which is the local ordering the
//! [`crate::element`] module expects.
//!
//! The text format written by [`save_mesh`] is
//!
//! ```text
//! hexmesh <n_nodes> <n_el>
//! x y z                       (n_nodes lines)
//! n0 n1 n2 n3 n4 n5 n6 n7 c   (n_el lines, 0-based node ids)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::element::ElementGeometry;
use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Unstructured 8-node hexahedral mesh. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    coords: Vec<Point>,
    connectivity: Vec<[usize; 8]>,
    coefficient: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh after checking index bounds, node distinctness within
    /// each element and positivity of the coefficients.
    ///
    /// Element orientation (positive Jacobian) is not checked here; the
    /// integrator reports it per element.
    pub fn new(coords: Vec<Point>, connectivity: Vec<[usize; 8]>, coefficient: Vec<f64>) -> Result<Self> {
        if connectivity.len() != coefficient.len() {
            return Err(Error::Validation(format!(
                "{} elements but {} coefficients",
                connectivity.len(),
                coefficient.len()
            )));
        }
        if let Some(n) = coords.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::Validation(format!("node {n} has a non-finite coordinate")));
        }
        let n_nodes = coords.len();
        for (e, nodes) in connectivity.iter().enumerate() {
            if let Some(&bad) = nodes.iter().find(|&&n| n >= n_nodes) {
                return Err(Error::Validation(format!(
                    "element {e} references node {bad} but the mesh has {n_nodes} nodes"
                )));
            }
            for a in 0..8 {
                if nodes[a + 1..].contains(&nodes[a]) {
                    return Err(Error::Validation(format!(
                        "element {e} repeats node {}",
                        nodes[a]
                    )));
                }
            }
        }
        if let Some(e) = coefficient.iter().position(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::Validation(format!(
                "element {e} has non-positive coefficient {}",
                coefficient[e]
            )));
        }
        Ok(Mesh {
            coords,
            connectivity,
            coefficient,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_elements(&self) -> usize {
        self.connectivity.len()
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn connectivity(&self) -> &[[usize; 8]] {
        &self.connectivity
    }

    pub fn coefficient(&self) -> &[f64] {
        &self.coefficient
    }

    /// Gathers the corner coordinates of element `e`.
    pub fn geometry(&self, e: usize) -> ElementGeometry {
        let nodes = &self.connectivity[e];
        ElementGeometry::new(std::array::from_fn(|a| self.coords[nodes[a]]))
    }

    /// Returns a copy of this mesh with a different coefficient per element.
    pub fn with_coefficients(&self, coefficient: Vec<f64>) -> Result<Self> {
        Mesh::new(self.coords.clone(), self.connectivity.clone(), coefficient)
    }
}

/// Parameters of a structured `nx × ny × nz` cube mesh with edge length `h`
/// and uniform coefficient `c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredGridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub h: f64,
    pub c0: f64,
}

impl StructuredGridSpec {
    pub fn cube(n: usize) -> Self {
        StructuredGridSpec {
            nx: n,
            ny: n,
            nz: n,
            h: 1.0,
            c0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::Config(format!(
                "element counts must be positive, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("edge length must be positive, got {}", self.h)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::Config(format!("coefficient must be positive, got {}", self.c0)));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1) * (self.nz + 1)
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Global id of grid node `(i, j, k)`.
    pub fn node_id(&self, i: usize, j: usize, k: usize) -> usize {
        i + j * (self.nx + 1) + k * (self.nx + 1) * (self.ny + 1)
    }
}

pub fn generate_cube_mesh(spec: &StructuredGridSpec) -> Result<Mesh> {
    spec.validate()?;
    let StructuredGridSpec { nx, ny, nz, h, c0 } = *spec;

    let mut coords = Vec::with_capacity(spec.n_nodes());
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                coords.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }

    let mut connectivity = Vec::with_capacity(spec.n_elements());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let n = |di, dj, dk| spec.node_id(i + di, j + dj, k + dk);
                connectivity.push([
                    n(0, 0, 0),
                    n(1, 0, 0),
                    n(1, 1, 0),
                    n(0, 1, 0),
                    n(0, 0, 1),
                    n(1, 0, 1),
                    n(1, 1, 1),
                    n(0, 1, 1),
                ]);
            }
        }
    }

    let coefficient = vec![c0; connectivity.len()];
    Ok(Mesh {
        coords,
        connectivity,
        coefficient,
    })
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(out, "hexmesh {} {}", mesh.n_nodes(), mesh.n_elements())?;
    for [x, y, z] in &mesh.coords {
        writeln!(out, "{x} {y} {z}")?;
    }
    for (nodes, c) in mesh.connectivity.iter().zip(&mesh.coefficient) {
        for n in nodes {
            write!(out, "{n} ")?;
        }
        writeln!(out, "{c}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_mesh<R: Read>(input: R) -> Result<Mesh> {
    let reader = BufReader::new(input);
    // (1-based line number, content) for non-blank lines
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if !line.trim().is_empty() {
            lines.push((i + 1, line.to_owned()));
        }
    }
    let mut lines = lines.into_iter();

    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty mesh file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "hexmesh" {
        return Err(Error::parse(hl, "expected header `hexmesh <n_nodes> <n_el>`"));
    }
    let n_nodes: usize = parse_field(hl, fields[1], "node count")?;
    let n_el: usize = parse_field(hl, fields[2], "element count")?;

    let mut coords = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(hl, format!("expected {n_nodes} node lines")))?;
        let vals = parse_row::<f64>(ln, &line, 3, "coordinate")?;
        coords.push([vals[0], vals[1], vals[2]]);
    }

    let mut connectivity = Vec::with_capacity(n_el);
    let mut coefficient = Vec::with_capacity(n_el);
    for _ in 0..n_el {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(hl, format!("expected {n_el} element lines")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(Error::parse(ln, format!("expected 8 node ids and a coefficient, found {} fields", fields.len())));
        }
        let mut nodes = [0usize; 8];
        for (slot, f) in nodes.iter_mut().zip(&fields[..8]) {
            *slot = parse_field(ln, f, "node id")?;
        }
        connectivity.push(nodes);
        coefficient.push(parse_field(ln, fields[8], "coefficient")?);
    }

    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "unexpected trailing content"));
    }
    Mesh::new(coords, connectivity, coefficient)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    write_mesh(mesh, BufWriter::new(File::create(path)?))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    read_mesh(File::open(path)?)
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{field}`")))
}

fn parse_row<T: std::str::FromStr>(line: usize, text: &str, count: usize, what: &str) -> Result<Vec<T>> {
    let vals = text
        .split_whitespace()
        .map(|f| parse_field(line, f, what))
        .collect::<Result<Vec<T>>>()?;
    if vals.len() != count {
        return Err(Error::parse(line, format!("expected {count} values, found {}", vals.len())));
    }
    Ok(vals)
}
