//! Assembly of element values into the global matrix, stored as the lower
//! triangle (diagonal included) of a symmetric CSC matrix.
//!
//! Two strategies produce the same matrix:
//!
//! * [`build_triplet`] + [`triplet_to_csc`]: materialize `(row, col, value)`
//!   for every packed element entry, then convert, summing duplicates.
//! * [`assemble_direct`]: derive the column structure from the connectivity
//!   and scatter element values straight into it, without index arrays.
//!
//! Duplicates are summed in element order starting from `0.0` on both paths,
//! so their values agree bit for bit. Entries whose sum is zero stay stored.

use std::ops::Range;

use crate::element::{NODES_PER_ELEMENT, PACKED_LEN, PACKED_PAIRS};
use crate::error::{Error, Result};
use crate::integrate::LocalValuesBatch;
use crate::mesh::Mesh;

/// Global `(row, col)` of every lower-triangle entry of an element matrix
/// with `dof_per_node` unknowns per node, in packed order.
///
/// Local unknown `a * dof_per_node + k` maps to global
/// `nodes[a] * dof_per_node + k`; each pair is emitted as `(max, min)`.
pub fn map_local_to_global(nodes: &[usize; NODES_PER_ELEMENT], dof_per_node: usize) -> Vec<(usize, usize)> {
    let d = dof_per_node.max(1);
    let m = NODES_PER_ELEMENT * d;
    let global = |l: usize| nodes[l / d] * d + l % d;
    let mut pairs = Vec::with_capacity(m * (m + 1) / 2);
    for i in 0..m {
        for j in 0..=i {
            let (gr, gc) = (global(i), global(j));
            pairs.push((gr.max(gc), gr.min(gc)));
        }
    }
    pairs
}

/// Scalar (one unknown per node) fast path of [`map_local_to_global`].
#[inline]
fn lower_pairs(nodes: &[usize; NODES_PER_ELEMENT]) -> [(usize, usize); PACKED_LEN] {
    std::array::from_fn(|p| {
        let (i, j) = PACKED_PAIRS[p];
        let (gr, gc) = (nodes[i], nodes[j]);
        (gr.max(gc), gr.min(gc))
    })
}

/// Unsorted lower-triangular `(row, col, value)` entries; duplicates allowed.
///
/// Indices are four bytes wide.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix {
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    dim: usize,
}

impl TripletMatrix {
    pub fn new(rows: Vec<u32>, cols: Vec<u32>, vals: Vec<f64>, dim: usize) -> Result<Self> {
        if rows.len() != cols.len() || rows.len() != vals.len() {
            return Err(Error::Validation(format!(
                "triplet arrays differ in length: {} rows, {} cols, {} values",
                rows.len(),
                cols.len(),
                vals.len()
            )));
        }
        for (k, (&r, &c)) in rows.iter().zip(&cols).enumerate() {
            if r as usize >= dim || c as usize >= dim {
                return Err(Error::Validation(format!(
                    "entry {k} at ({r}, {c}) is outside a {dim}×{dim} matrix"
                )));
            }
            if r < c {
                return Err(Error::Validation(format!("entry {k} at ({r}, {c}) is above the diagonal")));
            }
        }
        Ok(TripletMatrix { rows, cols, vals, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn cols(&self) -> &[u32] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }
}

/// Incremental triplet construction, one group of elements at a time, in
/// mesh order. Used as the downstream consumer of the integrator.
#[derive(Debug)]
pub struct TripletBuilder<'m> {
    mesh: &'m Mesh,
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    next_element: usize,
}

impl<'m> TripletBuilder<'m> {
    pub fn new(mesh: &'m Mesh) -> Result<Self> {
        check_index_width(mesh.n_nodes())?;
        let n = mesh.n_elements() * PACKED_LEN;
        Ok(TripletBuilder {
            mesh,
            rows: Vec::with_capacity(n),
            cols: Vec::with_capacity(n),
            vals: Vec::with_capacity(n),
            next_element: 0,
        })
    }

    /// Appends the entries of `elements`, whose packed values are `values`.
    pub fn push(&mut self, elements: Range<usize>, values: &[f64]) -> Result<()> {
        if elements.start != self.next_element || elements.end > self.mesh.n_elements() {
            return Err(Error::Validation(format!(
                "element group {elements:?} out of order (expected start {})",
                self.next_element
            )));
        }
        if values.len() != elements.len() * PACKED_LEN {
            return Err(Error::Validation(format!(
                "{} values for {} elements",
                values.len(),
                elements.len()
            )));
        }
        for nodes in &self.mesh.connectivity()[elements.clone()] {
            for (r, c) in lower_pairs(nodes) {
                self.rows.push(r as u32);
                self.cols.push(c as u32);
            }
        }
        self.vals.extend_from_slice(values);
        self.next_element = elements.end;
        Ok(())
    }

    pub fn finish(self) -> Result<TripletMatrix> {
        if self.next_element != self.mesh.n_elements() {
            return Err(Error::Validation(format!(
                "only {} of {} elements were pushed",
                self.next_element,
                self.mesh.n_elements()
            )));
        }
        Ok(TripletMatrix {
            rows: self.rows,
            cols: self.cols,
            vals: self.vals,
            dim: self.mesh.n_nodes(),
        })
    }
}

fn check_index_width(dim: usize) -> Result<()> {
    if dim > u32::MAX as usize {
        return Err(Error::Validation(format!("{dim} unknowns exceed four-byte triplet indices")));
    }
    Ok(())
}

/// Entry `36·e + p` holds the `p`-th packed entry of element `e`.
pub fn build_triplet(mesh: &Mesh, values: &LocalValuesBatch) -> Result<TripletMatrix> {
    if values.n_elements() != mesh.n_elements() {
        return Err(Error::Validation(format!(
            "{} element rows for a mesh of {} elements",
            values.n_elements(),
            mesh.n_elements()
        )));
    }
    let mut builder = TripletBuilder::new(mesh)?;
    builder.push(0..mesh.n_elements(), values.as_slice())?;
    builder.finish()
}

/// Lower triangle of a symmetric matrix in compressed sparse column form.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerCscMatrix {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    dim: usize,
}

impl LowerCscMatrix {
    /// Checks every structural invariant: pointer shape, strictly increasing
    /// rows per column, nothing above the diagonal.
    pub fn from_parts(dim: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, vals: Vec<f64>) -> Result<Self> {
        if col_ptr.len() != dim + 1 || col_ptr.first() != Some(&0) {
            return Err(Error::Validation(format!(
                "column pointer array must have {} entries starting at 0",
                dim + 1
            )));
        }
        let nnz = col_ptr[dim];
        if row_idx.len() != nnz || vals.len() != nnz {
            return Err(Error::Validation(format!(
                "expected {nnz} entries, found {} rows and {} values",
                row_idx.len(),
                vals.len()
            )));
        }
        for c in 0..dim {
            let (lo, hi) = (col_ptr[c], col_ptr[c + 1]);
            if hi < lo || hi > nnz {
                return Err(Error::Validation(format!("column pointers decrease at column {c}")));
            }
            let rows = &row_idx[lo..hi];
            if rows.first().is_some_and(|&r| r < c) {
                return Err(Error::Validation(format!("column {c} has an entry above the diagonal")));
            }
            if rows.last().is_some_and(|&r| r >= dim) {
                return Err(Error::Validation(format!("column {c} has a row index out of range")));
            }
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!("rows of column {c} are not strictly increasing")));
            }
        }
        Ok(LowerCscMatrix {
            col_ptr,
            row_idx,
            vals,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Iterates stored entries as `(row, col, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.vals[k]))
        })
    }

    /// Value at `(row, col)` of the full symmetric matrix.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        let span = self.col_ptr[c]..self.col_ptr[c + 1];
        match self.row_idx[span.clone()].binary_search(&r) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = K x` with `K` the full symmetric matrix.
    pub fn symmetric_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_structure(&self, other: &LowerCscMatrix) -> bool {
        self.dim == other.dim && self.col_ptr == other.col_ptr && self.row_idx == other.row_idx
    }
}

/// Stable sort by `(col, row)` and summation of duplicate runs in original
/// entry order.
pub fn triplet_to_csc(t: &TripletMatrix) -> LowerCscMatrix {
    let dim = t.dim;

    // bucket entries by column, preserving entry order
    let mut start = vec![0usize; dim + 1];
    for &c in &t.cols {
        start[c as usize + 1] += 1;
    }
    for c in 0..dim {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; t.nnz()];
    for (k, &c) in t.cols.iter().enumerate() {
        order[fill[c as usize]] = k;
        fill[c as usize] += 1;
    }

    let mut col_ptr = Vec::with_capacity(dim + 1);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    col_ptr.push(0);
    for c in 0..dim {
        let bucket = &mut order[start[c]..start[c + 1]];
        bucket.sort_by_key(|&k| t.rows[k]);
        let mut i = 0;
        while i < bucket.len() {
            let row = t.rows[bucket[i]];
            let mut sum = 0.0;
            while i < bucket.len() && t.rows[bucket[i]] == row {
                sum += t.vals[bucket[i]];
                i += 1;
            }
            row_idx.push(row as usize);
            vals.push(sum);
        }
        col_ptr.push(row_idx.len());
    }

    LowerCscMatrix {
        col_ptr,
        row_idx,
        vals,
        dim,
    }
}

/// Connectivity-driven assembly: the sparsity pattern is computed once from
/// the mesh, then element values are added in place group by group.
#[derive(Debug)]
pub struct DirectAssembler<'m> {
    mesh: &'m Mesh,
    matrix: LowerCscMatrix,
    next_element: usize,
}

impl<'m> DirectAssembler<'m> {
    /// Computes the lower-triangular pattern: for every node, the sorted set
    /// of nodes with an equal or higher id sharing an element with it.
    pub fn new(mesh: &'m Mesh) -> Self {
        let n = mesh.n_nodes();

        // node → elements
        let mut el_ptr = vec![0usize; n + 1];
        for nodes in mesh.connectivity() {
            for &v in nodes {
                el_ptr[v + 1] += 1;
            }
        }
        for v in 0..n {
            el_ptr[v + 1] += el_ptr[v];
        }
        let mut fill = el_ptr.clone();
        let mut el_of = vec![0usize; el_ptr[n]];
        for (e, nodes) in mesh.connectivity().iter().enumerate() {
            for &v in nodes {
                el_of[fill[v]] = e;
                fill[v] += 1;
            }
        }

        let mut marker = vec![usize::MAX; n];
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for c in 0..n {
            let begin = row_idx.len();
            for &e in &el_of[el_ptr[c]..el_ptr[c + 1]] {
                for &r in &mesh.connectivity()[e] {
                    if r >= c && marker[r] != c {
                        marker[r] = c;
                        row_idx.push(r);
                    }
                }
            }
            row_idx[begin..].sort_unstable();
            col_ptr.push(row_idx.len());
        }

        let vals = vec![0.0; row_idx.len()];
        DirectAssembler {
            mesh,
            matrix: LowerCscMatrix {
                col_ptr,
                row_idx,
                vals,
                dim: n,
            },
            next_element: 0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Adds the packed values of `elements` (which must follow the previously
    /// added group) into the matrix.
    pub fn accumulate(&mut self, elements: Range<usize>, values: &[f64]) -> Result<()> {
        if elements.start != self.next_element || elements.end > self.mesh.n_elements() {
            return Err(Error::Validation(format!(
                "element group {elements:?} out of order (expected start {})",
                self.next_element
            )));
        }
        if values.len() != elements.len() * PACKED_LEN {
            return Err(Error::Validation(format!(
                "{} values for {} elements",
                values.len(),
                elements.len()
            )));
        }
        let m = &mut self.matrix;
        let conn = &self.mesh.connectivity()[elements.clone()];
        for (nodes, ke) in conn.iter().zip(values.chunks_exact(PACKED_LEN)) {
            for ((r, c), &v) in lower_pairs(nodes).into_iter().zip(ke) {
                let lo = m.col_ptr[c];
                let k = m.row_idx[lo..m.col_ptr[c + 1]]
                    .binary_search(&r)
                    .expect("pattern covers every element entry");
                m.vals[lo + k] += v;
            }
        }
        self.next_element = elements.end;
        Ok(())
    }

    pub fn finish(self) -> Result<LowerCscMatrix> {
        if self.next_element != self.mesh.n_elements() {
            return Err(Error::Validation(format!(
                "only {} of {} elements were accumulated",
                self.next_element,
                self.mesh.n_elements()
            )));
        }
        Ok(self.matrix)
    }
}

pub fn assemble_direct(mesh: &Mesh, values: &LocalValuesBatch) -> Result<LowerCscMatrix> {
    if values.n_elements() != mesh.n_elements() {
        return Err(Error::Validation(format!(
            "{} element rows for a mesh of {} elements",
            values.n_elements(),
            mesh.n_elements()
        )));
    }
    let mut asm = DirectAssembler::new(mesh);
    asm.accumulate(0..mesh.n_elements(), values.as_slice())?;
    asm.finish()
}

/// Fraction of triplet entries removed by duplicate summation.
pub fn nnz_compression(t: &TripletMatrix, m: &LowerCscMatrix) -> f64 {
    compression_ratio(t.nnz(), m.nnz())
}

pub fn compression_ratio(nnz_triplet: usize, nnz_csc: usize) -> f64 {
    if nnz_triplet == 0 {
        0.0
    } else {
        1.0 - nnz_csc as f64 / nnz_triplet as f64
    }
}

/// Lower-triangle nonzero count of the scalar hex8 matrix on an
/// `nx × ny × nz` structured grid: `(∏(3N−2) + ∏N) / 2` with `N = n + 1`
/// nodes per axis.
pub fn structured_lower_nnz(nx: usize, ny: usize, nz: usize) -> u64 {
    let axes = [nx as u64 + 1, ny as u64 + 1, nz as u64 + 1];
    let full: u64 = axes.iter().map(|&n| 3 * n - 2).product();
    let diag: u64 = axes.iter().product();
    (full + diag) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{local_stiffness, ElementGeometry};
    use crate::mesh::{generate_cube_mesh, StructuredGridSpec};

    #[test]
    fn mapping_examples() {
        let id = [0, 1, 2, 3, 4, 5, 6, 7];
        let pairs = map_local_to_global(&id, 1);
        assert_eq!(pairs.len(), 36);
        assert_eq!(pairs[crate::element::packed_index(3, 1)], (3, 1));

        let rev = [7, 6, 5, 4, 3, 2, 1, 0];
        let pairs = map_local_to_global(&rev, 1);
        assert_eq!(pairs[crate::element::packed_index(1, 0)], (7, 6));
        assert!(pairs.iter().all(|&(r, c)| r >= c));
        assert_eq!(pairs, lower_pairs(&rev).to_vec());
    }

    #[test]
    fn mapping_with_several_dofs_per_node() {
        let pairs = map_local_to_global(&[0, 1, 2, 3, 4, 5, 6, 7], 3);
        assert_eq!(pairs.len(), 24 * 25 / 2);
        assert!(pairs.iter().all(|&(r, c)| r >= c && r < 24));
        // local unknown 4 is node 1, component 1
        assert_eq!(pairs[4 * 5 / 2 + 4], (4, 4));
    }

    #[test]
    fn small_conversion_sums_in_order() {
        let t = TripletMatrix::new(
            vec![0, 2, 1, 2, 0, 2],
            vec![0, 0, 1, 0, 0, 2],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 0.0],
            3,
        )
        .unwrap();
        let m = triplet_to_csc(&t);
        assert_eq!(m.col_ptr(), &[0, 2, 3, 4]);
        assert_eq!(m.row_idx(), &[0, 2, 1, 2]);
        assert_eq!(m.values(), &[6.0, 6.0, 3.0, 0.0]);
    }

    #[test]
    fn triplet_rejects_bad_indices() {
        assert!(TripletMatrix::new(vec![3], vec![0], vec![1.0], 3).is_err());
        assert!(TripletMatrix::new(vec![0], vec![1], vec![1.0], 3).is_err());
        assert!(TripletMatrix::new(vec![0, 1], vec![0], vec![1.0], 3).is_err());
    }

    #[test]
    fn single_element_matches_local_matrix() {
        let mesh = generate_cube_mesh(&StructuredGridSpec::cube(1)).unwrap();
        let ke = local_stiffness(&ElementGeometry::cube(1.0), 1.0).unwrap();
        let batch = LocalValuesBatch::from_values(ke.values.to_vec()).unwrap();
        let t = build_triplet(&mesh, &batch).unwrap();
        assert_eq!(t.nnz(), 36);
        let m = triplet_to_csc(&t);
        assert_eq!(m.nnz(), 36);
        assert_eq!(nnz_compression(&t, &m), 0.0);
        let nodes = mesh.connectivity()[0];
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m.get(nodes[i], nodes[j]).to_bits(), ke.get(i, j).to_bits());
            }
        }
        assert_eq!(assemble_direct(&mesh, &batch).unwrap(), m);
    }

    #[test]
    fn builders_reject_out_of_order_groups() {
        let mesh = generate_cube_mesh(&StructuredGridSpec::cube(2)).unwrap();
        let vals = vec![0.0; 36 * 4];
        let mut tb = TripletBuilder::new(&mesh).unwrap();
        assert!(tb.push(4..8, &vals).is_err());
        tb.push(0..4, &vals).unwrap();
        assert!(tb.finish().is_err());
        let mut da = DirectAssembler::new(&mesh);
        assert!(da.accumulate(0..3, &vals).is_err());
        da.accumulate(0..4, &vals).unwrap();
        assert!(da.finish().is_err());
    }

    #[test]
    fn csc_invariants_are_checked() {
        assert!(LowerCscMatrix::from_parts(2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        // above diagonal
        assert!(LowerCscMatrix::from_parts(2, vec![0, 0, 1], vec![0], vec![1.0]).is_err());
        // repeated row
        assert!(LowerCscMatrix::from_parts(2, vec![0, 2, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(LowerCscMatrix::from_parts(2, vec![0, 1], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn nnz_formula_matches_known_counts() {
        assert_eq!(structured_lower_nnz(10, 10, 10), 15_561);
        assert_eq!(structured_lower_nnz(40, 40, 40), 920_241);
        assert_eq!(structured_lower_nnz(1, 1, 1), 36);
    }
}
