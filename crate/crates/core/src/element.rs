//! The 8-node trilinear brick: shape functions, the 2×2×2 Gauss rule, the
//! isoparametric Jacobian and the local stiffness matrix `c ∫ BᵀB dΩ`.
//!
//! Local node `a` sits at natural coordinates [`NATURAL_COORDS`]`[a]`:
//!
//! ```text
//!        7-------6
//!       /|      /|
//!      4-------5 |        t
//!      | 3-----|-2        | s
//!      |/      |/         |/
//!      0-------1          +--- r
//! ```
//!
//! Only the lower triangle of the symmetric 8×8 local matrix is computed and
//! stored, row-major: `(0,0), (1,0), (1,1), (2,0), …, (7,7)`.

use std::sync::OnceLock;

use thiserror::Error;

use crate::error::Error;
use crate::mesh::Point;

pub const NODES_PER_ELEMENT: usize = 8;
pub const GAUSS_POINTS: usize = 8;
/// Entries in the packed lower triangle of an 8×8 matrix.
pub const PACKED_LEN: usize = NODES_PER_ELEMENT * (NODES_PER_ELEMENT + 1) / 2;

pub const NATURAL_COORDS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Position of local entry `(i, j)`, `j <= i`, in the packed layout.
#[inline]
pub const fn packed_index(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

/// Inverse of [`packed_index`].
pub const PACKED_PAIRS: [(usize, usize); PACKED_LEN] = {
    let mut pairs = [(0, 0); PACKED_LEN];
    let mut i = 0;
    let mut p = 0;
    while i < NODES_PER_ELEMENT {
        let mut j = 0;
        while j <= i {
            pairs[p] = (i, j);
            p += 1;
            j += 1;
        }
        i += 1;
    }
    pairs
};

pub fn shape_functions(r: f64, s: f64, t: f64) -> [f64; 8] {
    std::array::from_fn(|a| {
        let [ra, sa, ta] = NATURAL_COORDS[a];
        0.125 * (1.0 + ra * r) * (1.0 + sa * s) * (1.0 + ta * t)
    })
}

/// `dn[d][a] = ∂N_a / ∂(r, s, t)_d`.
pub fn shape_gradients(r: f64, s: f64, t: f64) -> [[f64; 8]; 3] {
    let mut dn = [[0.0; 8]; 3];
    for (a, &[ra, sa, ta]) in NATURAL_COORDS.iter().enumerate() {
        let (fr, fs, ft) = (1.0 + ra * r, 1.0 + sa * s, 1.0 + ta * t);
        dn[0][a] = 0.125 * ra * fs * ft;
        dn[1][a] = 0.125 * fr * sa * ft;
        dn[2][a] = 0.125 * fr * fs * ta;
    }
    dn
}

/// Tensor-product Gauss–Legendre rule on `[-1, 1]³`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: [[f64; 3]; GAUSS_POINTS],
    pub weights: [f64; GAUSS_POINTS],
}

/// Two points per axis at `±1/√3`, unit weights.
pub fn gauss_rule() -> GaussRule {
    let g = 1.0 / 3f64.sqrt();
    let axis = [-g, g];
    let mut points = [[0.0; 3]; GAUSS_POINTS];
    let mut q = 0;
    for &t in &axis {
        for &s in &axis {
            for &r in &axis {
                points[q] = [r, s, t];
                q += 1;
            }
        }
    }
    GaussRule {
        points,
        weights: [1.0; GAUSS_POINTS],
    }
}

/// Shape functions and natural-coordinate gradients tabulated at the Gauss
/// points. Shared read-only by every worker.
#[derive(Debug, Clone)]
pub struct ReferenceTables {
    pub rule: GaussRule,
    pub n: [[f64; 8]; GAUSS_POINTS],
    pub dn: [[[f64; 8]; 3]; GAUSS_POINTS],
}

impl ReferenceTables {
    pub fn hex8() -> Self {
        let rule = gauss_rule();
        let n = std::array::from_fn(|q| {
            let [r, s, t] = rule.points[q];
            shape_functions(r, s, t)
        });
        let dn = std::array::from_fn(|q| {
            let [r, s, t] = rule.points[q];
            shape_gradients(r, s, t)
        });
        ReferenceTables { rule, n, dn }
    }
}

pub fn reference_tables() -> &'static ReferenceTables {
    static TABLES: OnceLock<ReferenceTables> = OnceLock::new();
    TABLES.get_or_init(ReferenceTables::hex8)
}

/// Physical corner coordinates of one element, in local node order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub nodes: [Point; 8],
}

impl ElementGeometry {
    pub fn new(nodes: [Point; 8]) -> Self {
        ElementGeometry { nodes }
    }

    /// Axis-aligned box `[0,hx]×[0,hy]×[0,hz]` shifted by `origin`.
    pub fn brick(origin: Point, hx: f64, hy: f64, hz: f64) -> Self {
        ElementGeometry {
            nodes: std::array::from_fn(|a| {
                let [r, s, t] = NATURAL_COORDS[a];
                [
                    origin[0] + 0.5 * (r + 1.0) * hx,
                    origin[1] + 0.5 * (s + 1.0) * hy,
                    origin[2] + 0.5 * (t + 1.0) * hz,
                ]
            }),
        }
    }

    pub fn cube(h: f64) -> Self {
        Self::brick([0.0; 3], h, h, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("non-positive Jacobian determinant {det:e} at gauss point {gauss_point}")]
pub struct DegenerateJacobian {
    pub gauss_point: usize,
    pub det: f64,
}

impl DegenerateJacobian {
    pub fn in_element(self, element: usize) -> Error {
        Error::DegenerateElement {
            element,
            gauss_point: self.gauss_point,
            det: self.det,
        }
    }
}

/// `J[d][x] = ∂x/∂(r,s,t)_d` together with its determinant and inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    pub matrix: [[f64; 3]; 3],
    pub det: f64,
    pub inverse: [[f64; 3]; 3],
}

impl Jacobian {
    /// Rejects elements that are inverted or flat at this point.
    pub fn check(self, gauss_point: usize) -> Result<Self, DegenerateJacobian> {
        if self.det > 0.0 {
            Ok(self)
        } else {
            Err(DegenerateJacobian {
                gauss_point,
                det: self.det,
            })
        }
    }
}

/// `J = dN · X`, closed-form determinant and adjugate inverse. The inverse is
/// only meaningful when `det > 0`; see [`Jacobian::check`].
pub fn jacobian(geom: &ElementGeometry, dn: &[[f64; 8]; 3]) -> Jacobian {
    let mut j = [[0.0; 3]; 3];
    for (row, dn_d) in j.iter_mut().zip(dn) {
        for (a, p) in geom.nodes.iter().enumerate() {
            row[0] += dn_d[a] * p[0];
            row[1] += dn_d[a] * p[1];
            row[2] += dn_d[a] * p[2];
        }
    }

    let c00 = j[1][1] * j[2][2] - j[1][2] * j[2][1];
    let c01 = j[1][2] * j[2][0] - j[1][0] * j[2][2];
    let c02 = j[1][0] * j[2][1] - j[1][1] * j[2][0];
    let det = j[0][0] * c00 + j[0][1] * c01 + j[0][2] * c02;

    let inv_det = 1.0 / det;
    let inverse = [
        [
            c00 * inv_det,
            (j[0][2] * j[2][1] - j[0][1] * j[2][2]) * inv_det,
            (j[0][1] * j[1][2] - j[0][2] * j[1][1]) * inv_det,
        ],
        [
            c01 * inv_det,
            (j[0][0] * j[2][2] - j[0][2] * j[2][0]) * inv_det,
            (j[0][2] * j[1][0] - j[0][0] * j[1][2]) * inv_det,
        ],
        [
            c02 * inv_det,
            (j[0][1] * j[2][0] - j[0][0] * j[2][1]) * inv_det,
            (j[0][0] * j[1][1] - j[0][1] * j[1][0]) * inv_det,
        ],
    ];

    Jacobian {
        matrix: j,
        det,
        inverse,
    }
}

/// Lower triangle of a symmetric 8×8 local matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackedLowerKe {
    pub values: [f64; PACKED_LEN],
}

impl PackedLowerKe {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j <= i { (i, j) } else { (j, i) };
        self.values[packed_index(i, j)]
    }

    pub fn unpack(&self) -> [[f64; 8]; 8] {
        let mut full = [[0.0; 8]; 8];
        for (p, &(i, j)) in PACKED_PAIRS.iter().enumerate() {
            full[i][j] = self.values[p];
            full[j][i] = self.values[p];
        }
        full
    }

    /// Packs the lower triangle of `full`; the upper triangle is ignored.
    pub fn pack(full: &[[f64; 8]; 8]) -> Self {
        PackedLowerKe {
            values: std::array::from_fn(|p| {
                let (i, j) = PACKED_PAIRS[p];
                full[i][j]
            }),
        }
    }
}

/// Local stiffness `c Σ_q BᵀB |J| w_q` for one element, lower triangle only.
pub fn local_stiffness(geom: &ElementGeometry, c: f64) -> Result<PackedLowerKe, DegenerateJacobian> {
    let mut values = [0.0; PACKED_LEN];
    stiffness_into(geom, c, reference_tables(), &mut values)?;
    Ok(PackedLowerKe { values })
}

/// Kernel body shared by the integration engine: writes the 36 packed values
/// of one element into `out`.
pub(crate) fn stiffness_into(
    geom: &ElementGeometry,
    c: f64,
    tables: &ReferenceTables,
    out: &mut [f64],
) -> Result<(), DegenerateJacobian> {
    debug_assert_eq!(out.len(), PACKED_LEN);
    out.fill(0.0);
    for q in 0..GAUSS_POINTS {
        let dn = &tables.dn[q];
        let jac = jacobian(geom, dn).check(q)?;
        let inv = &jac.inverse;

        // B = J⁻¹ · dN
        let mut b = [[0.0; 8]; 3];
        for (x, row) in b.iter_mut().enumerate() {
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = inv[x][0] * dn[0][a] + inv[x][1] * dn[1][a] + inv[x][2] * dn[2][a];
            }
        }

        let w = jac.det * tables.rule.weights[q];
        let mut p = 0;
        for i in 0..8 {
            for j in 0..=i {
                out[p] += w * (b[0][i] * b[0][j] + b[1][i] * b[1][j] + b[2][i] * b[2][j]);
                p += 1;
            }
        }
    }
    for v in out.iter_mut() {
        *v *= c;
    }
    Ok(())
}
