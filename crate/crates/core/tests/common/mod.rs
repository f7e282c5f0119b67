//! Test-only oracles, written independently of the library's kernels.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hexstiff::assemble::LowerCscMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Corner signs of the hex8 reference element, bottom face then top face.
pub const CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// 5-point Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre_5() -> ([f64; 5], [f64; 5]) {
    let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
    ([-b, -a, 0.0, a, b], [wb, wa, 128.0 / 225.0, wa, wb])
}

/// Gradient of N_a = ⅛(1+r_a r)(1+s_a s)(1+t_a t) by the product rule.
fn grad_natural(a: usize, p: [f64; 3]) -> [f64; 3] {
    let f: [f64; 3] = std::array::from_fn(|d| 1.0 + CORNERS[a][d] * p[d]);
    [
        0.125 * CORNERS[a][0] * f[1] * f[2],
        0.125 * f[0] * CORNERS[a][1] * f[2],
        0.125 * f[0] * f[1] * CORNERS[a][2],
    ]
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    x
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Full 8×8 element matrix `c ∫ ∇Nᵢ·∇Nⱼ dV` by 5×5×5 Gauss–Legendre.
pub fn stiffness_oracle(nodes: &[[f64; 3]; 8], c: f64) -> [[f64; 8]; 8] {
    let (pts, wts) = gauss_legendre_5();
    let mut k = [[0.0; 8]; 8];
    for (i, &r) in pts.iter().enumerate() {
        for (j, &s) in pts.iter().enumerate() {
            for (l, &t) in pts.iter().enumerate() {
                let w = wts[i] * wts[j] * wts[l];
                let gn: Vec<[f64; 3]> = (0..8).map(|a| grad_natural(a, [r, s, t])).collect();
                // jac[d][x] = ∂x/∂ξ_d, so ∇ξ N = jac · ∇x N
                let mut jac = [[0.0; 3]; 3];
                for a in 0..8 {
                    for d in 0..3 {
                        for x in 0..3 {
                            jac[d][x] += gn[a][d] * nodes[a][x];
                        }
                    }
                }
                let det = det3(&jac);
                let gx: Vec<[f64; 3]> = gn.iter().map(|g| solve3(jac, *g)).collect();
                for a in 0..8 {
                    for b in 0..8 {
                        let dot: f64 = (0..3).map(|x| gx[a][x] * gx[b][x]).sum();
                        k[a][b] += c * w * det * dot;
                    }
                }
            }
        }
    }
    k
}

/// Element volume by 5×5×5 quadrature of det J.
pub fn volume_oracle(nodes: &[[f64; 3]; 8]) -> f64 {
    let (pts, wts) = gauss_legendre_5();
    let mut v = 0.0;
    for (i, &r) in pts.iter().enumerate() {
        for (j, &s) in pts.iter().enumerate() {
            for (l, &t) in pts.iter().enumerate() {
                let mut jac = [[0.0; 3]; 3];
                for a in 0..8 {
                    let g = grad_natural(a, [r, s, t]);
                    for d in 0..3 {
                        for x in 0..3 {
                            jac[d][x] += g[d] * nodes[a][x];
                        }
                    }
                }
                v += wts[i] * wts[j] * wts[l] * det3(&jac);
            }
        }
    }
    v
}

/// Image of the reference cube under `x = origin + A (ξ + 1)/2`.
pub fn parallelepiped(origin: [f64; 3], a: [[f64; 3]; 3]) -> [[f64; 3]; 8] {
    std::array::from_fn(|n| {
        let xi = CORNERS[n];
        std::array::from_fn(|x| origin[x] + (0..3).map(|d| a[x][d] * 0.5 * (xi[d] + 1.0)).sum::<f64>())
    })
}

pub fn random_parallelepiped<R: Rng>(rng: &mut R) -> [[f64; 3]; 8] {
    loop {
        let mut a = [[0.0; 3]; 3];
        for (x, row) in a.iter_mut().enumerate() {
            for (d, v) in row.iter_mut().enumerate() {
                *v = if x == d { rng.random_range(0.5..2.0) } else { rng.random_range(-0.4..0.4) };
            }
        }
        if det3(&a) > 0.1 {
            let origin = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
            return parallelepiped(origin, a);
        }
    }
}

/// Unit cube corners moved by up to `amount` in every coordinate.
pub fn perturbed_cube<R: Rng>(rng: &mut R, amount: f64) -> [[f64; 3]; 8] {
    std::array::from_fn(|n| std::array::from_fn(|x| 0.5 * (CORNERS[n][x] + 1.0) + rng.random_range(-amount..amount)))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _ in 0..100 {
        let off: f64 = (0..N).flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array::from_fn(|i| a[i][i])
}

/// Dense symmetric matrix from the stored lower triangle.
pub fn densify(m: &LowerCscMatrix) -> Vec<Vec<f64>> {
    let n = m.dim();
    let mut d = vec![vec![0.0; n]; n];
    for (r, c, v) in m.entries() {
        d[r][c] = v;
        d[c][r] = v;
    }
    d
}

pub fn max_relative_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Bitwise equality of two CSC matrices.
pub fn bitwise_equal(a: &LowerCscMatrix, b: &LowerCscMatrix) -> bool {
    a.same_structure(b) && a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits())
}
