mod common;

use hexstiff::element::{
    gauss_rule, jacobian, local_stiffness, shape_functions, shape_gradients, ElementGeometry, PackedLowerKe,
    NATURAL_COORDS, PACKED_LEN, PACKED_PAIRS,
};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

proptest! {
    #[test]
    fn partition_of_unity(r in coord(), s in coord(), t in coord()) {
        let sum: f64 = shape_functions(r, s, t).iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_rows_sum_to_zero(r in coord(), s in coord(), t in coord()) {
        for row in shape_gradients(r, s, t) {
            prop_assert!(row.iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_match_central_differences(r in -0.99f64..0.99, s in -0.99f64..0.99, t in -0.99f64..0.99) {
        let eps = 1e-6;
        let dn = shape_gradients(r, s, t);
        let shifted = |d: usize, h: f64| {
            let mut p = [r, s, t];
            p[d] += h;
            shape_functions(p[0], p[1], p[2])
        };
        for d in 0..3 {
            let (plus, minus) = (shifted(d, eps), shifted(d, -eps));
            for a in 0..8 {
                let fd = (plus[a] - minus[a]) / (2.0 * eps);
                prop_assert!((fd - dn[d][a]).abs() < 1e-8, "d={d} a={a}: {fd} vs {}", dn[d][a]);
            }
        }
    }

    #[test]
    fn packing_round_trip(values in prop::array::uniform32(-10.0f64..10.0), tail in prop::array::uniform4(-10.0f64..10.0)) {
        let mut v = [0.0; PACKED_LEN];
        v[..32].copy_from_slice(&values);
        v[32..].copy_from_slice(&tail);
        let packed = PackedLowerKe { values: v };
        let full = packed.unpack();
        for i in 0..8 {
            for j in 0..8 {
                prop_assert_eq!(full[i][j], full[j][i]);
            }
        }
        prop_assert_eq!(PackedLowerKe::pack(&full), packed);
    }
}

#[test]
fn kronecker_delta_at_random_points_and_nodes() {
    use rand::Rng;
    let mut rng = common::rng(1);
    for _ in 0..100 {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = shape_functions(p[0], p[1], p[2]);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(n.iter().all(|&v| v >= 0.0));
    }
    for (a, &[r, s, t]) in NATURAL_COORDS.iter().enumerate() {
        let n = shape_functions(r, s, t);
        assert_eq!(n[a], 1.0);
        assert_eq!(n.iter().sum::<f64>(), 1.0);
    }
}

#[test]
fn first_gradient_at_centroid_is_minus_one_eighth() {
    // ∂/∂r of ⅛(1−r)(1−s)(1−t) at the origin
    assert_eq!(shape_gradients(0.0, 0.0, 0.0)[0][0], -1.0 / 8.0);
}

#[test]
fn two_point_rule_integrates_tensor_quadratics() {
    let rule = gauss_rule();
    for px in 0..=3u32 {
        for py in 0..=3u32 {
            for pz in 0..=3u32 {
                let exact: f64 = [px, py, pz]
                    .iter()
                    .map(|&p| if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) })
                    .product();
                let quad: f64 = rule
                    .points
                    .iter()
                    .zip(rule.weights)
                    .map(|(&[r, s, t], w)| w * r.powi(px as i32) * s.powi(py as i32) * t.powi(pz as i32))
                    .sum();
                assert!((quad - exact).abs() < 1e-15, "r^{px} s^{py} t^{pz}");
            }
        }
    }
}

#[test]
fn unit_cube_matches_analytic_and_quadrature_oracle() {
    let ke = local_stiffness(&ElementGeometry::cube(1.0), 1.0).unwrap();
    let oracle = common::stiffness_oracle(&ElementGeometry::cube(1.0).nodes, 1.0);
    for (p, &(i, j)) in PACKED_PAIRS.iter().enumerate() {
        let differing = (0..3).filter(|&d| NATURAL_COORDS[i][d] != NATURAL_COORDS[j][d]).count();
        let analytic = [1.0 / 3.0, 0.0, -1.0 / 12.0, -1.0 / 12.0][differing];
        assert!((ke.values[p] - analytic).abs() < 1e-14);
        assert!((oracle[i][j] - analytic).abs() < 1e-14);
    }
}

#[test]
fn stiffness_scales_linearly_with_edge_length() {
    let k1 = local_stiffness(&ElementGeometry::cube(1.0), 1.0).unwrap();
    for h in [0.5, 2.0] {
        let kh = local_stiffness(&ElementGeometry::cube(h), 1.0).unwrap();
        let scaled: Vec<f64> = k1.values.iter().map(|v| h * v).collect();
        assert!(common::max_relative_diff(&kh.values, &scaled) < 1e-12);
    }
}

#[test]
fn parallelepipeds_match_five_point_oracle() {
    let mut rng = common::rng(7);
    for _ in 0..50 {
        let nodes = common::random_parallelepiped(&mut rng);
        let ke = local_stiffness(&ElementGeometry::new(nodes), 1.7).unwrap();
        let oracle = PackedLowerKe::pack(&common::stiffness_oracle(&nodes, 1.7));
        assert!(common::max_relative_diff(&ke.values, &oracle.values) < 1e-12);
    }
}

#[test]
fn perturbed_elements_are_psd_with_constant_null_space() {
    let mut rng = common::rng(11);
    for _ in 0..100 {
        let nodes = common::perturbed_cube(&mut rng, 0.15);
        let ke = local_stiffness(&ElementGeometry::new(nodes), 1.0).unwrap();
        let full = ke.unpack();
        let max = ke.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for row in &full {
            assert!(row.iter().sum::<f64>().abs() <= 1e-12 * max);
        }
        let trace: f64 = (0..8).map(|i| full[i][i]).sum();
        let eig = common::symmetric_eigenvalues(full);
        assert!(eig.iter().all(|&l| l >= -1e-10 * trace), "{eig:?}");
    }
}

#[test]
fn jacobian_of_general_brick() {
    let geom = ElementGeometry::brick([1.0, 2.0, 3.0], 2.0, 4.0, 0.5);
    let jac = jacobian(&geom, &shape_gradients(0.2, -0.7, 0.4)).check(0).unwrap();
    assert!((jac.det - 2.0 * 4.0 * 0.5 / 8.0).abs() < 1e-15);
    for d in 0..3 {
        for x in 0..3 {
            let identity: f64 = (0..3).map(|k| jac.matrix[d][k] * jac.inverse[k][x]).sum();
            assert!((identity - if d == x { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
    }
}

#[test]
fn flat_element_is_degenerate() {
    let mut geom = ElementGeometry::cube(1.0);
    for n in &mut geom.nodes[4..] {
        n[2] = 0.0;
    }
    assert!(local_stiffness(&geom, 1.0).is_err());
}
