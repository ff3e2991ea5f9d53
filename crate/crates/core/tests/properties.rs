mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use ctqw_core::dynamics::{Propagator, TimeGrid};
use ctqw_core::graph::{chemical_distances, GraphFamily};
use ctqw_core::observables::{lta_matrix, return_prob_lower_bound, return_prob_quantum};
use ctqw_core::spectral::{cluster_degeneracies, decompose, DEFAULT_DEGENERACY_TOLERANCE};

fn family() -> impl Strategy<Value = GraphFamily> {
    prop_oneof![
        (1u32..=4).prop_map(|g| GraphFamily::DualSierpinski { g }),
        (3usize..=4, 1u32..=3).prop_map(|(z, shells)| GraphFamily::CayleyTree { z, shells }),
        (1u32..=2, 3usize..=7).prop_map(|(d, side)| GraphFamily::HypercubicTorus { d, side }),
        (3usize..=30).prop_map(|n| GraphFamily::Ring { n }),
        (2usize..=30).prop_map(|n| GraphFamily::Chain { n }),
        (2usize..=12).prop_map(|n| GraphFamily::Complete { n }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_structure(f in family()) {
        let graph = f.build().unwrap();
        let l = graph.laplacian();
        prop_assert_eq!(graph.node_count(), f.expected_size().unwrap());
        for k in 0..graph.node_count() {
            prop_assert!(l.row(k).sum().abs() < 1e-15);
            prop_assert_eq!(l[(k, k)] as usize, graph.degree(k));
        }
        prop_assert_eq!(&l, &l.transpose());
        let spec = decompose(&l).unwrap();
        let eigs = spec.eigenvalues();
        prop_assert!(eigs[0].abs() < 1e-10);
        prop_assert!(eigs[1] > 1e-10, "connected graphs have a simple zero eigenvalue");
        prop_assert!((eigs.iter().sum::<f64>() - 2.0 * graph.edge_count() as f64).abs() < 1e-8);
        prop_assert!(spec.orthonormality_error() < 1e-10);
        prop_assert!((spec.reconstruct() - &l).amax() < 1e-10);
    }

    #[test]
    fn distances_form_a_metric(f in family()) {
        let graph = f.build().unwrap();
        let d = chemical_distances(&graph).unwrap();
        let n = graph.node_count();
        for a in 0..n {
            prop_assert_eq!(d.get(a, a), 0);
            for &b in graph.neighbors(a) {
                prop_assert_eq!(d.get(a, b), 1);
            }
            for b in 0..n {
                prop_assert_eq!(d.get(a, b), d.get(b, a));
                for c in 0..n.min(12) {
                    prop_assert!(d.get(a, b) <= d.get(a, c) + d.get(c, b));
                }
            }
        }
    }

    #[test]
    fn walks_conserve_probability(f in family(), t in 0.0f64..20.0, gamma in 0.2f64..2.0) {
        let graph = f.build().unwrap();
        let spec = decompose(&graph.laplacian()).unwrap();
        let prop = Propagator::new(&spec, gamma);
        let p = prop.classical(t);
        let pi = prop.quantum(t).probabilities();
        for j in 0..graph.node_count() {
            prop_assert!((p.column(j).sum() - 1.0).abs() < 1e-10);
            prop_assert!((pi.column(j).sum() - 1.0).abs() < 1e-10);
        }
        prop_assert!(p.iter().all(|&v| v > -1e-12));
        prop_assert!((&pi - pi.transpose()).amax() < 1e-12);
        prop_assert!((&p - p.transpose()).amax() < 1e-12);
    }

    #[test]
    fn quantum_return_above_bound(f in family()) {
        let graph = f.build().unwrap();
        let spec = decompose(&graph.laplacian()).unwrap();
        let grid = TimeGrid::uniform(20.0, 0.5, 1.0).unwrap();
        let pi = return_prob_quantum(&spec, &grid);
        let lb = return_prob_lower_bound(&spec.degeneracy_classes(), &grid);
        for (a, b) in pi.values().iter().zip(lb.values()) {
            prop_assert!(*a >= *b - 1e-10);
        }
    }

    #[test]
    fn lta_columns_sum_to_one(f in family()) {
        let graph = f.build().unwrap();
        let spec = decompose(&graph.laplacian()).unwrap();
        let chi = lta_matrix(&spec, &spec.degeneracy_classes()).unwrap();
        for col in chi.column_iter() {
            prop_assert!((col.sum() - 1.0).abs() < 1e-10);
        }
        prop_assert!((&chi - chi.transpose()).amax() < 1e-12);
    }

    #[test]
    fn propagators_match_matrix_exponential(f in family(), t in 0.0f64..5.0) {
        let graph = f.build().unwrap();
        prop_assume!(graph.node_count() <= 10);
        let l = graph.laplacian();
        let spec = decompose(&l).unwrap();
        let prop = Propagator::new(&spec, 1.0);
        let p = common::expm(&(-&l * t));
        prop_assert!((prop.classical(t) - p).amax() < 1e-8);
        let u = common::expm_unitary(&l, t);
        let q = prop.quantum(t);
        let n = graph.node_count();
        for k in 0..n {
            for j in 0..n {
                prop_assert!((q.get(k, j) - u[(k, j)]).norm() < 1e-8);
            }
        }
    }
}

/// Torus multiplicities agree with a multiset count of the separable
/// eigenvalues `Σ_i (2 - 2 cos(2π k_i / L))`.
#[test]
fn torus_multiplicities_match_ring_products() {
    for (d, side) in [(2u32, 4usize), (2, 5), (2, 6), (3, 4), (1, 7)] {
        let graph = GraphFamily::HypercubicTorus { d, side }.build().unwrap();
        let spec = decompose(&graph.laplacian()).unwrap();
        let classes = spec.degeneracy_classes();
        let ring: Vec<f64> = (0..side)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / side as f64).cos())
            .collect();
        let mut values = Vec::new();
        for idx in 0..side.pow(d) {
            let mut rest = idx;
            let mut sum = 0.0;
            for _ in 0..d {
                sum += ring[rest % side];
                rest /= side;
            }
            values.push(sum);
        }
        values.sort_by(f64::total_cmp);
        let brute = cluster_degeneracies(&values, DEFAULT_DEGENERACY_TOLERANCE).unwrap();
        assert_eq!(classes.multiplicities(), brute.multiplicities(), "d={d} L={side}");
        for (a, b) in classes.values().iter().zip(brute.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn degree_histograms() {
    let hist = |f: GraphFamily| -> BTreeMap<usize, usize> { f.build().unwrap().degree_histogram() };
    assert_eq!(hist(GraphFamily::DualSierpinski { g: 3 }), BTreeMap::from([(2, 3), (3, 24)]));
    assert_eq!(hist(GraphFamily::CayleyTree { z: 3, shells: 6 }), BTreeMap::from([(1, 96), (3, 94)]));
    assert_eq!(hist(GraphFamily::HypercubicTorus { d: 2, side: 16 }), BTreeMap::from([(4, 256)]));
}
