mod common;

use common::{connected_graph, max_abs_diff};
use ndarray::Array2;
use proptest::prelude::*;
use spectral_gnn::data::{synth_graph, SynthKind};
use spectral_gnn::graph::build_graph;
use spectral_gnn::spectral::{conductance, gft, igft, laplacian_basis, spectral_bipartition, Partition};
use spectral_gnn::{LaplacianKind, SparseGraph};

/// Direct `cut / min(vol)` from the edge list.
fn brute_conductance(g: &SparseGraph, side: &[bool]) -> f64 {
    let mut cut = 0.0;
    let mut vol = [0.0, 0.0];
    for (u, v, w) in g.edges() {
        if side[u] != side[v] {
            cut += w;
        }
        vol[usize::from(side[u])] += w;
        vol[usize::from(side[v])] += w;
    }
    cut / vol[0].min(vol[1])
}

fn signal_strategy() -> impl Strategy<Value = (SparseGraph, Array2<f64>, LaplacianKind)> {
    connected_graph(2, 50).prop_flat_map(|g| {
        let n = g.n_vertices();
        (
            Just(g),
            proptest::collection::vec(-5.0..5.0f64, n * 2).prop_map(move |v| Array2::from_shape_vec((n, 2), v).unwrap()),
            prop_oneof![
                Just(LaplacianKind::Combinatorial),
                Just(LaplacianKind::SymmetricNormalized),
                Just(LaplacianKind::Renormalized)
            ],
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gft_round_trip_and_parseval((g, x, kind) in signal_strategy()) {
        let basis = laplacian_basis(&g, kind, None).unwrap();
        let xhat = gft(&basis, x.view()).unwrap();
        let back = igft(&basis, xhat.view()).unwrap();
        prop_assert!(max_abs_diff(&back, &x) < 1e-10);
        for c in 0..x.ncols() {
            let e_x: f64 = x.column(c).iter().map(|v| v * v).sum();
            let e_hat: f64 = xhat.column(c).iter().map(|v| v * v).sum();
            prop_assert!((e_x - e_hat).abs() < 1e-10 * e_x.max(1.0));
        }
        let u = basis.eigenvectors();
        let gram = u.t().dot(u);
        prop_assert!(max_abs_diff(&gram, &Array2::eye(g.n_vertices())) < 1e-10);
    }

    #[test]
    fn conductance_matches_brute_force(g in connected_graph(2, 8), mask in any::<u8>()) {
        let n = g.n_vertices();
        let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
        prop_assume!(side.iter().any(|&s| s) && side.iter().any(|&s| !s));
        let part = Partition::new(side.iter().map(|&s| usize::from(s)).collect());
        let phi = conductance(&g, &part, 0, 1).unwrap();
        prop_assert!((phi - brute_conductance(&g, &side)).abs() < 1e-12);
    }
}

#[test]
fn conductance_exhaustive_small_graphs() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for trial in 0..40 {
        let n = 2 + trial % 7;
        let g = spectral_gnn::data::random_connected_graph(n, 0.3, trial % 2 == 0, &mut rng).unwrap();
        for mask in 1..(1u32 << n) - 1 {
            let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
            let part = Partition::new(side.iter().map(|&s| usize::from(s)).collect());
            let phi = conductance(&g, &part, 0, 1).unwrap();
            assert!((phi - brute_conductance(&g, &side)).abs() < 1e-12);
        }
    }
}

#[test]
fn two_clique_bridges_split_exactly() {
    for k in 3..=8 {
        let g = synth_graph(SynthKind::TwoCliques { k }).unwrap();
        let part = spectral_bipartition(&g).unwrap();
        let labels = part.labels();
        assert!(labels[..k].iter().all(|&l| l == labels[0]), "k = {k}: {labels:?}");
        assert!(labels[k..].iter().all(|&l| l != labels[0]), "k = {k}: {labels:?}");
        let phi = conductance(&g, &part, 0, 1).unwrap();
        let expected = 1.0 / (k * (k - 1) + 1) as f64;
        assert!((phi - expected).abs() < 1e-12, "k = {k}: {phi}");
    }
    let g = synth_graph(SynthKind::TwoCliques { k: 3 }).unwrap();
    let part = spectral_bipartition(&g).unwrap();
    assert!((conductance(&g, &part, 0, 1).unwrap() - 1.0 / 7.0).abs() < 1e-15);
}

#[test]
fn path_fiedler_is_monotone() {
    let g = build_graph(&(1..10).map(|v| (v - 1, v, 1.0)).collect::<Vec<_>>(), 10, false).unwrap();
    let f = spectral_gnn::spectral::fiedler_vector(&g).unwrap();
    let increasing = f.windows(2).into_iter().all(|w| w[0] < w[1]);
    let decreasing = f.windows(2).into_iter().all(|w| w[0] > w[1]);
    assert!(increasing || decreasing, "{f}");
}
