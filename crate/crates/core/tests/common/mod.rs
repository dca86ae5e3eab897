#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_gnn::data::{random_connected_graph, random_tree};
use spectral_gnn::SparseGraph;

/// Connected graph on `min_n..=max_n` vertices with random extra edges and
/// optional random weights.
pub fn connected_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = SparseGraph> {
    (min_n..=max_n, 0.0..0.4f64, any::<bool>(), any::<u64>()).prop_map(|(n, p, weighted, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_connected_graph(n, p, weighted, &mut rng).unwrap()
    })
}

pub fn tree(min_n: usize, max_n: usize) -> impl Strategy<Value = SparseGraph> {
    (min_n..=max_n, any::<u64>()).prop_map(|(n, seed)| random_tree(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
}

/// Graph together with a signal of matching length.
pub fn graph_and_signal(min_n: usize, max_n: usize) -> impl Strategy<Value = (SparseGraph, Vec<f64>)> {
    connected_graph(min_n, max_n).prop_flat_map(|g| {
        let n = g.n_vertices();
        (Just(g), proptest::collection::vec(-10.0..10.0f64, n))
    })
}

pub fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
