//! Deterministic fixtures shared by the benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_gnn::data::{planted_partition, prepare, random_connected_graph, Dataset, PlantedPartition, SplitSpec};
use spectral_gnn::SparseGraph;

/// Connected graph with about `avg_degree` neighbors per vertex.
pub fn graph(n: usize, avg_degree: f64, seed: u64) -> SparseGraph {
    let p = ((avg_degree - 2.0).max(0.0) / n as f64).min(1.0);
    random_connected_graph(n, p, false, &mut ChaCha8Rng::seed_from_u64(seed)).expect("valid graph size")
}

pub fn signal(n: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((n, cols), || rng.random_range(-1.0..1.0))
}

/// Citation-like corpus shaped like Cora: 7 classes, sparse binary features
/// and the standard 140 / 500 / 1000 split.
pub fn citation_dataset(per_class: usize, n_features: usize) -> Dataset {
    let spec = PlantedPartition {
        n_classes: 7,
        per_class,
        n_features,
        p_in: 2.5 / per_class as f64,
        p_out: 1.5 / (6 * per_class) as f64,
        active_features: 18,
        signal: 0.4,
    };
    prepare(planted_partition(spec, 7).expect("valid spec"), SplitSpec::default()).expect("corpus fits the split")
}
