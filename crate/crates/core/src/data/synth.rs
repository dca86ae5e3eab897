use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, CORA_CLASSES};
use crate::error::{Error, Result};
use crate::graph::{build_graph, SparseGraph};

/// Deterministic graph families used as test oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// `0 − 1 − … − (n−1)`, `n ≥ 2`.
    Path { n: usize },
    /// Cycle on `n ≥ 3` vertices.
    Ring { n: usize },
    /// `rows × cols` lattice, vertex `(r, c)` numbered `r·cols + c`.
    Grid2d { rows: usize, cols: usize },
    /// Two `K_k` cliques (`k ≥ 2`) on `0..k` and `k..2k`, joined by the bridge
    /// `(k−1, k)`.
    TwoCliques { k: usize },
    /// Center 0 joined to `1..n`, `n ≥ 2`.
    Star { n: usize },
}

pub fn synth_graph(kind: SynthKind) -> Result<SparseGraph> {
    let too_small = |what: &str| Err(Error::InvalidArgument(format!("{what} ({kind:?})")));
    let (n, edges): (usize, Vec<(usize, usize)>) = match kind {
        SynthKind::Path { n } => {
            if n < 2 {
                return too_small("path needs n ≥ 2");
            }
            (n, (1..n).map(|v| (v - 1, v)).collect())
        }
        SynthKind::Ring { n } => {
            if n < 3 {
                return too_small("ring needs n ≥ 3");
            }
            (n, (0..n).map(|v| (v, (v + 1) % n)).collect())
        }
        SynthKind::Grid2d { rows, cols } => {
            if rows == 0 || cols == 0 || rows * cols < 2 {
                return too_small("grid needs at least 2 vertices");
            }
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        e.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        e.push((v, v + cols));
                    }
                }
            }
            (rows * cols, e)
        }
        SynthKind::TwoCliques { k } => {
            if k < 2 {
                return too_small("two_cliques needs k ≥ 2");
            }
            let mut e = Vec::new();
            for offset in [0, k] {
                for i in 0..k {
                    for j in i + 1..k {
                        e.push((offset + i, offset + j));
                    }
                }
            }
            e.push((k - 1, k));
            (2 * k, e)
        }
        SynthKind::Star { n } => {
            if n < 2 {
                return too_small("star needs n ≥ 2");
            }
            (n, (1..n).map(|v| (0, v)).collect())
        }
    };
    let weighted: Vec<_> = edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    build_graph(&weighted, n, false)
}

/// Uniform random recursive tree: vertex `v > 0` attaches to a uniformly
/// chosen earlier vertex.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Result<SparseGraph> {
    let edges: Vec<_> = (1..n).map(|v| (rng.random_range(0..v), v, 1.0)).collect();
    build_graph(&edges, n, false)
}

/// Random tree plus each remaining pair independently with probability
/// `extra_p`; always connected. Weights are uniform on `[0.5, 2)` when
/// `weighted`, otherwise 1.
pub fn random_connected_graph<R: Rng>(
    n: usize,
    extra_p: f64,
    weighted: bool,
    rng: &mut R,
) -> Result<SparseGraph> {
    let weight = |rng: &mut R| if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
    let mut edges = Vec::new();
    let mut parent = vec![usize::MAX; n];
    for v in 1..n {
        parent[v] = rng.random_range(0..v);
        edges.push((parent[v], v, weight(rng)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if parent[v] != u && rng.random::<f64>() < extra_p {
                edges.push((u, v, weight(rng)));
            }
        }
    }
    build_graph(&edges, n, false)
}

/// Stochastic block model with class-correlated sparse binary features, for
/// end-to-end training checks without external data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartition {
    pub n_classes: usize,
    pub per_class: usize,
    pub n_features: usize,
    /// Edge probability within a class.
    pub p_in: f64,
    /// Edge probability across classes.
    pub p_out: f64,
    /// Active features per vertex.
    pub active_features: usize,
    /// Probability an active feature comes from the vertex's class block
    /// rather than uniformly from all features.
    pub signal: f64,
}

impl Default for PlantedPartition {
    fn default() -> Self {
        Self {
            n_classes: 3,
            per_class: 40,
            n_features: 30,
            p_in: 0.08,
            p_out: 0.01,
            active_features: 4,
            signal: 0.5,
        }
    }
}

/// Generates a [`PlantedPartition`] dataset with shuffled vertex order.
/// Class names are the Cora labels when at most seven classes are asked for,
/// so the result can be written in the Cora file layout.
pub fn planted_partition(spec: PlantedPartition, seed: u64) -> Result<Dataset> {
    if spec.n_classes == 0 || spec.per_class == 0 || spec.n_features < spec.n_classes {
        return Err(Error::InvalidArgument(format!(
            "planted partition needs classes, vertices and ≥ 1 feature per class: {spec:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_classes * spec.per_class;
    let mut labels: Vec<usize> = (0..n).map(|i| i % spec.n_classes).collect();
    labels.shuffle(&mut rng);

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { spec.p_in } else { spec.p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    let graph = build_graph(&edges, n, false)?;

    let block = spec.n_features / spec.n_classes;
    let mut features = Array2::zeros((n, spec.n_features));
    for v in 0..n {
        for _ in 0..spec.active_features {
            let j = if rng.random::<f64>() < spec.signal {
                labels[v] * block + rng.random_range(0..block)
            } else {
                rng.random_range(0..spec.n_features)
            };
            features[[v, j]] = 1.0;
        }
    }
    let class_names = if spec.n_classes <= CORA_CLASSES.len() {
        CORA_CLASSES[..spec.n_classes].iter().map(|s| s.to_string()).collect()
    } else {
        (0..spec.n_classes).map(|c| format!("class{c}")).collect()
    };
    let mut ds = Dataset::new(graph, features, labels, class_names)?;
    ds.vertex_ids = (0..n).map(|v| format!("{}", 1000 + v)).collect();
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{connected_components, laplacian, LaplacianKind};
    use crate::spectral::eigendecompose;

    #[test]
    fn ring4_spectrum() {
        let g = synth_graph(SynthKind::Ring { n: 4 }).unwrap();
        let b = eigendecompose(&laplacian(&g, LaplacianKind::Combinatorial).unwrap(), None).unwrap();
        let expected = [0.0, 2.0, 2.0, 4.0];
        for (a, e) in b.eigenvalues().iter().zip(expected) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_2x2_is_ring_4() {
        let grid = synth_graph(SynthKind::Grid2d { rows: 2, cols: 2 }).unwrap();
        let ring = synth_graph(SynthKind::Ring { n: 4 }).unwrap();
        // Relabel the grid's cycle 0-1-3-2 onto the ring's 0-1-2-3.
        assert_eq!(grid.permute(&[0, 1, 3, 2]).unwrap(), ring);
    }

    #[test]
    fn two_cliques_counts() {
        let g = synth_graph(SynthKind::TwoCliques { k: 3 }).unwrap();
        assert_eq!(g.n_vertices(), 6);
        assert_eq!(g.n_edges(), 7);
        let star = synth_graph(SynthKind::Star { n: 5 }).unwrap();
        assert_eq!(star.degree_vector()[0], 4.0);
        assert_eq!(synth_graph(SynthKind::Path { n: 4 }).unwrap().n_edges(), 3);
    }

    #[test]
    fn size_minimums() {
        for kind in [
            SynthKind::Path { n: 1 },
            SynthKind::Ring { n: 2 },
            SynthKind::Grid2d { rows: 1, cols: 1 },
            SynthKind::TwoCliques { k: 1 },
            SynthKind::Star { n: 1 },
        ] {
            assert!(synth_graph(kind).is_err(), "{kind:?}");
        }
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [1, 2, 10, 30] {
            let g = random_connected_graph(n, 0.1, true, &mut rng).unwrap();
            assert_eq!(connected_components(&g).0, 1);
            let t = random_tree(n, &mut rng).unwrap();
            assert_eq!(t.n_edges(), n - 1);
            assert_eq!(connected_components(&t).0, 1);
        }
    }

    #[test]
    fn planted_partition_shape() {
        let ds = planted_partition(PlantedPartition::default(), 1).unwrap();
        assert_eq!(ds.n_vertices(), 120);
        assert_eq!(ds.n_classes(), 3);
        assert_eq!(ds.class_names[0], "Case_Based");
        for c in 0..3 {
            assert_eq!(ds.labels.iter().filter(|&&l| l == c).count(), 40);
        }
        assert_eq!(planted_partition(PlantedPartition::default(), 1).unwrap(), ds);
    }
}
