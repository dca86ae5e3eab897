//! Datasets for node classification: the raw two-file Cora distribution,
//! deterministic train/validation/test splits, feature normalization, a
//! binary dataset cache, and synthetic graphs for oracle tests.

mod cora;
mod synth;

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use cora::{load_cora, load_labeled_graph, write_cora_format, CORA_CLASSES};
pub use synth::{planted_partition, random_connected_graph, random_tree, synth_graph, PlantedPartition, SynthKind};

use crate::checkpoint::Checkpoint;
use crate::error::{check_dim, Error, Result};
use crate::graph::{build_graph, SparseGraph};
use crate::GraphSignal;

/// Disjoint vertex index sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Counters for records skipped while reading citation files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Citations naming a paper absent from the content file.
    pub unknown_citations: usize,
    pub self_citations: usize,
    /// Repeated pairs, in either direction, collapsed to one unit edge.
    pub duplicate_citations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: SparseGraph,
    pub features: GraphSignal,
    pub labels: Vec<usize>,
    pub split: Split,
    pub class_names: Vec<String>,
    /// External identifier of each vertex, in vertex order.
    pub vertex_ids: Vec<String>,
    pub ingest: IngestReport,
}

impl Dataset {
    /// Checks shapes and label ranges; the split starts empty.
    pub fn new(
        graph: SparseGraph,
        features: GraphSignal,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = graph.n_vertices();
        check_dim("feature rows", n, features.nrows())?;
        check_dim("label count", n, labels.len())?;
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside the {} known classes",
                class_names.len()
            )));
        }
        Ok(Self {
            graph,
            features,
            labels,
            split: Split::default(),
            class_names,
            vertex_ids: (0..n).map(|i| i.to_string()).collect(),
            ingest: IngestReport::default(),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Replaces the split after checking indices and disjointness.
    pub fn with_split(mut self, split: Split) -> Result<Self> {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        for &i in split.train.iter().chain(&split.val).chain(&split.test) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "vertex {i} appears in more than one split set"
                )));
            }
            seen[i] = true;
        }
        self.split = split;
        Ok(self)
    }
}

/// Sizes for [`split_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub per_class: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSpec {
    /// 20 labeled vertices per class, 500 validation, 1000 test.
    fn default() -> Self {
        Self {
            per_class: 20,
            val: 500,
            test: 1000,
        }
    }
}

/// The standard semi-supervised protocol with [`SplitSpec::default`] sizes.
pub fn planetoid_split(ds: Dataset) -> Result<Dataset> {
    split_with(ds, SplitSpec::default())
}

/// Training set: the first `per_class` vertices of every class in vertex
/// order. Validation: the first `val` remaining vertices. Test: the last
/// `test` remaining vertices.
pub fn split_with(ds: Dataset, spec: SplitSpec) -> Result<Dataset> {
    let n = ds.n_vertices();
    let mut in_train = vec![false; n];
    for (c, name) in ds.class_names.iter().enumerate() {
        let members: Vec<usize> = (0..n).filter(|&v| ds.labels[v] == c).take(spec.per_class).collect();
        if members.len() < spec.per_class {
            return Err(Error::ClassTooSmall {
                class: name.clone(),
                found: members.len(),
                required: spec.per_class,
            });
        }
        for v in members {
            in_train[v] = true;
        }
    }
    let train: Vec<usize> = (0..n).filter(|&v| in_train[v]).collect();
    let rest: Vec<usize> = (0..n).filter(|&v| !in_train[v]).collect();
    if rest.len() < spec.val + spec.test {
        return Err(Error::InvalidArgument(format!(
            "{} vertices remain after the training split; {} validation + {} test requested",
            rest.len(),
            spec.val,
            spec.test
        )));
    }
    let split = Split {
        train,
        val: rest[..spec.val].to_vec(),
        test: rest[rest.len() - spec.test..].to_vec(),
    };
    ds.with_split(split)
}

/// [`split_with`] followed by [`row_normalize_features`]: the preprocessing
/// applied before training.
pub fn prepare(ds: Dataset, spec: SplitSpec) -> Result<Dataset> {
    let mut ds = split_with(ds, spec)?;
    ds.features = row_normalize_features(ds.features.view());
    Ok(ds)
}

/// Divides each nonzero row by its L1 norm; zero rows stay zero.
pub fn row_normalize_features(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        let norm: f64 = row.iter().map(|v| v.abs()).sum();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

const CACHE_FORMAT: &str = "spectral-gnn-dataset";

fn index_column(idx: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((idx.len(), 1), |(i, _)| idx[i] as f64)
}

fn column_indices(ck: &Checkpoint, name: &str) -> Result<Vec<usize>> {
    let t = ck.require(name)?;
    t.iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 {
                Ok(v as usize)
            } else {
                Err(Error::Checkpoint(format!("tensor {name:?} holds non-index value {v}")))
            }
        })
        .collect()
}

/// Writes the dataset (graph, features, labels, split, names) in the
/// checkpoint container format.
pub fn save_dataset_cache(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut ck = Checkpoint::new(json!({
        "format": CACHE_FORMAT,
        "version": 1,
        "n_vertices": ds.n_vertices(),
        "class_names": ds.class_names,
        "vertex_ids": ds.vertex_ids,
        "ingest": ds.ingest,
    }));
    let edges: Vec<(usize, usize, f64)> = ds.graph.edges().collect();
    let edge_tensor = Array2::from_shape_fn((edges.len(), 3), |(e, c)| match c {
        0 => edges[e].0 as f64,
        1 => edges[e].1 as f64,
        _ => edges[e].2,
    });
    ck.insert("edges", edge_tensor)?;
    ck.insert("features", ds.features.clone())?;
    ck.insert("labels", index_column(&ds.labels))?;
    ck.insert("train", index_column(&ds.split.train))?;
    ck.insert("val", index_column(&ds.split.val))?;
    ck.insert("test", index_column(&ds.split.test))?;
    ck.save(path)
}

pub fn load_dataset_cache(path: impl AsRef<Path>) -> Result<Dataset> {
    let ck = Checkpoint::load(path)?;
    if ck.meta.get("format").and_then(|v| v.as_str()) != Some(CACHE_FORMAT) {
        return Err(Error::Checkpoint("not a dataset cache".into()));
    }
    let field = |key: &str| {
        ck.meta
            .get(key)
            .cloned()
            .ok_or_else(|| Error::Checkpoint(format!("dataset header is missing {key:?}")))
    };
    let n: usize = serde_json::from_value(field("n_vertices")?)?;
    let class_names: Vec<String> = serde_json::from_value(field("class_names")?)?;
    let vertex_ids: Vec<String> = serde_json::from_value(field("vertex_ids")?)?;
    let ingest: IngestReport = serde_json::from_value(field("ingest")?)?;
    let edge_tensor = ck.require("edges")?;
    if edge_tensor.ncols() != 3 && edge_tensor.nrows() > 0 {
        return Err(Error::Checkpoint("edge tensor must have 3 columns".into()));
    }
    let edges: Vec<(usize, usize, f64)> = edge_tensor
        .rows()
        .into_iter()
        .map(|r| (r[0] as usize, r[1] as usize, r[2]))
        .collect();
    let graph = build_graph(&edges, n, false)?;
    let mut ds = Dataset::new(
        graph,
        ck.require("features")?.clone(),
        column_indices(&ck, "labels")?,
        class_names,
    )?;
    ds.vertex_ids = vertex_ids;
    ds.ingest = ingest;
    ds.with_split(Split {
        train: column_indices(&ck, "train")?,
        val: column_indices(&ck, "val")?,
        test: column_indices(&ck, "test")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(labels: Vec<usize>, classes: usize) -> Dataset {
        let n = labels.len();
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
        let graph = build_graph(&edges, n, false).unwrap();
        let names = (0..classes).map(|c| format!("c{c}")).collect();
        Dataset::new(graph, Array2::zeros((n, 2)), labels, names).unwrap()
    }

    #[test]
    fn row_normalization() {
        let x = array![[1.0, 1.0, 2.0], [0.0, 0.0, 0.0], [0.0, 3.0, 0.0]];
        let y = row_normalize_features(x.view());
        assert_eq!(y, array![[0.25, 0.25, 0.5], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        for row in y.rows() {
            let s: f64 = row.sum();
            assert!(s == 0.0 || (s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn split_takes_first_per_class_then_val_then_tail_test() {
        let labels = vec![0, 1, 0, 1, 0, 1, 1, 0, 0, 1];
        let spec = SplitSpec {
            per_class: 2,
            val: 3,
            test: 2,
        };
        let ds = split_with(toy(labels.clone(), 2), spec).unwrap();
        assert_eq!(ds.split.train, vec![0, 1, 2, 3]);
        assert_eq!(ds.split.val, vec![4, 5, 6]);
        assert_eq!(ds.split.test, vec![8, 9]);
        let again = split_with(toy(labels, 2), spec).unwrap();
        assert_eq!(again.split, ds.split);
    }

    #[test]
    fn split_errors() {
        let spec = SplitSpec {
            per_class: 3,
            val: 1,
            test: 1,
        };
        assert!(matches!(
            split_with(toy(vec![0, 0, 0, 1, 1, 0, 0], 2), spec),
            Err(Error::ClassTooSmall { found: 2, .. })
        ));
        assert!(split_with(toy(vec![0, 0, 0, 1, 1, 1], 2), spec).is_err());
        let ds = toy(vec![0, 1, 0], 2);
        assert!(ds
            .clone()
            .with_split(Split {
                train: vec![0],
                val: vec![0],
                test: vec![],
            })
            .is_err());
        assert!(ds
            .with_split(Split {
                train: vec![3],
                val: vec![],
                test: vec![],
            })
            .is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.bin");
        let mut ds = split_with(
            toy(vec![0, 1, 0, 1, 1, 0], 2),
            SplitSpec {
                per_class: 1,
                val: 2,
                test: 2,
            },
        )
        .unwrap();
        ds.features = Array2::from_shape_fn((6, 2), |(i, j)| (i as f64 + 0.1) / (j as f64 + 3.0));
        ds.ingest.unknown_citations = 4;
        save_dataset_cache(&ds, &path).unwrap();
        assert_eq!(load_dataset_cache(&path).unwrap(), ds);
    }
}
