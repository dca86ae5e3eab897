//! Training loops, repeated seeded runs with 95% confidence intervals, and
//! result export.
//!
//! GCN trains full-batch: one optimizer step per epoch on the training-mask
//! loss. SIGN trains on minibatches of a per-epoch shuffle of the training
//! vertices, keeping the last partial batch. After every epoch both models
//! are evaluated on all vertices with dropout off. There is no early
//! stopping. Recorded wall time covers the optimization steps only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{AggregatorOptions, CsrMatrix};
use crate::models::{
    gcn_backward, sign_backward, sign_forward, sign_infer, sign_precompute, sign_precompute_with, GcnModel,
    SignModel, SignPrecomputed,
};
use crate::nn::{accuracy, softmax_xent_masked, stream_rng, Stream, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gcn,
    Sign,
}

impl ModelKind {
    pub fn default_config(self) -> TrainConfig {
        match self {
            ModelKind::Gcn => TrainConfig::gcn_default(),
            ModelKind::Sign => TrainConfig::sign_default(),
        }
    }
}

/// Metrics after one epoch. `epoch` counts from 1; `wall_time_s` is the
/// cumulative optimization time so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub test_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Test accuracy after the final epoch.
    pub test_acc: f64,
    pub train_time_s: f64,
    pub trace: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub seed: u64,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: ModelKind,
    pub config: TrainConfig,
    pub base_seed: u64,
    pub n_runs: usize,
    pub per_seed: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    pub mean_acc: f64,
    pub ci95_acc: f64,
    pub mean_time_s: f64,
    pub ci95_time_s: f64,
    /// False when fewer than two runs succeeded; the intervals are then 0.
    pub ci_defined: bool,
}

/// Mean and `1.96·s/√n` with the sample standard deviation. With one value
/// the interval is undefined and reported as 0 with `false`.
pub fn mean_ci95(values: &[f64]) -> (f64, f64, bool) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0, false);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0, false);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * var.sqrt() / (n as f64).sqrt(), true)
}

fn evaluate(
    logits: ArrayView2<'_, f64>,
    ds: &Dataset,
    epoch: usize,
    elapsed: Duration,
) -> Result<EpochRecord> {
    let split = |idx: &[usize]| -> Result<(f64, f64)> {
        if idx.is_empty() {
            return Ok((0.0, 0.0));
        }
        let (loss, _) = softmax_xent_masked(logits, &ds.labels, idx)?;
        Ok((loss, accuracy(logits, &ds.labels, idx)))
    };
    let (train_loss, train_acc) = split(&ds.split.train)?;
    let (val_loss, val_acc) = split(&ds.split.val)?;
    let (test_loss, test_acc) = split(&ds.split.test)?;
    if !train_loss.is_finite() {
        return Err(Error::NonFinite {
            epoch,
            loss: train_loss,
        });
    }
    Ok(EpochRecord {
        epoch,
        train_loss,
        val_loss,
        test_loss,
        train_acc,
        val_acc,
        test_acc,
        wall_time_s: elapsed.as_secs_f64(),
    })
}

fn check_inputs(ds: &Dataset, cfg: &TrainConfig) -> Result<()> {
    cfg.validate()?;
    if ds.split.train.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

/// Full-batch GCN training with widths `[F_0, hidden × (layers − 1), C]`
/// over the renormalized propagation matrix.
pub fn train_gcn(ds: &Dataset, cfg: &TrainConfig) -> Result<(GcnModel, Vec<EpochRecord>)> {
    check_inputs(ds, cfg)?;
    let mut dims = vec![ds.n_features()];
    dims.extend(std::iter::repeat_n(cfg.hidden_units, cfg.layers - 1));
    dims.push(ds.n_classes());
    let mut model = GcnModel::for_graph(&ds.graph, &dims, cfg.dropout, cfg.residual, cfg.seed)?;
    let mut dropout_rng = stream_rng(cfg.seed, Stream::Dropout);
    let x = CsrMatrix::from_dense(ds.features.view());
    let mut elapsed = Duration::ZERO;
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let (logits, cache) = model.forward_sparse(&x, &mut dropout_rng, true)?;
        let (loss, dlogits) = softmax_xent_masked(logits.view(), &ds.labels, &ds.split.train)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite { epoch, loss });
        }
        let grads = gcn_backward(&model, &cache, dlogits.view())?;
        model.apply_gradients(
            &grads,
            cfg.optimizer,
            cfg.learning_rate,
            cfg.weight_decay,
            cfg.decay_first_layer_only,
        )?;
        elapsed += start.elapsed();

        let (eval, _) = model.forward_sparse(&x, &mut dropout_rng, false)?;
        let record = evaluate(eval.view(), ds, epoch, elapsed)?;
        log::debug!("gcn seed {} epoch {epoch}: {record:?}", cfg.seed);
        trace.push(record);
    }
    Ok((model, trace))
}

/// Aggregations used by [`train_sign`]: matrix-free walk-count aggregators,
/// or explicit binarized ones when configured.
pub fn sign_inputs(ds: &Dataset, cfg: &TrainConfig) -> Result<SignPrecomputed> {
    if cfg.binarize_aggregators {
        let opts = AggregatorOptions {
            binarize: true,
            nnz_budget: None,
        };
        sign_precompute_with(&ds.graph, ds.features.view(), cfg.aggregators, opts)
    } else {
        sign_precompute(&ds.graph, ds.features.view(), cfg.aggregators)
    }
}

/// Minibatch SIGN training; one optimizer step per batch.
pub fn train_sign(ds: &Dataset, cfg: &TrainConfig) -> Result<(SignModel, Vec<EpochRecord>)> {
    check_inputs(ds, cfg)?;
    let pre = sign_inputs(ds, cfg)?;
    train_sign_precomputed(ds, &pre, cfg)
}

/// [`train_sign`] with aggregations computed by the caller, so repeated
/// runs can share them.
pub fn train_sign_precomputed(
    ds: &Dataset,
    pre: &SignPrecomputed,
    cfg: &TrainConfig,
) -> Result<(SignModel, Vec<EpochRecord>)> {
    check_inputs(ds, cfg)?;
    let mut model = SignModel::new(
        ds.n_features(),
        cfg.hidden_units,
        ds.n_classes(),
        cfg.aggregators,
        cfg.dropout,
        cfg.seed,
    )?;
    let mut dropout_rng = stream_rng(cfg.seed, Stream::Dropout);
    let mut shuffle_rng = stream_rng(cfg.seed, Stream::Shuffle);
    let batch_size = cfg.batch_size.unwrap_or(ds.split.train.len());
    let all: Vec<usize> = (0..ds.n_vertices()).collect();
    let mut order = ds.split.train.clone();
    let mut elapsed = Duration::ZERO;
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(batch_size) {
            let (logits, cache) = sign_forward(&model, pre, batch, &mut dropout_rng, true)?;
            let labels: Vec<usize> = batch.iter().map(|&v| ds.labels[v]).collect();
            let rows: Vec<usize> = (0..batch.len()).collect();
            let (loss, dlogits) = softmax_xent_masked(logits.view(), &labels, &rows)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite { epoch, loss });
            }
            let grads = sign_backward(&model, &cache, dlogits.view())?;
            model.apply_gradients(&grads, cfg.optimizer, cfg.learning_rate, cfg.weight_decay)?;
        }
        elapsed += start.elapsed();

        let eval = sign_infer(&model, pre, &all)?;
        let record = evaluate(eval.view(), ds, epoch, elapsed)?;
        log::debug!("sign seed {} epoch {epoch}: {record:?}", cfg.seed);
        trace.push(record);
    }
    Ok((model, trace))
}

fn run_record(seed: u64, trace: Vec<EpochRecord>) -> RunRecord {
    let last = trace.last().expect("epochs ≥ 1");
    RunRecord {
        seed,
        test_acc: last.test_acc,
        train_time_s: last.wall_time_s,
        trace,
    }
}

/// Trains `n_runs` models with seeds `base_seed..base_seed + n_runs` in
/// parallel and aggregates final test accuracy and training time. Failed
/// runs are logged and excluded; at least 80% must succeed.
pub fn repeat_runs(
    kind: ModelKind,
    ds: &Dataset,
    cfg: &TrainConfig,
    n_runs: usize,
    base_seed: u64,
) -> Result<RunSummary> {
    if n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be ≥ 1".into()));
    }
    check_inputs(ds, cfg)?;
    // SIGN aggregations do not depend on the seed.
    let pre = match kind {
        ModelKind::Sign => Some(sign_inputs(ds, cfg)?),
        ModelKind::Gcn => None,
    };
    let seeds: Vec<u64> = (0..n_runs as u64).map(|i| base_seed + i).collect();
    let results: Vec<(u64, Result<Vec<EpochRecord>>)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut run_cfg = cfg.clone();
            run_cfg.seed = seed;
            let trace = match &pre {
                Some(pre) => train_sign_precomputed(ds, pre, &run_cfg).map(|(_, t)| t),
                None => train_gcn(ds, &run_cfg).map(|(_, t)| t),
            };
            (seed, trace)
        })
        .collect();

    let mut per_seed = Vec::new();
    let mut failures = Vec::new();
    for (seed, result) in results {
        match result {
            Ok(trace) => per_seed.push(run_record(seed, trace)),
            Err(e) => {
                log::warn!("run with seed {seed} failed: {e}");
                failures.push(RunFailure {
                    seed,
                    kind: e.kind().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    if per_seed.len() * 5 < n_runs * 4 {
        return Err(Error::TooManyFailures {
            succeeded: per_seed.len(),
            total: n_runs,
        });
    }
    let accs: Vec<f64> = per_seed.iter().map(|r| r.test_acc).collect();
    let times: Vec<f64> = per_seed.iter().map(|r| r.train_time_s).collect();
    let (mean_acc, ci95_acc, ci_defined) = mean_ci95(&accs);
    let (mean_time_s, ci95_time_s, _) = mean_ci95(&times);
    Ok(RunSummary {
        model: kind,
        config: cfg.clone(),
        base_seed,
        n_runs,
        per_seed,
        failures,
        mean_acc,
        ci95_acc,
        mean_time_s,
        ci95_time_s,
        ci_defined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    Csv,
}

pub const CSV_HEADER: &str = "seed,epoch,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc,wall_time_s";

/// JSON: the whole summary. CSV: one row per (seed, epoch) with every
/// [`EpochRecord`] field, floats to 17 significant digits.
pub fn write_results(summary: &RunSummary, mut w: impl Write, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, summary)?;
            writeln!(w)?;
        }
        ExportFormat::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            for run in &summary.per_seed {
                for r in &run.trace {
                    writeln!(
                        w,
                        "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        run.seed,
                        r.epoch,
                        r.train_loss,
                        r.val_loss,
                        r.test_loss,
                        r.train_acc,
                        r.val_acc,
                        r.test_acc,
                        r.wall_time_s
                    )?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// [`write_results`] to a new file at `path`.
pub fn export_results(summary: &RunSummary, path: impl AsRef<Path>, format: ExportFormat) -> Result<()> {
    write_results(summary, BufWriter::new(File::create(path)?), format)
}

pub fn load_results_json(path: impl AsRef<Path>) -> Result<RunSummary> {
    let file = std::io::BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{planted_partition, row_normalize_features, split_with, PlantedPartition, SplitSpec};

    fn dataset() -> Dataset {
        let mut ds = planted_partition(PlantedPartition::default(), 3).unwrap();
        ds.features = row_normalize_features(ds.features.view());
        split_with(
            ds,
            SplitSpec {
                per_class: 5,
                val: 30,
                test: 60,
            },
        )
        .unwrap()
    }

    fn quick(kind: ModelKind, epochs: usize) -> TrainConfig {
        let mut cfg = kind.default_config();
        cfg.epochs = epochs;
        cfg
    }

    #[test]
    fn ci_formula() {
        let (m, ci, ok) = mean_ci95(&[0.8]);
        assert_eq!((m, ci, ok), (0.8, 0.0, false));
        let (m, ci, ok) = mean_ci95(&[0.5, 0.5, 0.5]);
        assert_eq!((m, ci, ok), (0.5, 0.0, true));
        let (m, ci, _) = mean_ci95(&[1.0, 2.0, 3.0, 4.0]);
        let s = (5.0f64 / 3.0).sqrt();
        assert!((m - 2.5).abs() < 1e-15);
        assert!((ci - 1.96 * s / 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_gcn_epoch_is_one_step_per_tensor() {
        let (model, trace) = train_gcn(&dataset(), &quick(ModelKind::Gcn, 1)).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(model.layers().iter().all(|p| p.step_count() == 1));
    }

    #[test]
    fn zero_learning_rate_freezes_gcn() {
        let ds = dataset();
        let mut cfg = quick(ModelKind::Gcn, 5);
        cfg.learning_rate = 0.0;
        cfg.weight_decay = 0.0;
        let (model, trace) = train_gcn(&ds, &cfg).unwrap();
        let fresh = GcnModel::for_graph(&ds.graph, &[30, 16, 3], 0.5, false, cfg.seed).unwrap();
        for (a, b) in model.layers().iter().zip(fresh.layers()) {
            assert_eq!(a.weights(), b.weights());
        }
        assert!(trace.windows(2).all(|w| w[0].train_loss == w[1].train_loss));
    }

    #[test]
    fn gcn_learns_planted_partition() {
        let ds = dataset();
        let (_, trace) = train_gcn(&ds, &quick(ModelKind::Gcn, 100)).unwrap();
        let last = trace.last().unwrap();
        assert!(last.test_acc > 0.7, "{last:?}");
        assert!(last.train_loss < trace[0].train_loss);
        let windows = trace.len() - 19;
        let good = (0..windows).filter(|&e| trace[e + 19].train_loss <= trace[e].train_loss).count();
        assert!(good as f64 >= 0.95 * windows as f64);
    }

    #[test]
    fn sign_learns_and_counts_steps() {
        let ds = dataset();
        let (_, trace) = train_sign(&ds, &quick(ModelKind::Sign, 30)).unwrap();
        assert!(trace.last().unwrap().test_acc > 0.7, "{:?}", trace.last());
        let mut cfg = quick(ModelKind::Sign, 3);
        cfg.batch_size = Some(4);
        let (model, _) = train_sign(&ds, &cfg).unwrap();
        // 15 training vertices in batches of 4, the last one partial.
        assert_eq!(model.omega().step_count(), 3 * 4);
        assert!(model.theta().iter().all(|p| p.step_count() == 12));
    }

    #[test]
    fn training_is_deterministic() {
        let ds = dataset();
        let strip = |t: Vec<EpochRecord>| {
            t.into_iter()
                .map(|mut r| {
                    r.wall_time_s = 0.0;
                    r
                })
                .collect::<Vec<_>>()
        };
        let a = train_gcn(&ds, &quick(ModelKind::Gcn, 10)).unwrap().1;
        let b = train_gcn(&ds, &quick(ModelKind::Gcn, 10)).unwrap().1;
        assert_eq!(strip(a), strip(b));
        let a = train_sign(&ds, &quick(ModelKind::Sign, 5)).unwrap().1;
        let b = train_sign(&ds, &quick(ModelKind::Sign, 5)).unwrap().1;
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn repeat_runs_aggregates() {
        let ds = dataset();
        let summary = repeat_runs(ModelKind::Gcn, &ds, &quick(ModelKind::Gcn, 5), 3, 10).unwrap();
        assert_eq!(summary.per_seed.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![10, 11, 12]);
        let accs: Vec<f64> = summary.per_seed.iter().map(|r| r.test_acc).collect();
        let (m, ci, _) = mean_ci95(&accs);
        assert!((summary.mean_acc - m).abs() < 1e-12);
        assert!((summary.ci95_acc - ci).abs() < 1e-12);
        let single = repeat_runs(ModelKind::Sign, &ds, &quick(ModelKind::Sign, 2), 1, 0).unwrap();
        assert!(!single.ci_defined);
        assert_eq!(single.ci95_acc, 0.0);
        assert!(repeat_runs(ModelKind::Gcn, &ds, &quick(ModelKind::Gcn, 2), 0, 0).is_err());
    }

    #[test]
    fn failing_runs_abort_the_summary() {
        let ds = dataset();
        let mut cfg = quick(ModelKind::Gcn, 3);
        cfg.learning_rate = 1e300;
        cfg.weight_decay = 1e300;
        match repeat_runs(ModelKind::Gcn, &ds, &cfg, 2, 0) {
            Err(Error::TooManyFailures { succeeded: 0, total: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn export_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dataset();
        let summary = repeat_runs(ModelKind::Sign, &ds, &quick(ModelKind::Sign, 4), 2, 0).unwrap();
        let json = dir.path().join("r.json");
        export_results(&summary, &json, ExportFormat::Json).unwrap();
        assert_eq!(load_results_json(&json).unwrap(), summary);
        let csv = dir.path().join("r.csv");
        export_results(&summary, &csv, ExportFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 4);
        let loss: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(loss, summary.per_seed[0].trace[0].train_loss);

        let mut empty = summary.clone();
        empty.per_seed.iter_mut().for_each(|r| r.trace.clear());
        export_results(&empty, &csv, ExportFormat::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(&csv).unwrap().trim(), CSV_HEADER);
    }
}
