use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::Rng;
use serde_json::json;

use super::{check_generation, load_param, maybe_dropout, meta_field, meta_steps, store_param};
use crate::checkpoint::Checkpoint;
use crate::error::{check_dim, Error, Result};
use crate::graph::{aggregate_signal, sign_aggregator, AggregatorOptions, SparseGraph};
use crate::nn::{relu, relu_backward, softmax, stream_rng, xavier_init, DenseParam, Optimizer, Stream};

/// Stream used to initialize `Ω`, kept apart from the per-branch streams so
/// changing `r` does not move it.
const OMEGA_STREAM: u32 = u32::MAX;

/// Rows processed per chunk during inference.
const INFER_CHUNK: usize = 1024;

/// Precomputed aggregations `[X, A_1X, …, A_rX]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPrecomputed {
    blocks: Vec<Array2<f64>>,
}

impl SignPrecomputed {
    pub fn from_blocks(blocks: Vec<Array2<f64>>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidArgument("SIGN needs at least the raw feature block".into()))?;
        let (n, f) = first.dim();
        for b in &blocks[1..] {
            check_dim("SIGN block rows", n, b.nrows())?;
            check_dim("SIGN block features", f, b.ncols())?;
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Array2<f64>] {
        &self.blocks
    }

    pub fn r(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn n(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn n_features(&self) -> usize {
        self.blocks[0].ncols()
    }
}

/// Blocks `A_k·X` for `k = 0..=r` with walk-count aggregators, computed
/// matrix-free so no power of `A` is ever materialized.
pub fn sign_precompute(g: &SparseGraph, x: ArrayView2<'_, f64>, r: usize) -> Result<SignPrecomputed> {
    check_dim("SIGN feature rows", g.n_vertices(), x.nrows())?;
    let blocks = (0..=r)
        .map(|k| aggregate_signal(g, k, x))
        .collect::<Result<Vec<_>>>()?;
    SignPrecomputed::from_blocks(blocks)
}

/// Same as [`sign_precompute`] but through explicit sparse aggregators, which
/// allows binarized powers and enforces the density budget.
pub fn sign_precompute_with(
    g: &SparseGraph,
    x: ArrayView2<'_, f64>,
    r: usize,
    opts: AggregatorOptions,
) -> Result<SignPrecomputed> {
    check_dim("SIGN feature rows", g.n_vertices(), x.nrows())?;
    let blocks = (0..=r)
        .map(|k| {
            if k == 0 {
                Ok(x.to_owned())
            } else {
                sign_aggregator(g, k, opts)?.mul_dense(x)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SignPrecomputed::from_blocks(blocks)
}

/// `Z = σ(X_bΘ_0 | (A_1X)_bΘ_1 | …)`, logits `= Z·Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignModel {
    theta: Vec<DenseParam>,
    omega: DenseParam,
    dropout: f64,
    generation: u64,
}

#[derive(Debug, Clone)]
pub struct SignCache {
    generation: u64,
    /// Batch rows of each block after dropout.
    inputs: Vec<Array2<f64>>,
    z_pre: Array2<f64>,
    z_dropped: Array2<f64>,
    z_mask: Option<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignGradients {
    pub theta: Vec<Array2<f64>>,
    pub omega: Array2<f64>,
}

impl SignGradients {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            theta: self.theta.iter().map(|t| t * factor).collect(),
            omega: &self.omega * factor,
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.theta.iter_mut().zip(&other.theta) {
            *a += b;
        }
        self.omega += &other.omega;
    }
}

impl SignModel {
    /// `r + 1` branches of width `f1`, Xavier-initialized from per-branch streams.
    pub fn new(f0: usize, f1: usize, n_classes: usize, r: usize, dropout: f64, seed: u64) -> Result<Self> {
        if f0 == 0 || f1 == 0 || n_classes == 0 {
            return Err(Error::InvalidArgument(format!(
                "SIGN dimensions must be positive, got f0={f0}, f1={f1}, C={n_classes}"
            )));
        }
        let theta = (0..=r)
            .map(|k| xavier_init(f0, f1, &mut stream_rng(seed, Stream::Init(k as u32))))
            .collect();
        let omega = xavier_init((r + 1) * f1, n_classes, &mut stream_rng(seed, Stream::Init(OMEGA_STREAM)));
        Self::from_weights(theta, omega, dropout)
    }

    pub fn from_weights(theta: Vec<Array2<f64>>, omega: Array2<f64>, dropout: f64) -> Result<Self> {
        let first = theta
            .first()
            .ok_or_else(|| Error::InvalidArgument("SIGN needs at least Θ_0".into()))?;
        let shape = first.dim();
        for t in &theta[1..] {
            check_dim("SIGN Θ rows", shape.0, t.nrows())?;
            check_dim("SIGN Θ cols", shape.1, t.ncols())?;
        }
        check_dim("SIGN Ω rows", theta.len() * shape.1, omega.nrows())?;
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::InvalidArgument(format!("dropout must lie in [0, 1), got {dropout}")));
        }
        Ok(Self {
            theta: theta.into_iter().map(DenseParam::new).collect(),
            omega: DenseParam::new(omega),
            dropout,
            generation: 0,
        })
    }

    pub fn theta(&self) -> &[DenseParam] {
        &self.theta
    }

    pub fn omega(&self) -> &DenseParam {
        &self.omega
    }

    pub fn r(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn hidden(&self) -> usize {
        self.theta[0].shape().1
    }

    pub fn n_classes(&self) -> usize {
        self.omega.shape().1
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Replaces `Θ_k` (`k ≤ r`) or `Ω` (`k = r + 1`).
    pub fn set_weights(&mut self, k: usize, weights: Array2<f64>) -> Result<()> {
        let r = self.r();
        let param = match k {
            k if k <= r => &mut self.theta[k],
            k if k == r + 1 => &mut self.omega,
            _ => return Err(Error::IndexOutOfRange { index: k, n: r + 2 }),
        };
        check_dim("SIGN weight rows", param.shape().0, weights.nrows())?;
        check_dim("SIGN weight cols", param.shape().1, weights.ncols())?;
        *param.weights_mut() = weights;
        self.generation += 1;
        Ok(())
    }

    pub fn apply_gradients(
        &mut self,
        grads: &SignGradients,
        optimizer: Optimizer,
        learning_rate: f64,
        weight_decay: f64,
    ) -> Result<()> {
        check_dim("SIGN gradient count", self.theta.len(), grads.theta.len())?;
        for (p, g) in self.theta.iter_mut().zip(&grads.theta) {
            p.update(g.view(), optimizer, learning_rate, weight_decay)?;
        }
        self.omega
            .update(grads.omega.view(), optimizer, learning_rate, weight_decay)?;
        self.generation += 1;
        Ok(())
    }

    /// Class probabilities for `batch` with dropout off.
    pub fn predict_proba(&self, pre: &SignPrecomputed, batch: &[usize]) -> Result<Array2<f64>> {
        Ok(softmax(sign_infer(self, pre, batch)?.view()))
    }

    pub fn to_checkpoint(&self, extra: serde_json::Value) -> Result<Checkpoint> {
        let mut steps: Vec<u64> = self.theta.iter().map(DenseParam::step_count).collect();
        steps.push(self.omega.step_count());
        let mut ck = Checkpoint::new(json!({
            "model": "sign",
            "dropout": self.dropout,
            "r": self.r(),
            "step_counts": steps,
            "extra": extra,
        }));
        for (k, p) in self.theta.iter().enumerate() {
            store_param(&mut ck, &format!("theta{k}"), p)?;
        }
        store_param(&mut ck, "omega", &self.omega)?;
        Ok(ck)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if meta_field(ck, "model")? != "sign" {
            return Err(Error::Checkpoint("not a SIGN checkpoint".into()));
        }
        let steps = meta_steps(ck)?;
        let (omega_steps, theta_steps) = steps
            .split_last()
            .ok_or_else(|| Error::Checkpoint("empty step_counts".into()))?;
        let theta = theta_steps
            .iter()
            .enumerate()
            .map(|(k, &s)| load_param(ck, &format!("theta{k}"), s))
            .collect::<Result<Vec<_>>>()?;
        let omega = load_param(ck, "omega", *omega_steps)?;
        let dropout = meta_field(ck, "dropout")?
            .as_f64()
            .ok_or_else(|| Error::Checkpoint("dropout is not a number".into()))?;
        let mut model = Self::from_weights(
            theta.iter().map(|p| p.weights().clone()).collect(),
            omega.weights().clone(),
            dropout,
        )?;
        model.theta = theta;
        model.omega = omega;
        Ok(model)
    }
}

fn check_compatible(model: &SignModel, pre: &SignPrecomputed, batch: &[usize]) -> Result<()> {
    check_dim("SIGN aggregator count", model.r(), pre.r())?;
    check_dim("SIGN input features", model.theta[0].shape().0, pre.n_features())?;
    if let Some(&bad) = batch.iter().find(|&&i| i >= pre.n()) {
        return Err(Error::IndexOutOfRange { index: bad, n: pre.n() });
    }
    Ok(())
}

/// Logits for the rows in `batch`. Rows are independent, so any partition of
/// the vertices into batches gives the same logits.
pub fn sign_forward(
    model: &SignModel,
    pre: &SignPrecomputed,
    batch: &[usize],
    rng: &mut impl Rng,
    training: bool,
) -> Result<(Array2<f64>, SignCache)> {
    check_compatible(model, pre, batch)?;
    let mut inputs = Vec::with_capacity(pre.blocks.len());
    let mut branches = Vec::with_capacity(pre.blocks.len());
    for (block, theta) in pre.blocks.iter().zip(&model.theta) {
        let rows = block.select(Axis(0), batch);
        let (dropped, _) = maybe_dropout(rows.view(), model.dropout, rng, training);
        branches.push(dropped.dot(theta.weights()));
        inputs.push(dropped);
    }
    let views: Vec<_> = branches.iter().map(|b| b.view()).collect();
    let z_pre = concatenate(Axis(1), &views).expect("branches share row count");
    let z = relu(z_pre.view());
    let (z_dropped, z_mask) = maybe_dropout(z.view(), model.dropout, rng, training);
    let logits = z_dropped.dot(model.omega.weights());
    Ok((
        logits,
        SignCache {
            generation: model.generation,
            inputs,
            z_pre,
            z_dropped,
            z_mask,
        },
    ))
}

/// Inference-only forward pass (dropout off, no cache), processed in chunks
/// to bound memory on large batches.
pub fn sign_infer(model: &SignModel, pre: &SignPrecomputed, batch: &[usize]) -> Result<Array2<f64>> {
    check_compatible(model, pre, batch)?;
    let f1 = model.hidden();
    let mut logits = Array2::zeros((batch.len(), model.n_classes()));
    for (c, chunk) in batch.chunks(INFER_CHUNK).enumerate() {
        let mut z = Array2::zeros((chunk.len(), f1 * pre.blocks.len()));
        for (k, (block, theta)) in pre.blocks.iter().zip(&model.theta).enumerate() {
            let rows = block.select(Axis(0), chunk);
            z.slice_mut(s![.., k * f1..(k + 1) * f1])
                .assign(&rows.dot(theta.weights()));
        }
        let z = relu(z.view());
        let start = c * INFER_CHUNK;
        logits
            .slice_mut(s![start..start + chunk.len(), ..])
            .assign(&z.dot(model.omega.weights()));
    }
    Ok(logits)
}

/// Gradients for `Θ_0..Θ_r` and `Ω`, given `∂loss/∂logits` for the batch rows.
pub fn sign_backward(
    model: &SignModel,
    cache: &SignCache,
    dlogits: ArrayView2<'_, f64>,
) -> Result<SignGradients> {
    check_generation(cache.generation, model.generation)?;
    check_dim("SIGN dlogits rows", cache.z_pre.nrows(), dlogits.nrows())?;
    check_dim("SIGN dlogits cols", model.n_classes(), dlogits.ncols())?;
    let omega = cache.z_dropped.t().dot(&dlogits);
    let mut dz = dlogits.dot(&model.omega.weights().t());
    if let Some(mask) = &cache.z_mask {
        dz *= mask;
    }
    let dz_pre = relu_backward(cache.z_pre.view(), dz.view());
    let f1 = model.hidden();
    let theta = cache
        .inputs
        .iter()
        .enumerate()
        .map(|(k, x)| x.t().dot(&dz_pre.slice(s![.., k * f1..(k + 1) * f1])))
        .collect();
    Ok(SignGradients { theta, omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::nn::{grad_check, softmax_xent_masked};
    use ndarray::array;

    fn rng() -> rand_chacha::ChaCha8Rng {
        stream_rng(0, Stream::Dropout)
    }

    fn eight_vertex_graph() -> SparseGraph {
        build_graph(
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 0, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 6, 1.0),
                (6, 7, 1.0),
                (7, 4, 1.0),
                (1, 6, 1.0),
            ],
            8,
            false,
        )
        .unwrap()
    }

    fn features(n: usize, f: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, f), |(i, j)| ((i * 3 + j * 5) % 7) as f64 / 7.0 - 0.4)
    }

    #[test]
    fn precompute_examples() {
        let g = build_graph(&[(0, 1, 1.0)], 2, false).unwrap();
        let x = array![[1.0], [0.0]];
        let pre = sign_precompute(&g, x.view(), 0).unwrap();
        assert_eq!(pre.blocks(), std::slice::from_ref(&x));
        let pre = sign_precompute(&g, x.view(), 1).unwrap();
        assert_eq!(pre.blocks()[0], x);
        assert!((&pre.blocks()[1] - &array![[0.5], [0.5]]).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn precompute_matches_dense_oracle() {
        let g = eight_vertex_graph();
        let x = features(8, 3);
        let pre = sign_precompute(&g, x.view(), 3).unwrap();
        let sparse = sign_precompute_with(&g, x.view(), 3, AggregatorOptions::default()).unwrap();
        let a = g.adjacency().to_dense();
        let mut power = Array2::<f64>::eye(8);
        for k in 1..=3 {
            power = power.dot(&a);
            let m = &power + &Array2::<f64>::eye(8);
            let d: Vec<f64> = m.rows().into_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
            let norm = Array2::from_shape_fn((8, 8), |(i, j)| d[i] * m[[i, j]] * d[j]);
            let expected = norm.dot(&x);
            assert!((&pre.blocks()[k] - &expected).iter().all(|v| v.abs() < 1e-12));
            assert!((&sparse.blocks()[k] - &expected).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn identity_weights_give_relu_of_features() {
        let x = array![[1.0, -2.0], [-0.5, 3.0]];
        let pre = SignPrecomputed::from_blocks(vec![x.clone()]).unwrap();
        let model = SignModel::from_weights(vec![Array2::eye(2)], Array2::eye(2), 0.0).unwrap();
        let (logits, _) = sign_forward(&model, &pre, &[0, 1], &mut rng(), true).unwrap();
        assert_eq!(logits, relu(x.view()));
    }

    #[test]
    fn forward_matches_straight_line() {
        let g = eight_vertex_graph();
        let x = features(8, 3);
        let pre = sign_precompute(&g, x.view(), 2).unwrap();
        let model = SignModel::new(3, 4, 3, 2, 0.5, 17).unwrap();
        let all: Vec<usize> = (0..8).collect();
        let (logits, _) = sign_forward(&model, &pre, &all, &mut rng(), false).unwrap();
        for v in 0..8 {
            let mut z = Vec::new();
            for k in 0..=2 {
                let xv = pre.blocks()[k].row(v);
                let t = model.theta()[k].weights();
                for j in 0..4 {
                    let s: f64 = (0..3).map(|i| xv[i] * t[[i, j]]).sum();
                    z.push(s.max(0.0));
                }
            }
            for c in 0..3 {
                let expected: f64 = z.iter().enumerate().map(|(i, zi)| zi * model.omega().weights()[[i, c]]).sum();
                assert!((logits[[v, c]] - expected).abs() < 1e-12);
            }
        }
        assert_eq!(sign_infer(&model, &pre, &all).unwrap(), logits);
    }

    #[test]
    fn batching_is_exact() {
        let g = eight_vertex_graph();
        let pre = sign_precompute(&g, features(8, 3).view(), 2).unwrap();
        let model = SignModel::new(3, 4, 3, 2, 0.5, 2).unwrap();
        let all: Vec<usize> = (0..8).collect();
        let (full, _) = sign_forward(&model, &pre, &all, &mut rng(), false).unwrap();
        let (a, _) = sign_forward(&model, &pre, &[5, 1, 7], &mut rng(), false).unwrap();
        let (b, _) = sign_forward(&model, &pre, &[0, 2, 3, 4, 6], &mut rng(), false).unwrap();
        for (row, &v) in [5, 1, 7].iter().enumerate() {
            assert_eq!(a.row(row), full.row(v));
        }
        for (row, &v) in [0, 2, 3, 4, 6].iter().enumerate() {
            assert_eq!(b.row(row), full.row(v));
        }
    }

    fn batch_loss_grads(
        model: &SignModel,
        pre: &SignPrecomputed,
        batch: &[usize],
        labels: &[usize],
    ) -> (f64, SignGradients) {
        let (logits, cache) = sign_forward(model, pre, batch, &mut rng(), false).unwrap();
        let batch_labels: Vec<usize> = batch.iter().map(|&v| labels[v]).collect();
        let rows: Vec<usize> = (0..batch.len()).collect();
        let (loss, d) = softmax_xent_masked(logits.view(), &batch_labels, &rows).unwrap();
        (loss, sign_backward(model, &cache, d.view()).unwrap())
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = eight_vertex_graph();
        let pre = sign_precompute(&g, features(8, 3).view(), 2).unwrap();
        let model = SignModel::new(3, 4, 3, 2, 0.0, 6).unwrap();
        let labels = [0, 1, 2, 0, 1, 2, 0, 1];
        let batch = [0, 2, 3, 5, 7];
        let (_, grads) = batch_loss_grads(&model, &pre, &batch, &labels);
        let mut params: Vec<f64> = model.theta().iter().flat_map(|p| p.weights().iter().copied()).collect();
        params.extend(model.omega().weights().iter());
        let mut analytic: Vec<f64> = grads.theta.iter().flat_map(|g| g.iter().copied()).collect();
        analytic.extend(grads.omega.iter());
        let f = |theta: &[f64]| {
            let mut m = model.clone();
            let mut offset = 0;
            for k in 0..=m.r() + 1 {
                let (r, c) = if k <= m.r() { m.theta()[k].shape() } else { m.omega().shape() };
                let w = Array2::from_shape_vec((r, c), theta[offset..offset + r * c].to_vec()).unwrap();
                m.set_weights(k, w).unwrap();
                offset += r * c;
            }
            batch_loss_grads(&m, &pre, &batch, &labels).0
        };
        let err = grad_check(f, &params, &analytic, 1e-5);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn disjoint_batch_gradients_sum_to_full() {
        let g = eight_vertex_graph();
        let pre = sign_precompute(&g, features(8, 3).view(), 2).unwrap();
        let model = SignModel::new(3, 4, 3, 2, 0.0, 6).unwrap();
        let labels = [0, 1, 2, 0, 1, 2, 0, 1];
        let all: Vec<usize> = (0..8).collect();
        let (_, full) = batch_loss_grads(&model, &pre, &all, &labels);
        let parts: [&[usize]; 3] = [&[6, 0, 3], &[1, 7], &[2, 4, 5]];
        let mut total: Option<SignGradients> = None;
        for part in parts {
            let (_, g) = batch_loss_grads(&model, &pre, part, &labels);
            let g = g.scaled(part.len() as f64 / 8.0);
            match &mut total {
                Some(t) => t.add_assign(&g),
                None => total = Some(g),
            }
        }
        let total = total.unwrap();
        for (a, b) in total.theta.iter().zip(&full.theta) {
            assert!((a - b).iter().all(|v| v.abs() < 1e-10));
        }
        assert!((&total.omega - &full.omega).iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn zero_dlogits_and_stale_cache() {
        let pre = sign_precompute(&eight_vertex_graph(), features(8, 3).view(), 1).unwrap();
        let mut model = SignModel::new(3, 2, 2, 1, 0.5, 1).unwrap();
        let (logits, cache) = sign_forward(&model, &pre, &[1, 2], &mut rng(), true).unwrap();
        let g = sign_backward(&model, &cache, Array2::zeros(logits.raw_dim()).view()).unwrap();
        assert!(g.theta.iter().chain([&g.omega]).all(|t| t.iter().all(|&v| v == 0.0)));
        model.apply_gradients(&g, Optimizer::Adam, 0.1, 0.0).unwrap();
        assert!(matches!(
            sign_backward(&model, &cache, logits.view()),
            Err(Error::StaleCache { .. })
        ));
    }

    #[test]
    fn shape_errors() {
        let pre = sign_precompute(&eight_vertex_graph(), features(8, 3).view(), 1).unwrap();
        let model = SignModel::new(3, 2, 2, 2, 0.0, 1).unwrap();
        assert!(sign_forward(&model, &pre, &[0], &mut rng(), false).is_err());
        let model = SignModel::new(3, 2, 2, 1, 0.0, 1).unwrap();
        assert!(matches!(
            sign_forward(&model, &pre, &[8], &mut rng(), false),
            Err(Error::IndexOutOfRange { index: 8, n: 8 })
        ));
        assert!(SignModel::from_weights(vec![Array2::zeros((3, 2))], Array2::zeros((3, 2)), 0.0).is_err());
    }

    #[test]
    fn permutation_equivariance() {
        let g = eight_vertex_graph();
        let perm = [7, 2, 5, 0, 1, 6, 3, 4];
        let x = features(8, 3);
        let mut px = Array2::zeros(x.raw_dim());
        for (old, &new) in perm.iter().enumerate() {
            px.row_mut(new).assign(&x.row(old));
        }
        let pre = sign_precompute(&g, x.view(), 2).unwrap();
        let ppre = sign_precompute(&g.permute(&perm).unwrap(), px.view(), 2).unwrap();
        let model = SignModel::new(3, 4, 3, 2, 0.0, 9).unwrap();
        let all: Vec<usize> = (0..8).collect();
        let a = sign_infer(&model, &pre, &all).unwrap();
        let b = sign_infer(&model, &ppre, &all).unwrap();
        for (old, &new) in perm.iter().enumerate() {
            assert!((&a.row(old) - &b.row(new)).iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let pre = sign_precompute(&eight_vertex_graph(), features(8, 3).view(), 1).unwrap();
        let mut model = SignModel::new(3, 2, 2, 1, 0.5, 1).unwrap();
        let (logits, cache) = sign_forward(&model, &pre, &[1, 2, 3], &mut rng(), true).unwrap();
        let g = sign_backward(&model, &cache, logits.view()).unwrap();
        model.apply_gradients(&g, Optimizer::Adam, 0.1, 1e-5).unwrap();
        let ck = model.to_checkpoint(json!({})).unwrap();
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        let restored = SignModel::from_checkpoint(&Checkpoint::read_from(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(restored.theta(), model.theta());
        assert_eq!(restored.omega(), model.omega());
        let p = restored.predict_proba(&pre, &[0, 4]).unwrap();
        assert!(p.rows().into_iter().all(|r| (r.sum() - 1.0).abs() < 1e-12));
    }
}
