use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde_json::json;

use super::{check_generation, load_param, maybe_dropout, meta_field, meta_steps, store_param};
use crate::checkpoint::Checkpoint;
use crate::error::{check_dim, Error, Result};
use crate::graph::{laplacian, CsrMatrix, LaplacianKind, SparseGraph, SparseSymMatrix};
use crate::nn::{
    dropout_sparse, relu, relu_backward, softmax, stream_rng, xavier_init, DenseParam, Optimizer, Stream,
};

/// Stack of propagation layers `H ← Â·dropout(H)·Θ` with rectifiers between
/// layers and raw logits out of the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    layers: Vec<DenseParam>,
    a_hat: SparseSymMatrix,
    dropout: f64,
    residual: bool,
    generation: u64,
}

/// Intermediates of one forward pass, consumed by [`gcn_backward`].
#[derive(Debug, Clone)]
pub struct GcnCache {
    generation: u64,
    layers: Vec<LayerCache>,
}

/// `dropout(H)` for one layer: the input features stay sparse.
#[derive(Debug, Clone)]
enum LayerInput {
    Sparse(CsrMatrix),
    Dense(Array2<f64>),
}

#[derive(Debug, Clone)]
struct LayerCache {
    mask: Option<Array2<f64>>,
    input: LayerInput,
    pre_activation: Array2<f64>,
    residual: bool,
}

impl GcnModel {
    /// Xavier-initialized model with layer widths `dims = [f_0, h, …, C]`.
    /// Layer `ψ` draws from its own random stream.
    pub fn new(
        a_hat: SparseSymMatrix,
        dims: &[usize],
        dropout: f64,
        residual: bool,
        seed: u64,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "GCN needs at least two positive layer widths, got {dims:?}"
            )));
        }
        let weights = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| xavier_init(w[0], w[1], &mut stream_rng(seed, Stream::Init(l as u32))))
            .collect();
        Self::from_weights(a_hat, weights, dropout, residual)
    }

    /// Model over the renormalized propagation matrix of `g`.
    pub fn for_graph(
        g: &SparseGraph,
        dims: &[usize],
        dropout: f64,
        residual: bool,
        seed: u64,
    ) -> Result<Self> {
        Self::new(laplacian(g, LaplacianKind::Renormalized)?, dims, dropout, residual, seed)
    }

    pub fn from_weights(
        a_hat: SparseSymMatrix,
        weights: Vec<Array2<f64>>,
        dropout: f64,
        residual: bool,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("GCN needs at least one layer".into()));
        }
        for pair in weights.windows(2) {
            check_dim("GCN layer chaining", pair[0].ncols(), pair[1].nrows())?;
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::InvalidArgument(format!("dropout must lie in [0, 1), got {dropout}")));
        }
        Ok(Self {
            layers: weights.into_iter().map(DenseParam::new).collect(),
            a_hat,
            dropout,
            residual,
            generation: 0,
        })
    }

    pub fn layers(&self) -> &[DenseParam] {
        &self.layers
    }

    pub fn a_hat(&self) -> &SparseSymMatrix {
        &self.a_hat
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn residual(&self) -> bool {
        self.residual
    }

    /// Bumped on every parameter change; caches from older generations are
    /// rejected by the backward pass.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.shape().1)
    }

    /// Forward pass honoring the model's residual flag.
    pub fn forward(
        &self,
        x: ArrayView2<'_, f64>,
        rng: &mut impl Rng,
        training: bool,
    ) -> Result<(Array2<f64>, GcnCache)> {
        forward_impl(self, &CsrMatrix::from_dense(x), rng, training, self.residual)
    }

    /// [`GcnModel::forward`] on features already in sparse form, so repeated
    /// passes skip the conversion.
    pub fn forward_sparse(
        &self,
        x: &CsrMatrix,
        rng: &mut impl Rng,
        training: bool,
    ) -> Result<(Array2<f64>, GcnCache)> {
        forward_impl(self, x, rng, training, self.residual)
    }

    pub fn set_weights(&mut self, layer: usize, weights: Array2<f64>) -> Result<()> {
        let n = self.layers.len();
        let param = self
            .layers
            .get_mut(layer)
            .ok_or(Error::IndexOutOfRange { index: layer, n })?;
        check_dim("GCN weight rows", param.shape().0, weights.nrows())?;
        check_dim("GCN weight cols", param.shape().1, weights.ncols())?;
        *param.weights_mut() = weights;
        self.generation += 1;
        Ok(())
    }

    /// One optimizer step per layer. With `decay_first_layer_only` the weight
    /// decay is applied to layer 0 alone.
    pub fn apply_gradients(
        &mut self,
        grads: &[Array2<f64>],
        optimizer: Optimizer,
        learning_rate: f64,
        weight_decay: f64,
        decay_first_layer_only: bool,
    ) -> Result<()> {
        check_dim("GCN gradient count", self.layers.len(), grads.len())?;
        for (l, (param, grad)) in self.layers.iter_mut().zip(grads).enumerate() {
            let wd = if decay_first_layer_only && l > 0 { 0.0 } else { weight_decay };
            param.update(grad.view(), optimizer, learning_rate, wd)?;
        }
        self.generation += 1;
        Ok(())
    }

    /// Weights, Adam state and hyperparameters. The propagation matrix is
    /// not stored; it is rebuilt from the graph on load.
    pub fn to_checkpoint(&self, extra: serde_json::Value) -> Result<Checkpoint> {
        let mut ck = Checkpoint::new(json!({
            "model": "gcn",
            "dropout": self.dropout,
            "residual": self.residual,
            "n_layers": self.layers.len(),
            "step_counts": self.layers.iter().map(DenseParam::step_count).collect::<Vec<_>>(),
            "extra": extra,
        }));
        for (l, p) in self.layers.iter().enumerate() {
            store_param(&mut ck, &format!("layer{l}"), p)?;
        }
        Ok(ck)
    }

    pub fn from_checkpoint(ck: &Checkpoint, a_hat: SparseSymMatrix) -> Result<Self> {
        if meta_field(ck, "model")? != "gcn" {
            return Err(Error::Checkpoint("not a GCN checkpoint".into()));
        }
        let steps = meta_steps(ck)?;
        let layers = steps
            .iter()
            .enumerate()
            .map(|(l, &s)| load_param(ck, &format!("layer{l}"), s))
            .collect::<Result<Vec<_>>>()?;
        let dropout = meta_field(ck, "dropout")?
            .as_f64()
            .ok_or_else(|| Error::Checkpoint("dropout is not a number".into()))?;
        let residual = meta_field(ck, "residual")?
            .as_bool()
            .ok_or_else(|| Error::Checkpoint("residual is not a flag".into()))?;
        let mut model = Self::from_weights(
            a_hat,
            layers.iter().map(|p| p.weights().clone()).collect(),
            dropout,
            residual,
        )?;
        model.layers = layers;
        Ok(model)
    }
}

fn forward_impl(
    model: &GcnModel,
    x: &CsrMatrix,
    rng: &mut impl Rng,
    training: bool,
    residual: bool,
) -> Result<(Array2<f64>, GcnCache)> {
    check_dim("GCN input rows", model.a_hat.n(), x.n_rows())?;
    check_dim("GCN input features", model.layers[0].shape().0, x.n_cols())?;
    let depth = model.layers.len();
    let mut h = Array2::zeros((0, 0));
    let mut caches = Vec::with_capacity(depth);
    for (l, param) in model.layers.iter().enumerate() {
        let last = l + 1 == depth;
        let skip = residual && l > 0 && !last;
        if skip {
            check_dim("residual GCN layer width", param.shape().0, param.shape().1)?;
        }
        // Â·(dropout(H)·Θ): projecting before propagating keeps the sparse
        // product narrow.
        let (input, mask, projected) = if l == 0 {
            let dropped = if training && model.dropout > 0.0 {
                dropout_sparse(x, model.dropout, rng)
            } else {
                x.clone()
            };
            let projected = dropped.mul_dense(param.weights().view())?;
            (LayerInput::Sparse(dropped), None, projected)
        } else {
            let (dropped, mask) = maybe_dropout(h.view(), model.dropout, rng, training);
            let projected = dropped.dot(param.weights());
            (LayerInput::Dense(dropped), mask, projected)
        };
        let pre_activation = model.a_hat.mul_dense(projected.view())?;
        let out = if last {
            pre_activation.clone()
        } else if skip {
            relu(pre_activation.view()) + &h
        } else {
            relu(pre_activation.view())
        };
        caches.push(LayerCache {
            mask,
            input,
            pre_activation,
            residual: skip,
        });
        h = out;
    }
    Ok((
        h,
        GcnCache {
            generation: model.generation,
            layers: caches,
        },
    ))
}

/// Plain stack, no residual connections regardless of the model flag.
pub fn gcn_forward(
    model: &GcnModel,
    x: ArrayView2<'_, f64>,
    rng: &mut impl Rng,
    training: bool,
) -> Result<(Array2<f64>, GcnCache)> {
    forward_impl(model, &CsrMatrix::from_dense(x), rng, training, false)
}

/// `X_{ψ+1} = σ(Â X_ψ Θ_ψ) + X_ψ` on every hidden layer between the input
/// projection and the classifier; those layers must be square.
pub fn gcn_residual_forward(
    model: &GcnModel,
    x: ArrayView2<'_, f64>,
    rng: &mut impl Rng,
    training: bool,
) -> Result<(Array2<f64>, GcnCache)> {
    forward_impl(model, &CsrMatrix::from_dense(x), rng, training, true)
}

/// Gradients of the loss with respect to every `Θ_ψ`, given `∂loss/∂logits`.
pub fn gcn_backward(
    model: &GcnModel,
    cache: &GcnCache,
    dlogits: ArrayView2<'_, f64>,
) -> Result<Vec<Array2<f64>>> {
    check_generation(cache.generation, model.generation)?;
    check_dim("GCN dlogits rows", model.a_hat.n(), dlogits.nrows())?;
    check_dim("GCN dlogits cols", model.n_classes(), dlogits.ncols())?;
    let depth = model.layers.len();
    let mut grads = vec![Array2::zeros((0, 0)); depth];
    let mut d_out = dlogits.to_owned();
    for l in (0..depth).rev() {
        let lc = &cache.layers[l];
        let dz = if l + 1 == depth {
            d_out.clone()
        } else {
            relu_backward(lc.pre_activation.view(), d_out.view())
        };
        // Â is symmetric, so Âᵀ·dZ = Â·dZ.
        let back = model.a_hat.mul_dense(dz.view())?;
        grads[l] = match &lc.input {
            LayerInput::Sparse(x) => x.transpose_mul_dense(back.view())?,
            LayerInput::Dense(h) => h.t().dot(&back),
        };
        if l > 0 {
            let mut dh = back.dot(&model.layers[l].weights().t());
            if let Some(mask) = &lc.mask {
                dh *= mask;
            }
            if lc.residual {
                dh += &d_out;
            }
            d_out = dh;
        }
    }
    Ok(grads)
}

/// Class probabilities with dropout off.
pub fn predict_proba(model: &GcnModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let mut rng = stream_rng(0, Stream::Dropout);
    let (logits, _) = model.forward(x, &mut rng, false)?;
    Ok(softmax(logits.view()))
}
