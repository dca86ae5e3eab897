//! Minimal dense neural-network toolkit: initialization, rectifier, inverted
//! dropout, masked softmax cross-entropy, Adam with coupled L2 decay, and a
//! central-difference gradient checker.

use ndarray::{Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::graph::CsrMatrix;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    pub fn apply(self, x: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Identity => x.clone(),
            Activation::Relu => relu(x.view()),
        }
    }
}

/// Independent random streams derived from one seed. Each layer draws from
/// its own stream, so adding a layer never shifts the draws of another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init(u32),
    Dropout,
    Shuffle,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init(layer) => 1 << 32 | u64::from(layer),
            Stream::Dropout => 2 << 32,
            Stream::Shuffle => 3 << 32,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Trainable weight matrix with its Adam moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParam {
    weights: Array2<f64>,
    adam_m: Array2<f64>,
    adam_v: Array2<f64>,
    step_count: u64,
}

impl DenseParam {
    pub fn new(weights: Array2<f64>) -> Self {
        let shape = weights.raw_dim();
        Self {
            weights,
            adam_m: Array2::zeros(shape),
            adam_v: Array2::zeros(shape),
            step_count: 0,
        }
    }

    /// Rebuilds a parameter mid-training, e.g. from a checkpoint.
    pub fn from_state(
        weights: Array2<f64>,
        adam_m: Array2<f64>,
        adam_v: Array2<f64>,
        step_count: u64,
    ) -> Result<Self> {
        check_dim("Adam first moment rows", weights.nrows(), adam_m.nrows())?;
        check_dim("Adam first moment cols", weights.ncols(), adam_m.ncols())?;
        check_dim("Adam second moment rows", weights.nrows(), adam_v.nrows())?;
        check_dim("Adam second moment cols", weights.ncols(), adam_v.ncols())?;
        Ok(Self {
            weights,
            adam_m,
            adam_v,
            step_count,
        })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weights
    }

    pub fn adam_m(&self) -> &Array2<f64> {
        &self.adam_m
    }

    pub fn adam_v(&self) -> &Array2<f64> {
        &self.adam_v
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn shape(&self) -> (usize, usize) {
        self.weights.dim()
    }

    /// One optimizer step with gradient `grad + weight_decay · W`.
    pub fn update(
        &mut self,
        grad: ArrayView2<'_, f64>,
        optimizer: Optimizer,
        learning_rate: f64,
        weight_decay: f64,
    ) -> Result<()> {
        check_dim("gradient rows", self.weights.nrows(), grad.nrows())?;
        check_dim("gradient cols", self.weights.ncols(), grad.ncols())?;
        self.step_count += 1;
        match optimizer {
            Optimizer::Sgd => {
                Zip::from(&mut self.weights).and(grad).for_each(|w, &g| {
                    *w -= learning_rate * (g + weight_decay * *w);
                });
            }
            Optimizer::Adam => {
                let t = self.step_count as i32;
                let c1 = 1.0 - BETA1.powi(t);
                let c2 = 1.0 - BETA2.powi(t);
                Zip::from(&mut self.weights)
                    .and(&mut self.adam_m)
                    .and(&mut self.adam_v)
                    .and(grad)
                    .for_each(|w, m, v, &g| {
                        let g = g + weight_decay * *w;
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *w -= learning_rate * m_hat / (v_hat.sqrt() + EPSILON);
                    });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Adam,
    /// Plain gradient descent, no momentum.
    Sgd,
}

/// Training hyperparameters. The JSON form uses exactly these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub epochs: usize,
    /// Minibatch size; `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub hidden_units: usize,
    /// GCN depth (number of propagation layers).
    pub layers: usize,
    /// SIGN aggregator count `r`.
    pub aggregators: usize,
    pub optimizer: Optimizer,
    /// Apply weight decay to the first layer only, as the reference GCN code does.
    pub decay_first_layer_only: bool,
    /// Residual connections on dimension-preserving hidden GCN layers.
    pub residual: bool,
    /// SIGN: binarize `A^k` before normalizing instead of using walk counts.
    pub binarize_aggregators: bool,
}

impl TrainConfig {
    /// Adam, lr 0.01, weight decay 5e-4, 2 layers of 16 hidden units,
    /// dropout 0.5, 200 full-batch epochs.
    pub fn gcn_default() -> Self {
        Self {
            learning_rate: 0.01,
            weight_decay: 5e-4,
            dropout: 0.5,
            epochs: 200,
            batch_size: None,
            seed: 0,
            hidden_units: 16,
            layers: 2,
            aggregators: 0,
            optimizer: Optimizer::Adam,
            decay_first_layer_only: false,
            residual: false,
            binarize_aggregators: false,
        }
    }

    /// Adam, lr 0.15, weight decay 1e-5, batch 512, r = 4 aggregators,
    /// 8 hidden units per branch, dropout 0.5, 50 epochs.
    pub fn sign_default() -> Self {
        Self {
            learning_rate: 0.15,
            weight_decay: 1e-5,
            dropout: 0.5,
            epochs: 50,
            batch_size: Some(512),
            seed: 0,
            hidden_units: 8,
            layers: 2,
            aggregators: 4,
            optimizer: Optimizer::Adam,
            decay_first_layer_only: false,
            residual: false,
            binarize_aggregators: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return fail(format!("learning_rate must be ≥ 0, got {}", self.learning_rate));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return fail(format!("weight_decay must be ≥ 0, got {}", self.weight_decay));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if self.epochs == 0 {
            return fail("epochs must be ≥ 1".into());
        }
        if self.batch_size == Some(0) {
            return fail("batch_size must be ≥ 1".into());
        }
        if self.hidden_units == 0 {
            return fail("hidden_units must be ≥ 1".into());
        }
        if self.layers == 0 {
            return fail("layers must be ≥ 1".into());
        }
        Ok(())
    }
}

/// Uniform on `±√(6/(f_in+f_out))`.
pub fn xavier_init(f_in: usize, f_out: usize, rng: &mut impl Rng) -> Array2<f64> {
    let bound = (6.0 / (f_in + f_out) as f64).sqrt();
    Array2::from_shape_simple_fn((f_in, f_out), || rng.random_range(-bound..=bound))
}

pub fn relu(x: ArrayView2<'_, f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Gradient through the rectifier; the subgradient at 0 is 0.
pub fn relu_backward(x: ArrayView2<'_, f64>, dy: ArrayView2<'_, f64>) -> Array2<f64> {
    Zip::from(x)
        .and(dy)
        .map_collect(|&x, &dy| if x > 0.0 { dy } else { 0.0 })
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

/// Mean negative log-likelihood over the vertices in `mask`, and its gradient
/// with respect to the logits (zero on unmasked rows).
pub fn softmax_xent_masked(
    logits: ArrayView2<'_, f64>,
    labels: &[usize],
    mask: &[usize],
) -> Result<(f64, Array2<f64>)> {
    check_dim("label count", logits.nrows(), labels.len())?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let c = logits.ncols();
    let scale = 1.0 / mask.len() as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for &i in mask {
        if i >= logits.nrows() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: logits.nrows(),
            });
        }
        let label = labels[i];
        if label >= c {
            return Err(Error::InvalidArgument(format!(
                "label {label} of vertex {i} is outside [0, {c})"
            )));
        }
        let row = logits.row(i);
        let top = argmax(row.iter().copied());
        let max = row[top];
        // log Σ exp(v − max) = ln(1 + rest), kept accurate when rest is tiny.
        let rest: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != top)
            .map(|(_, &v)| (v - max).exp())
            .sum();
        let log_sum = rest.ln_1p();
        loss += log_sum - (row[label] - max);
        let mut g = grad.row_mut(i);
        for j in 0..c {
            g[j] += scale * ((row[j] - max) - log_sum).exp();
        }
        g[label] -= scale;
    }
    Ok((loss * scale, grad))
}

/// Inverted dropout. Returns the output and the per-entry multiplier
/// (0 or `1/(1−p)`) needed by the backward pass.
pub fn dropout_forward(
    x: ArrayView2<'_, f64>,
    p: f64,
    rng: &mut impl Rng,
    training: bool,
) -> (Array2<f64>, Array2<f64>) {
    if !training || p == 0.0 {
        return (x.to_owned(), Array2::ones(x.raw_dim()));
    }
    let keep = 1.0 / (1.0 - p);
    let mut mask = Array2::zeros(x.raw_dim());
    let mut y = Array2::zeros(x.raw_dim());
    Zip::from(&mut y).and(&mut mask).and(&x).for_each(|y, m, &v| {
        // Branch-free: the draw is a coin flip the predictor cannot learn.
        *m = keep * f64::from(u8::from(rng.random::<f64>() >= p));
        *y = v * *m;
    });
    (y, mask)
}

/// Inverted dropout on the stored entries of a sparse matrix. Zero entries
/// would stay zero either way, so only stored ones draw from `rng`.
pub fn dropout_sparse(x: &CsrMatrix, p: f64, rng: &mut impl Rng) -> CsrMatrix {
    let keep = 1.0 / (1.0 - p);
    let mut out = x.clone();
    for v in out.values_mut() {
        *v = if rng.random::<f64>() < p { 0.0 } else { *v * keep };
    }
    out
}

/// One Adam step using the configured learning rate and weight decay.
pub fn adam_step(param: &mut DenseParam, grad: ArrayView2<'_, f64>, cfg: &TrainConfig) -> Result<()> {
    param.update(grad, Optimizer::Adam, cfg.learning_rate, cfg.weight_decay)
}

/// Largest relative error between `analytic` and central differences of `f`,
/// with denominator `max(|a|, |n|, 1e-8)`.
pub fn grad_check(
    mut f: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    analytic: &[f64],
    h: f64,
) -> f64 {
    assert_eq!(params.len(), analytic.len(), "gradient length must match parameters");
    let mut theta = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + h;
        let plus = f(&theta);
        theta[i] = orig - h;
        let minus = f(&theta);
        theta[i] = orig;
        let numeric = (plus - minus) / (2.0 * h);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    worst
}

/// Fraction of `idx` whose argmax logit equals the label; ties go to the
/// lowest class index.
pub fn accuracy(logits: ArrayView2<'_, f64>, labels: &[usize], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let correct = idx
        .iter()
        .filter(|&&i| argmax(logits.row(i).iter().copied()) == labels[i])
        .count();
    correct as f64 / idx.len() as f64
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(row: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, v) in row.into_iter().enumerate() {
        if v > best.1 {
            best = (j, v);
        }
    }
    best.0
}
