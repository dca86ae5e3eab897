//! Trainable node classifiers: the graph convolutional network (plain and
//! residual) trained full-batch, and SIGN, whose neighbor aggregations are
//! precomputed so minibatches are exact row selections.
//!
//! Both models emit raw logits; softmax lives in the loss, and
//! [`predict_proba`] / [`SignModel::predict_proba`] apply it on request.

mod gcn;
mod sign;

use ndarray::{Array2, ArrayView2};
use rand::Rng;

pub use gcn::{gcn_backward, gcn_forward, gcn_residual_forward, predict_proba, GcnCache, GcnModel};
pub use sign::{
    sign_backward, sign_forward, sign_infer, sign_precompute, sign_precompute_with, SignCache,
    SignGradients, SignModel, SignPrecomputed,
};

use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::nn::{dropout_forward, DenseParam};

/// Dropout that skips allocating a mask when it is a no-op.
fn maybe_dropout(
    x: ArrayView2<'_, f64>,
    p: f64,
    rng: &mut impl Rng,
    training: bool,
) -> (Array2<f64>, Option<Array2<f64>>) {
    if training && p > 0.0 {
        let (y, mask) = dropout_forward(x, p, rng, training);
        (y, Some(mask))
    } else {
        (x.to_owned(), None)
    }
}

fn check_generation(cached: u64, current: u64) -> Result<()> {
    if cached == current {
        Ok(())
    } else {
        Err(Error::StaleCache { cached, current })
    }
}

fn store_param(ck: &mut Checkpoint, prefix: &str, p: &DenseParam) -> Result<()> {
    ck.insert(format!("{prefix}.weights"), p.weights().clone())?;
    ck.insert(format!("{prefix}.adam_m"), p.adam_m().clone())?;
    ck.insert(format!("{prefix}.adam_v"), p.adam_v().clone())?;
    Ok(())
}

fn load_param(ck: &Checkpoint, prefix: &str, step_count: u64) -> Result<DenseParam> {
    DenseParam::from_state(
        ck.require(&format!("{prefix}.weights"))?.clone(),
        ck.require(&format!("{prefix}.adam_m"))?.clone(),
        ck.require(&format!("{prefix}.adam_v"))?.clone(),
        step_count,
    )
}

fn meta_field<'a>(ck: &'a Checkpoint, key: &str) -> Result<&'a serde_json::Value> {
    ck.meta
        .get(key)
        .ok_or_else(|| Error::Checkpoint(format!("header is missing {key:?}")))
}

fn meta_steps(ck: &Checkpoint) -> Result<Vec<u64>> {
    Ok(serde_json::from_value(meta_field(ck, "step_counts")?.clone())?)
}
