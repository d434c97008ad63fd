//! Adam optimization, the sequential training loop and Top-1 evaluation.
//!
//! Training is deterministic given the seed: initialization is the caller's
//! (seeded) responsibility, shuffling uses a dedicated seeded generator, and
//! per-sample gradients inside a batch are reduced in stable sample order
//! even when they are computed concurrently.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::exec::ExecPolicy;
use crate::model::Model;

/// One labeled feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

/// Train/test splits sharing one feature dimension and label range.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub feature_dim: usize,
    pub n_classes: usize,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl LabeledDataset {
    pub fn validate(&self) -> Result<()> {
        for sample in self.train.iter().chain(&self.test) {
            if sample.features.len() != self.feature_dim {
                return Err(CoreError::InvalidArgument(format!(
                    "sample has {} features, dataset declares {}",
                    sample.features.len(),
                    self.feature_dim
                )));
            }
            if sample.label >= self.n_classes {
                return Err(CoreError::InvalidArgument(format!(
                    "label {} out of range for {} classes",
                    sample.label, self.n_classes
                )));
            }
        }
        Ok(())
    }
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Optimizer state: first/second moment estimates shaped like the flat
/// parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(param_count: usize, hyper: AdamHyper) -> Self {
        Self {
            step_count: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            hyper,
        }
    }
}

/// Standard Adam update with bias correction; increments the step count.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len()
        || params.len() != state.first_moment.len()
        || params.len() != state.second_moment.len()
    {
        return Err(CoreError::InvalidArgument(format!(
            "adam shapes disagree: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let h = state.hyper;
    let bias1 = 1.0 - h.beta1.powi(t);
    let bias2 = 1.0 - h.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.first_moment[i] = h.beta1 * state.first_moment[i] + (1.0 - h.beta1) * g;
        state.second_moment[i] = h.beta2 * state.second_moment[i] + (1.0 - h.beta2) * g * g;
        let m_hat = state.first_moment[i] / bias1;
        let v_hat = state.second_moment[i] / bias2;
        params[i] -= h.learning_rate * m_hat / (v_hat.sqrt() + h.epsilon);
    }
    Ok(())
}

/// Training schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamHyper,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 100, batch_size: 32, seed: 0, adam: AdamHyper::default() }
    }
}

/// Per-epoch telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_error: f64,
}

/// Trains the model in place on the train split, evaluating Top-1 error on
/// the test split after every epoch.
pub fn train(
    model: &mut Model,
    dataset: &LabeledDataset,
    config: &TrainConfig,
    policy: ExecPolicy,
) -> Result<Vec<EpochMetrics>> {
    dataset.validate()?;
    if dataset.train.is_empty() {
        return Err(CoreError::InvalidArgument("train split is empty".into()));
    }
    if config.batch_size == 0 {
        return Err(CoreError::InvalidArgument("batch size must be >= 1".into()));
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = model.params_flat();
    let mut adam = AdamState::new(params.len(), config.adam);
    let mut history = Vec::with_capacity(config.epochs);

    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let per_sample = policy.try_map_indexed(batch.len(), |i| {
                let sample = &dataset.train[batch[i]];
                model.loss_and_grad(&sample.features, sample.label, ExecPolicy::serial())
            })?;
            let scale = 1.0 / batch.len() as f64;
            let mut grad = vec![0.0; params.len()];
            for (loss, sample_grad) in &per_sample {
                loss_sum += loss;
                for (g, s) in grad.iter_mut().zip(sample_grad) {
                    *g += s * scale;
                }
            }
            adam_step(&mut params, &grad, &mut adam)?;
            model.set_params_flat(&params)?;
        }
        history.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / dataset.train.len() as f64,
            test_error: evaluate_top1(model, &dataset.test)?,
        });
    }
    Ok(history)
}

/// Fraction of samples whose argmax logit differs from the label; argmax
/// ties break toward the lowest class index.
pub fn evaluate_top1(model: &Model, split: &[Sample]) -> Result<f64> {
    if split.is_empty() {
        return Err(CoreError::InvalidArgument("evaluation split is empty".into()));
    }
    let mut errors = 0usize;
    for sample in split {
        let logits = model.forward(&sample.features)?;
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = i;
            }
        }
        if best != sample.label {
            errors += 1;
        }
    }
    Ok(errors as f64 / split.len() as f64)
}
