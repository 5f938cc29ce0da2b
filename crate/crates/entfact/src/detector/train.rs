//! Training loop: Adam, linear warmup, gradient-norm clipping, seeded
//! shuffling, best-validation checkpointing.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::kgraph::FactualGraph;
use crate::seeding::rng_for;

use super::backward::{backward, Gradients};
use super::model::{forward_doc, predict};
use super::{DetectorError, DetectorParams, ModelConfig, RunMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Fraction of total steps spent in linear warmup; constant rate after.
    pub warmup_fraction: f64,
    pub seed: u64,
    /// Global gradient-norm clip; `None` disables.
    pub grad_clip: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-5,
            batch_size: 8,
            epochs: 10,
            warmup_fraction: 0.10,
            seed: 0,
            grad_clip: Some(1.0),
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.learning_rate < 0.0
            || !(0.0..1.0).contains(&self.warmup_fraction)
            || self.batch_size == 0
        {
            return Err(DetectorError::InvalidConfig(
                "learning_rate must be >= 0, warmup_fraction in [0,1), batch_size > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-document loss over the epoch's batches.
    pub train_loss: f64,
    pub valid_accuracy: f64,
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// The best-validation checkpoint (final parameters if validation is empty).
    pub params: DetectorParams,
    pub history: Vec<EpochStats>,
}

struct Adam {
    m: Gradients,
    v: Gradients,
    t: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    fn new(params: &DetectorParams, config: &TrainConfig) -> Adam {
        Adam {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            t: 0,
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: config.epsilon,
        }
    }

    fn step(&mut self, params: &mut DetectorParams, grads: &Gradients, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let g_slices = grads.slices();
        let mut m_slices = self.m.slices_mut();
        let mut v_slices = self.v.slices_mut();
        let mut p_slices = params.slices_mut();
        for (((g, m), v), p) in g_slices
            .iter()
            .zip(m_slices.iter_mut())
            .zip(v_slices.iter_mut())
            .zip(p_slices.iter_mut())
        {
            for i in 0..g.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}

fn accuracy(
    docs: &[Document],
    graphs: &[FactualGraph],
    params: &DetectorParams,
) -> Result<f64, DetectorError> {
    if docs.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for (d, g) in docs.iter().zip(graphs) {
        if predict(d, g, params)?.label == d.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / docs.len() as f64)
}

/// Trains a fresh detector. Graphs align with documents index-wise; the
/// best-validation parameters are returned together with per-epoch history.
pub fn train(
    train_docs: &[Document],
    train_graphs: &[FactualGraph],
    valid_docs: &[Document],
    valid_graphs: &[FactualGraph],
    model_config: &ModelConfig,
    config: &TrainConfig,
) -> Result<TrainOutcome, DetectorError> {
    if train_docs.is_empty() {
        return Err(DetectorError::EmptyDataset);
    }
    let params = DetectorParams::init(model_config, train_graphs, train_docs, config.seed)?;
    train_from(params, train_docs, train_graphs, valid_docs, valid_graphs, config)
}

/// Trains starting from given parameters (e.g. after loading pretrained
/// embeddings into the table).
pub fn train_from(
    params: DetectorParams,
    train_docs: &[Document],
    train_graphs: &[FactualGraph],
    valid_docs: &[Document],
    valid_graphs: &[FactualGraph],
    config: &TrainConfig,
) -> Result<TrainOutcome, DetectorError> {
    config.validate()?;
    if train_docs.is_empty() {
        return Err(DetectorError::EmptyDataset);
    }
    if train_docs.len() != train_graphs.len() || valid_docs.len() != valid_graphs.len() {
        return Err(DetectorError::ShapeMismatch {
            context: "documents and graphs must align".into(),
        });
    }

    let mut params = params;
    let mut adam = Adam::new(&params, config);
    let mut shuffle_rng = rng_for(config.seed, "shuffle");
    let mut dropout_rng = rng_for(config.seed, "dropout");

    let n = train_docs.len();
    let batches_per_epoch = n.div_ceil(config.batch_size);
    let total_steps = (config.epochs * batches_per_epoch) as u64;
    let warmup_steps = (config.warmup_fraction * total_steps as f64).floor() as u64;

    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, DetectorParams)> = None;
    let mut step = 0u64;

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            step += 1;
            let lr = if warmup_steps > 0 && step <= warmup_steps {
                config.learning_rate * step as f64 / warmup_steps as f64
            } else {
                config.learning_rate
            };

            let mut grads = Gradients::zeros_like(&params);
            for &idx in batch {
                let fwd = forward_doc(
                    &train_docs[idx],
                    &train_graphs[idx],
                    &params,
                    RunMode::Train,
                    Some(&mut dropout_rng),
                )?;
                loss_sum += fwd.loss(
                    params.config.entity_class_weights,
                    params.config.use_graph,
                );
                backward(&fwd, &params, &mut grads);
            }
            grads.scale(1.0 / batch.len() as f64);
            if let Some(clip) = config.grad_clip {
                let norm = grads.global_norm();
                if norm > clip {
                    grads.scale(clip / norm);
                }
            }
            adam.step(&mut params, &grads, lr);
        }

        let valid_accuracy = accuracy(valid_docs, valid_graphs, &params)?;
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / n as f64,
            valid_accuracy,
        });
        let improved = match &best {
            Some((acc, _)) => valid_accuracy > *acc,
            None => true,
        };
        if improved {
            best = Some((valid_accuracy, params.clone()));
        }
    }

    let params = if valid_docs.is_empty() {
        params
    } else {
        best.map(|(_, p)| p).unwrap_or(params)
    };
    Ok(TrainOutcome { params, history })
}
