//! The training loop: shuffled mini-batches, Adam updates, per-epoch dev
//! accuracy, and best-epoch selection.
//!
//! Batch gradients are the mean of per-instance gradients. Within a batch
//! the instances are processed in fixed chunks whose partial sums are
//! reduced in chunk order, so reproducible mode is bitwise deterministic
//! regardless of how many threads run; non-reproducible mode lets the
//! reduction order float for a little extra speed.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Mode, TrainInstance};
use crate::encoder::{decode_position, encode, DecodeMode, EncodeError, EncodingConfig, InputMatrix, TargetVector};
use crate::nn::{loss, AdamConfig, AdamState, Gradients, ModelParams, NnError};
use crate::splitmix64;

const REDUCE_CHUNK: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRunConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub hidden: usize,
    pub dropout_rate: f64,
    pub optimizer: AdamConfig,
    pub encoding: EncodingConfig,
    pub model_tag: Mode,
    pub reproducible: bool,
    /// Decode mode used for the per-epoch dev accuracy.
    pub dev_decode: DecodeMode,
}

impl Default for TrainRunConfig {
    fn default() -> Self {
        TrainRunConfig {
            epochs: 10,
            batch_size: 128,
            seed: 0,
            hidden: 64,
            dropout_rate: 0.2,
            optimizer: AdamConfig::default(),
            encoding: EncodingConfig::default(),
            model_tag: Mode::Cfm,
            reproducible: true,
            dev_decode: DecodeMode::Constrained,
        }
    }
}

/// One epoch of the training record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_train_loss: f64,
    pub dev_accuracy: f64,
    pub wall_secs: f64,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub params: ModelParams<f32>,
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("{0}")]
    InvalidConfig(String),
    #[error("epoch {epoch}, batch {batch}: {source}")]
    Numeric {
        epoch: usize,
        batch: usize,
        #[source]
        source: NnError,
    },
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Correct/total counters from an accuracy evaluation. Instances that do
/// not fit the model's `max_len` stay in the denominator as errors and are
/// reported separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub correct: u64,
    pub total: u64,
    pub too_long: u64,
}

impl EvalCounts {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

fn derive_seed(seed: u64, epoch: u64, idx: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ epoch) ^ idx)
}

struct Encoded {
    matrix: InputMatrix,
    target: TargetVector,
}

fn encode_all(
    instances: &[TrainInstance],
    cfg: &EncodingConfig,
) -> Result<Vec<Encoded>, EncodeError> {
    instances
        .iter()
        .map(|inst| {
            let (matrix, target) = encode(inst, cfg)?;
            Ok(Encoded { matrix, target })
        })
        .collect()
}

fn instance_pass(
    params: &ModelParams<f32>,
    enc: &Encoded,
    rng_seed: u64,
) -> Result<(Gradients<f32>, f64), NnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (probs, cache) = params.forward_training(&enc.matrix, enc.matrix.len(), &mut rng)?;
    let l = loss(&probs, &enc.target) as f64;
    let grads = params.backward(&cache, &enc.target);
    Ok((grads, l))
}

fn chunk_pass(
    params: &ModelParams<f32>,
    encoded: &[Encoded],
    chunk: &[usize],
    seed: u64,
    epoch: u64,
) -> Result<(Gradients<f32>, f64), NnError> {
    let mut grads = Gradients::zeros_like(params);
    let mut loss_sum = 0.0;
    for &idx in chunk {
        let (g, l) = instance_pass(params, &encoded[idx], derive_seed(seed, epoch, idx as u64))?;
        grads.add_assign(&g);
        loss_sum += l;
    }
    Ok((grads, loss_sum))
}

/// Index of the record with the highest dev accuracy; ties and NaNs resolve
/// to the earliest epoch.
pub(crate) fn best_epoch_index(records: &[EpochRecord]) -> usize {
    let mut best = 0;
    for (i, rec) in records.iter().enumerate() {
        if rec.dev_accuracy > records[best].dev_accuracy {
            best = i;
        }
    }
    best
}

/// Run the full training loop and return the parameters from the epoch with
/// the best dev accuracy, along with the complete per-epoch record.
pub fn train(
    train_set: &[TrainInstance],
    dev: &[TrainInstance],
    cfg: &TrainRunConfig,
) -> Result<TrainOutcome, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(TrainError::InvalidConfig(
            "epochs and batch_size must be at least 1".into(),
        ));
    }

    let encoded = encode_all(train_set, &cfg.encoding)?;
    let mut params: ModelParams<f32> =
        ModelParams::init(cfg.hidden, cfg.dropout_rate, cfg.encoding, cfg.seed);
    let mut adam = AdamState::new(cfg.optimizer, &params);

    let mut records: Vec<EpochRecord> = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, ModelParams<f32>, usize)> = None;
    let mut indices: Vec<usize> = (0..encoded.len()).collect();

    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        let mut shuffle_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64, u64::MAX));
        indices.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for (batch_idx, batch) in indices.chunks(cfg.batch_size).enumerate() {
            let numeric = |source| TrainError::Numeric {
                epoch,
                batch: batch_idx,
                source,
            };
            let (mut grads, batch_loss) = if cfg.reproducible {
                // fixed chunking, partial sums combined in chunk order
                let partials: Vec<(Gradients<f32>, f64)> = batch
                    .par_chunks(REDUCE_CHUNK)
                    .map(|chunk| chunk_pass(&params, &encoded, chunk, cfg.seed, epoch as u64))
                    .collect::<Result<_, _>>()
                    .map_err(numeric)?;
                let mut total = Gradients::zeros_like(&params);
                let mut l = 0.0;
                for (g, gl) in partials {
                    total.add_assign(&g);
                    l += gl;
                }
                (total, l)
            } else {
                batch
                    .par_chunks(REDUCE_CHUNK)
                    .map(|chunk| chunk_pass(&params, &encoded, chunk, cfg.seed, epoch as u64))
                    .try_reduce(
                        || (Gradients::zeros_like(&params), 0.0),
                        |(mut a, la), (b, lb)| {
                            a.add_assign(&b);
                            Ok((a, la + lb))
                        },
                    )
                    .map_err(numeric)?
            };
            grads.scale(1.0 / batch.len() as f32);
            adam.step(&mut params, &grads);
            loss_sum += batch_loss;
        }

        let dev_accuracy = evaluate_accuracy(&params, dev, cfg.dev_decode).accuracy();
        records.push(EpochRecord {
            epoch,
            mean_train_loss: loss_sum / encoded.len() as f64,
            dev_accuracy,
            wall_secs: started.elapsed().as_secs_f64(),
        });
        let improved = match &best {
            None => true,
            Some((best_acc, _, _)) => dev_accuracy > *best_acc,
        };
        if improved {
            best = Some((dev_accuracy, params.clone(), epoch));
        }
    }

    let (_, best_params, best_epoch) = best.expect("at least one epoch ran");
    debug_assert_eq!(best_epoch, best_epoch_index(&records) + 1);
    Ok(TrainOutcome {
        params: best_params,
        records,
        best_epoch,
    })
}

/// Predicted stress position for one instance; `None` when the instance
/// does not fit the model or no legal position exists.
pub fn predict(
    params: &ModelParams<f32>,
    instance: &TrainInstance,
    decode: DecodeMode,
) -> Option<usize> {
    let (matrix, _) = encode(instance, &params.cfg).ok()?;
    let probs = params.infer(&matrix, matrix.len()).ok()?;
    decode_position(&probs, instance.input(), decode).ok()
}

/// Predictions aligned with `instances`, evaluated in parallel.
pub fn predict_all(
    params: &ModelParams<f32>,
    instances: &[TrainInstance],
    decode: DecodeMode,
) -> Vec<Option<usize>> {
    instances
        .par_iter()
        .map(|inst| predict(params, inst, decode))
        .collect()
}

/// Exact-match accuracy of the model over an instance list.
pub fn evaluate_accuracy(
    params: &ModelParams<f32>,
    instances: &[TrainInstance],
    decode: DecodeMode,
) -> EvalCounts {
    instances
        .par_iter()
        .map(|inst| {
            let mut counts = EvalCounts {
                total: 1,
                ..EvalCounts::default()
            };
            if inst.len() > params.cfg.max_len {
                counts.too_long = 1;
            } else if predict(params, inst, decode) == Some(inst.target()) {
                counts.correct = 1;
            }
            counts
        })
        .reduce(EvalCounts::default, |a, b| EvalCounts {
            correct: a.correct + b.correct,
            total: a.total + b.total,
            too_long: a.too_long + b.too_long,
        })
}

/// Run settings and results, serialized as JSON next to every trained
/// model. `settings` mirrors the CLI flag names, so a manifest can be
/// replayed as a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub settings: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_counts: Option<InstanceCounts>,
    #[serde(default)]
    pub records: Vec<EpochRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_epoch: Option<usize>,
    /// Digest of the reproducible part of this manifest (wall clock
    /// excluded); also embedded in the model file header.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InstanceCounts {
    pub train: usize,
    pub dev: usize,
    pub duplicates_removed: u64,
    pub too_long: u64,
}
