use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{argmax, Model, TrainSummary, EMBEDDING};
use super::ModelError;
use crate::ingest::PairedSample;
use crate::labels::ReactionType;
use crate::metrics::{confusion, prf};
use crate::nn::{create_optimizer, Param, Tensor};
use crate::text::{Encoder, PairEncoding};

/// Encoded samples with their gold labels.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub encodings: Vec<PairEncoding>,
    pub labels: Vec<ReactionType>,
}

impl Dataset {
    pub fn new(encodings: Vec<PairEncoding>, labels: Vec<ReactionType>) -> Result<Self, ModelError> {
        if encodings.len() != labels.len() {
            return Err(ModelError::Input(format!("{} encodings but {} labels", encodings.len(), labels.len())));
        }
        Ok(Dataset { encodings, labels })
    }

    /// Encodes the labeled samples; unlabeled ones are skipped.
    pub fn from_samples(encoder: &Encoder, samples: &[PairedSample]) -> Self {
        let labeled: Vec<PairedSample> = samples.iter().filter(|s| s.gold_label.is_some()).cloned().collect();
        let labels = labeled.iter().map(|s| s.gold_label.expect("filtered")).collect();
        Dataset { encodings: encoder.encode_batch(&labeled), labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainOptions {
    /// Process gradient chunks sequentially instead of in parallel.
    pub serial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_macro_f1: f64,
    /// Excluded from serialized output so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_secs: f64,
}

/// Wall time is ignored: two records are equal when the training outcome is.
impl PartialEq for EpochRecord {
    fn eq(&self, other: &Self) -> bool {
        self.epoch == other.epoch && self.train_loss == other.train_loss && self.dev_macro_f1 == other.dev_macro_f1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Earliest epoch with the highest dev macro-F1.
    pub chosen_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.chosen_epoch - 1]
    }
}

fn label_indices(model: &Model, labels: &[ReactionType]) -> Result<Vec<usize>, ModelError> {
    labels
        .iter()
        .map(|l| {
            model
                .label_order()
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| ModelError::Input(format!("label `{l}` is outside the model's {} classes", model.label_order().len())))
        })
        .collect()
}

/// `N / (K · n_k)` per class; classes absent from training get weight 1.
pub fn inverse_frequency_weights(gold: &[usize], classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; classes];
    gold.iter().for_each(|&g| counts[g] += 1);
    counts
        .iter()
        .map(|&c| if c == 0 { 1.0 } else { gold.len() as f64 / (classes * c) as f64 })
        .collect()
}

/// Macro-F1 of the model's argmax predictions on `data`.
pub fn macro_f1(model: &Model, data: &Dataset) -> Result<f64, ModelError> {
    let probs = model.forward(&data.encodings)?;
    let preds: Vec<ReactionType> = probs
        .data()
        .chunks_exact(model.config().n_classes)
        .map(|row| model.label_order()[argmax(row)])
        .collect();
    let matrix = confusion(&preds, &data.labels).map_err(|e| ModelError::Input(e.to_string()))?;
    Ok(prf(&matrix).macro_f1)
}

fn snapshot(params: &[Param]) -> Vec<Tensor> {
    params.iter().map(|p| p.value.clone()).collect()
}

/// Mini-batch training on softmax cross-entropy with per-epoch seeded
/// shuffling and early stopping on dev macro-F1. Returns the parameters of
/// the chosen (best) epoch.
pub fn train(mut model: Model, train: &Dataset, dev: &Dataset, options: &TrainOptions) -> Result<(Model, TrainHistory), ModelError> {
    if train.is_empty() || dev.is_empty() {
        return Err(ModelError::EmptyData(format!("train has {} samples, dev has {}", train.len(), dev.len())));
    }
    model.check_inputs(&train.encodings)?;
    model.check_inputs(&dev.encodings)?;
    let config = model.config().clone();
    let gold = label_indices(&model, &train.labels)?;
    label_indices(&model, &dev.labels)?;
    let weights = config.class_weights.then(|| inverse_frequency_weights(&gold, config.n_classes));
    let mut optimizer = create_optimizer(&config.optimizer)?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed_0001));
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut history = TrainHistory { epochs: Vec::new(), chosen_epoch: 0, stopped_early: false };
    let mut best: Option<(f64, Vec<Tensor>)> = None;
    let mut since_best = 0;
    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for (step, idx) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<PairEncoding> = idx.iter().map(|&i| train.encodings[i].clone()).collect();
            let labels: Vec<usize> = idx.iter().map(|&i| gold[i]).collect();
            let dropout_seed = (config.dropout_rate > 0.0)
                .then(|| config.seed ^ ((epoch as u64) << 32) ^ step as u64);
            let (loss, grads) =
                model.loss_and_gradients_with(&batch, &labels, weights.as_deref(), options.serial, dropout_seed)?;
            if !loss.is_finite() {
                return Err(ModelError::Diverged { epoch, batch: step, loss });
            }
            loss_sum += loss * idx.len() as f64;
            let params = model.params_mut();
            for (i, (p, g)) in params.iter_mut().zip(grads.dense).enumerate() {
                if i == EMBEDDING {
                    p.zero_grad();
                    grads.embedding.scatter_into(&mut p.grad);
                } else {
                    p.grad = g;
                }
            }
            let mut refs: Vec<&mut Param> = params.iter_mut().collect();
            optimizer.step(&mut refs);
        }
        let train_loss = loss_sum / train.len() as f64;
        let dev_macro_f1 = macro_f1(&model, dev)?;
        let wall_secs = started.elapsed().as_secs_f64();
        log::info!("epoch {epoch}: train loss {train_loss:.5}, dev macro-F1 {dev_macro_f1:.4} ({wall_secs:.1}s)");
        history.epochs.push(EpochRecord { epoch, train_loss, dev_macro_f1, wall_secs });
        if best.as_ref().is_none_or(|(f1, _)| dev_macro_f1 > *f1) {
            best = Some((dev_macro_f1, snapshot(model.params())));
            history.chosen_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                history.stopped_early = epoch < config.max_epochs;
                break;
            }
        }
    }
    if let Some((_, values)) = best {
        for (p, v) in model.params_mut().iter_mut().zip(values) {
            p.value = v;
            p.zero_grad();
        }
    }
    let chosen = history.best().clone();
    model.trained = true;
    model.summary = Some(TrainSummary {
        epochs_run: history.epochs.len(),
        chosen_epoch: history.chosen_epoch,
        best_dev_macro_f1: chosen.dev_macro_f1,
        chosen_train_loss: chosen.train_loss,
    });
    Ok((model, history))
}
