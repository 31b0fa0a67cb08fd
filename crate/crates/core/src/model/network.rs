use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{FusionLayout, ModelConfig};
use super::ModelError;
use crate::fingerprint::Fingerprint;
use crate::labels::ReactionType;
use crate::nn::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, embedding_backward, embedding_forward,
    maxpool1d_backward, maxpool1d_forward, relu_backward, relu_forward, softmax, Param, PoolOutput, SparseRows,
    Tensor, PAD_ROW,
};
use crate::text::{EmbeddingMatrix, Encoder, Normalizer, PairEncoding};

pub(crate) const EMBEDDING: usize = 0;
const CONV1_K: usize = 1;
const CONV1_B: usize = 2;
const CONV2_K: usize = 3;
const CONV2_B: usize = 4;
const VEC1_W: usize = 5;
const VEC1_B: usize = 6;
const VEC2_W: usize = 7;
const VEC2_B: usize = 8;
const FUSION_W: usize = 9;
const FUSION_B: usize = 10;
const OUTPUT_W: usize = 11;
const OUTPUT_B: usize = 12;
const TEXT_W: usize = 13;
const TEXT_B: usize = 14;

/// One prediction: the argmax label, its probability and the full
/// distribution in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: ReactionType,
    pub probability: f64,
    pub distribution: Vec<f64>,
}

/// Short training summary kept with the model for the metadata sidecar.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainSummary {
    pub epochs_run: usize,
    pub chosen_epoch: usize,
    pub best_dev_macro_f1: f64,
    pub chosen_train_loss: f64,
}

/// The late-fusion classifier: a convolutional tower over token ids and a
/// dense tower over lexicon features, joined before the output layers.
#[derive(Debug, Clone)]
pub struct Model {
    pub(crate) config: ModelConfig,
    pub(crate) params: Vec<Param>,
    pub(crate) vocab_fingerprint: Fingerprint,
    pub(crate) lexicon_fingerprint: Fingerprint,
    pub(crate) normalizer: Option<Normalizer>,
    pub(crate) label_order: Vec<ReactionType>,
    pub(crate) feature_dim: usize,
    pub(crate) trained: bool,
    pub(crate) untrained_ok: bool,
    pub(crate) summary: Option<TrainSummary>,
}

/// Gradients for one batch: the embedding table is row-sparse, every
/// other parameter dense. `features` is the gradient with respect to the
/// lexicon feature input.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub embedding: SparseRows,
    pub dense: Vec<Tensor>,
    pub features: Tensor,
}

impl Gradients {
    fn merge(&mut self, other: &Gradients) {
        self.embedding.merge(&other.embedding);
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            a.add_assign(b);
        }
    }
}

struct Activations {
    emb: Tensor,
    c1_pre: Tensor,
    c1: Tensor,
    c2_pre: Tensor,
    c2: Tensor,
    pool: PoolOutput,
    flat: Tensor,
    text_pre: Option<Tensor>,
    feats: Tensor,
    v1_pre: Tensor,
    v1: Tensor,
    v2_pre: Tensor,
    concat: Tensor,
    f_pre: Tensor,
    f: Tensor,
    mask: Option<Vec<f64>>,
    logits: Tensor,
}

fn reshape(t: Tensor, shape: &[usize]) -> Tensor {
    t.reshaped(shape).expect("element count preserved")
}

/// Row-wise concatenation of `[B, P]` and `[B, Q]`.
fn concat_cols(a: &Tensor, b: &Tensor) -> Tensor {
    let (batch, p) = (a.shape()[0], a.shape()[1]);
    let q = b.shape()[1];
    let mut out = Vec::with_capacity(batch * (p + q));
    for r in 0..batch {
        out.extend_from_slice(&a.data()[r * p..(r + 1) * p]);
        out.extend_from_slice(&b.data()[r * q..(r + 1) * q]);
    }
    Tensor::from_vec(&[batch, p + q], out).expect("shape matches")
}

fn split_cols(t: &Tensor, p: usize) -> (Tensor, Tensor) {
    let (batch, width) = (t.shape()[0], t.shape()[1]);
    let q = width - p;
    let (mut a, mut b) = (Vec::with_capacity(batch * p), Vec::with_capacity(batch * q));
    for row in t.data().chunks_exact(width) {
        a.extend_from_slice(&row[..p]);
        b.extend_from_slice(&row[p..]);
    }
    (
        Tensor::from_vec(&[batch, p], a).expect("shape matches"),
        Tensor::from_vec(&[batch, q], b).expect("shape matches"),
    )
}

impl Model {
    /// Assembles a freshly initialised network. Non-embedding weights are
    /// Glorot-uniform from `config.seed`, biases zero; the embedding table is
    /// copied from `embeddings` with the PAD row zeroed and frozen.
    pub fn build(config: ModelConfig, embeddings: &EmbeddingMatrix, encoder: &Encoder) -> Result<Model, ModelError> {
        config.validate()?;
        if embeddings.dim != config.emb_dim {
            return Err(ModelError::InvalidConfig(format!(
                "embedding rows have dimension {}, config expects {}",
                embeddings.dim, config.emb_dim
            )));
        }
        if embeddings.rows() != encoder.vocab().len() {
            return Err(ModelError::InvalidConfig(format!(
                "embedding table has {} rows, vocabulary has {} tokens",
                embeddings.rows(),
                encoder.vocab().len()
            )));
        }
        if encoder.seq_len() != config.seq_len {
            return Err(ModelError::InvalidConfig(format!(
                "encoder half length is {}, config expects {}",
                encoder.seq_len(),
                config.seq_len
            )));
        }
        let non_canonical = config.non_canonical();
        if !non_canonical.is_empty() {
            log::warn!("non-canonical architecture settings: {}", non_canonical.join(", "));
        }
        let feature_dim = encoder.feature_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut glorot = |name: &str, shape: &[usize], fan_in: usize, fan_out: usize| {
            Param::new(name, Tensor::glorot_uniform(shape, fan_in, fan_out, &mut rng))
        };
        let bias = |name: &str, n: usize| Param::new(name, Tensor::zeros(&[n]));

        let mut table = Tensor::from_vec(&[embeddings.rows(), embeddings.dim], embeddings.values.clone())?;
        table.data_mut()[PAD_ROW * config.emb_dim..(PAD_ROW + 1) * config.emb_dim].fill(0.0);
        let (f1, f2) = config.conv_filters;
        let (w1, w2) = config.kernel_widths;
        let (h1, h2) = config.vector_dense;
        let text_dim = config.text_out_dim();
        let pooled = config.pooled_len() * f2;
        let mut params = vec![
            Param::new("embedding", table).frozen(&[PAD_ROW]),
            glorot("conv1.kernel", &[w1, config.emb_dim, f1], w1 * config.emb_dim, w1 * f1),
            bias("conv1.bias", f1),
            glorot("conv2.kernel", &[w2, f1, f2], w2 * f1, w2 * f2),
            bias("conv2.bias", f2),
            glorot("vector1.weight", &[feature_dim, h1], feature_dim, h1),
            bias("vector1.bias", h1),
            glorot("vector2.weight", &[h1, h2], h1, h2),
            bias("vector2.bias", h2),
            glorot("fusion.weight", &[text_dim + h2, config.fusion_dense], text_dim + h2, config.fusion_dense),
            bias("fusion.bias", config.fusion_dense),
            glorot("output.weight", &[config.fusion_dense, config.n_classes], config.fusion_dense, config.n_classes),
            bias("output.bias", config.n_classes),
        ];
        if config.fusion_layout == FusionLayout::TextDense {
            params.push(glorot("text.weight", &[pooled, config.text_dense], pooled, config.text_dense));
            params.push(bias("text.bias", config.text_dense));
        }
        Ok(Model {
            label_order: ReactionType::ALL[..config.n_classes].to_vec(),
            config,
            params,
            vocab_fingerprint: encoder.vocab_fingerprint(),
            lexicon_fingerprint: encoder.lexicon_fingerprint(),
            normalizer: encoder.normalizer().cloned(),
            feature_dim,
            trained: false,
            untrained_ok: false,
            summary: None,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn vocab_fingerprint(&self) -> Fingerprint {
        self.vocab_fingerprint
    }

    pub fn lexicon_fingerprint(&self) -> Fingerprint {
        self.lexicon_fingerprint
    }

    pub fn normalizer(&self) -> Option<&Normalizer> {
        self.normalizer.as_ref()
    }

    pub fn label_order(&self) -> &[ReactionType] {
        &self.label_order
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn vocab_size(&self) -> usize {
        self.params[EMBEDDING].value.shape()[0]
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn summary(&self) -> Option<&TrainSummary> {
        self.summary.as_ref()
    }

    /// Permits [`Model::predict`] on a model that has not been trained.
    pub fn allow_untrained(&mut self) {
        self.untrained_ok = true;
    }

    /// Architecture fields that differ from the reference topology.
    pub fn warnings(&self) -> Vec<&'static str> {
        self.config.non_canonical()
    }

    /// Checks fingerprints and shapes of a batch of encodings.
    pub fn check_inputs(&self, batch: &[PairEncoding]) -> Result<(), ModelError> {
        let len = 2 * self.config.seq_len + 1;
        for (i, e) in batch.iter().enumerate() {
            if e.vocab_fingerprint != self.vocab_fingerprint {
                return Err(ModelError::FingerprintMismatch {
                    what: "vocabulary",
                    expected: self.vocab_fingerprint,
                    found: e.vocab_fingerprint,
                });
            }
            if e.lexicon_fingerprint != self.lexicon_fingerprint {
                return Err(ModelError::FingerprintMismatch {
                    what: "lexicon",
                    expected: self.lexicon_fingerprint,
                    found: e.lexicon_fingerprint,
                });
            }
            if e.ids.len() != len || e.features.len() != self.feature_dim {
                return Err(ModelError::Input(format!(
                    "sample {i}: {} ids and {} features, model expects {len} and {}",
                    e.ids.len(),
                    e.features.len(),
                    self.feature_dim
                )));
            }
        }
        Ok(())
    }

    fn value(&self, i: usize) -> &Tensor {
        &self.params[i].value
    }

    /// `dropout` carries the RNG for the training-time mask; `None` means inference.
    fn forward_chunk(&self, batch: &[&PairEncoding], dropout: Option<&mut ChaCha8Rng>) -> Result<Activations, ModelError> {
        let b = batch.len();
        let len = 2 * self.config.seq_len + 1;
        let ids: Vec<u32> = batch.iter().flat_map(|e| e.ids.iter().copied()).collect();
        let feats = Tensor::from_vec(&[b, self.feature_dim], batch.iter().flat_map(|e| e.features.iter().copied()).collect())?;

        let emb = embedding_forward(&ids, len, self.value(EMBEDDING))?;
        let c1_pre = conv1d_forward(&emb, self.value(CONV1_K), self.value(CONV1_B))?;
        let c1 = relu_forward(&c1_pre);
        let c2_pre = conv1d_forward(&c1, self.value(CONV2_K), self.value(CONV2_B))?;
        let c2 = relu_forward(&c2_pre);
        let pool = maxpool1d_forward(&c2, self.config.pool)?;
        let flat = reshape(pool.out.clone(), &[b, pool.out.len() / b.max(1)]);
        let (text_pre, text) = match self.config.fusion_layout {
            FusionLayout::Concat => (None, flat.clone()),
            FusionLayout::TextDense => {
                let pre = dense_forward(&flat, self.value(TEXT_W), self.value(TEXT_B))?;
                let out = relu_forward(&pre);
                (Some(pre), out)
            }
        };

        let v1_pre = dense_forward(&feats, self.value(VEC1_W), self.value(VEC1_B))?;
        let v1 = relu_forward(&v1_pre);
        let v2_pre = dense_forward(&v1, self.value(VEC2_W), self.value(VEC2_B))?;
        let v2 = relu_forward(&v2_pre);

        let concat = concat_cols(&text, &v2);
        let f_pre = dense_forward(&concat, self.value(FUSION_W), self.value(FUSION_B))?;
        let mut f = relu_forward(&f_pre);
        let rate = self.config.dropout_rate;
        let mask = match dropout {
            Some(rng) if rate > 0.0 => {
                let keep = 1.0 / (1.0 - rate);
                let m: Vec<f64> = (0..f.len()).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect();
                f.data_mut().iter_mut().zip(&m).for_each(|(v, k)| *v *= k);
                Some(m)
            }
            _ => None,
        };
        let logits = dense_forward(&f, self.value(OUTPUT_W), self.value(OUTPUT_B))?;
        Ok(Activations {
            emb,
            c1_pre,
            c1,
            c2_pre,
            c2,
            pool,
            flat,
            text_pre,
            feats,
            v1_pre,
            v1,
            v2_pre,
            concat,
            f_pre,
            f,
            mask,
            logits,
        })
    }

    fn backward_chunk(&self, batch: &[&PairEncoding], act: &Activations, grad_logits: &Tensor) -> Result<Gradients, ModelError> {
        let b = batch.len();
        let mut dense: Vec<Tensor> = self.params.iter().map(|p| Tensor::zeros(p.value.shape())).collect();

        let out = dense_backward(&act.f, self.value(OUTPUT_W), grad_logits)?;
        dense[OUTPUT_W] = out.dw;
        dense[OUTPUT_B] = out.db;
        let mut df = out.dx;
        if let Some(mask) = &act.mask {
            df.data_mut().iter_mut().zip(mask).for_each(|(g, k)| *g *= k);
        }
        let df_pre = relu_backward(&act.f_pre, &df);
        let fusion = dense_backward(&act.concat, self.value(FUSION_W), &df_pre)?;
        dense[FUSION_W] = fusion.dw;
        dense[FUSION_B] = fusion.db;
        let (dtext, dv2) = split_cols(&fusion.dx, self.config.text_out_dim());

        let dv2_pre = relu_backward(&act.v2_pre, &dv2);
        let vec2 = dense_backward(&act.v1, self.value(VEC2_W), &dv2_pre)?;
        dense[VEC2_W] = vec2.dw;
        dense[VEC2_B] = vec2.db;
        let dv1_pre = relu_backward(&act.v1_pre, &vec2.dx);
        let vec1 = dense_backward(&act.feats, self.value(VEC1_W), &dv1_pre)?;
        dense[VEC1_W] = vec1.dw;
        dense[VEC1_B] = vec1.db;

        let dflat = match (&act.text_pre, self.config.fusion_layout) {
            (Some(pre), FusionLayout::TextDense) => {
                let dpre = relu_backward(pre, &dtext);
                let text = dense_backward(&act.flat, self.value(TEXT_W), &dpre)?;
                dense[TEXT_W] = text.dw;
                dense[TEXT_B] = text.db;
                text.dx
            }
            _ => dtext,
        };
        let dpool = reshape(dflat, act.pool.out.shape());
        let dc2 = maxpool1d_backward(act.c2.shape(), &act.pool.argmax, &dpool);
        let dc2_pre = relu_backward(&act.c2_pre, &dc2);
        let conv2 = conv1d_backward(&act.c1, self.value(CONV2_K), &dc2_pre)?;
        dense[CONV2_K] = conv2.dk;
        dense[CONV2_B] = conv2.db;
        let dc1_pre = relu_backward(&act.c1_pre, &conv2.dx);
        let conv1 = conv1d_backward(&act.emb, self.value(CONV1_K), &dc1_pre)?;
        dense[CONV1_K] = conv1.dk;
        dense[CONV1_B] = conv1.db;
        let ids: Vec<u32> = batch.iter().flat_map(|e| e.ids.iter().copied()).collect();
        let embedding = embedding_backward(&ids, &conv1.dx)?;
        dense[EMBEDDING] = Tensor::zeros(&[0]);
        debug_assert_eq!(vec1.dx.shape(), [b, self.feature_dim]);
        Ok(Gradients { embedding, dense, features: vec1.dx })
    }

    fn chunks<'a>(&self, batch: &'a [PairEncoding]) -> Vec<Vec<&'a PairEncoding>> {
        batch.chunks(self.config.chunk_size).map(|c| c.iter().collect()).collect()
    }

    /// Class probabilities `[B, n_classes]`. Each row depends only on its own
    /// sample, so results do not depend on batch composition or threads.
    pub fn forward(&self, batch: &[PairEncoding]) -> Result<Tensor, ModelError> {
        self.check_inputs(batch)?;
        let k = self.config.n_classes;
        let parts: Vec<Result<Tensor, ModelError>> = self
            .chunks(batch)
            .par_iter()
            .map(|chunk| Ok(softmax(&self.forward_chunk(chunk, None)?.logits)?))
            .collect();
        let mut data = Vec::with_capacity(batch.len() * k);
        for part in parts {
            data.extend_from_slice(part?.data());
        }
        Ok(Tensor::from_vec(&[batch.len(), k], data)?)
    }

    /// Mean (weighted) cross-entropy and its exact gradients on one batch.
    /// `serial` disables chunk parallelism; the result is identical either way.
    pub fn loss_and_gradients(
        &self,
        batch: &[PairEncoding],
        gold: &[usize],
        class_weights: Option<&[f64]>,
        serial: bool,
    ) -> Result<(f64, Gradients), ModelError> {
        self.loss_and_gradients_with(batch, gold, class_weights, serial, None)
    }

    pub(crate) fn loss_and_gradients_with(
        &self,
        batch: &[PairEncoding],
        gold: &[usize],
        class_weights: Option<&[f64]>,
        serial: bool,
        dropout_seed: Option<u64>,
    ) -> Result<(f64, Gradients), ModelError> {
        self.check_inputs(batch)?;
        if gold.len() != batch.len() || batch.is_empty() {
            return Err(ModelError::Input(format!("{} labels for {} samples", gold.len(), batch.len())));
        }
        let total = batch.len() as f64;
        let chunks = self.chunks(batch);
        let size = self.config.chunk_size;
        let run = |(ci, chunk): (usize, &Vec<&PairEncoding>)| -> Result<(f64, Gradients), ModelError> {
            let labels = &gold[ci * size..ci * size + chunk.len()];
            let mut rng = dropout_seed.map(|s| ChaCha8Rng::seed_from_u64(s ^ (ci as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
            let act = self.forward_chunk(chunk, rng.as_mut())?;
            let loss = crate::nn::softmax_cross_entropy(&act.logits, labels, class_weights)?;
            let scale = chunk.len() as f64 / total;
            let mut grad = loss.grad;
            grad.data_mut().iter_mut().for_each(|g| *g *= scale);
            let grads = self.backward_chunk(chunk, &act, &grad)?;
            Ok((loss.loss * scale, grads))
        };
        let parts: Vec<Result<(f64, Gradients), ModelError>> = if serial {
            chunks.iter().enumerate().map(run).collect()
        } else {
            chunks.par_iter().enumerate().map(run).collect()
        };
        let mut iter = parts.into_iter();
        let (mut loss, mut grads) = iter.next().expect("nonempty batch")?;
        let mut features = vec![std::mem::replace(&mut grads.features, Tensor::zeros(&[0])).into_data()];
        for part in iter {
            let (l, g) = part?;
            loss += l;
            grads.merge(&g);
            features.push(g.features.into_data());
        }
        grads.features = Tensor::from_vec(&[batch.len(), self.feature_dim], features.concat())?;
        Ok((loss, grads))
    }

    /// Argmax label per sample; ties go to the earlier label.
    pub fn predict(&self, batch: &[PairEncoding]) -> Result<Vec<Prediction>, ModelError> {
        if !self.trained && !self.untrained_ok {
            return Err(ModelError::Untrained);
        }
        let probs = self.forward(batch)?;
        Ok(probs
            .data()
            .chunks_exact(self.config.n_classes)
            .map(|row| {
                let best = argmax(row);
                Prediction { label: self.label_order[best], probability: row[best], distribution: row.to_vec() }
            })
            .collect())
    }
}

/// Index of the first maximal element.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}
