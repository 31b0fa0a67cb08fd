use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::labels::ReactionType;
use crate::nn::OptimizerConfig;

/// Where the text tower joins the vector tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionLayout {
    /// Pooled, flattened text features are concatenated directly with the
    /// vector tower output.
    #[default]
    Concat,
    /// A dense + ReLU layer of `text_dense` units sits between pooling and
    /// the concatenation.
    TextDense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Tokens per half (L); the encoded sequence has 2L + 1 ids.
    pub seq_len: usize,
    pub emb_dim: usize,
    pub conv_filters: (usize, usize),
    pub kernel_widths: (usize, usize),
    pub pool: usize,
    pub vector_dense: (usize, usize),
    pub fusion_dense: usize,
    pub n_classes: usize,
    pub fusion_layout: FusionLayout,
    /// Width of the text-tower dense layer under [`FusionLayout::TextDense`].
    pub text_dense: usize,
    /// Inverted dropout on the fusion hidden layer while training.
    pub dropout_rate: f64,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    /// Samples per gradient chunk. Chunks may run in parallel; their
    /// gradients are summed in chunk order, so results never depend on the
    /// thread count.
    pub chunk_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    /// Weight each sample's loss by N / (K · n_class) over the training set.
    pub class_weights: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            seq_len: 100,
            emb_dim: 200,
            conv_filters: (100, 100),
            kernel_widths: (3, 3),
            pool: 3,
            vector_dense: (100, 100),
            fusion_dense: 100,
            n_classes: ReactionType::COUNT,
            fusion_layout: FusionLayout::Concat,
            text_dense: 100,
            dropout_rate: 0.0,
            seed: 0,
            optimizer: OptimizerConfig::default(),
            batch_size: 64,
            chunk_size: 16,
            max_epochs: 100,
            patience: 10,
            class_weights: false,
        }
    }
}

impl ModelConfig {
    /// Sequence length after both convolutions.
    pub fn conv_out_len(&self) -> usize {
        (2 * self.seq_len + 1)
            .saturating_sub(self.kernel_widths.0 - 1)
            .saturating_sub(self.kernel_widths.1 - 1)
    }

    pub fn pooled_len(&self) -> usize {
        self.conv_out_len() / self.pool.max(1)
    }

    /// Width of the text tower output that enters the concatenation.
    pub fn text_out_dim(&self) -> usize {
        match self.fusion_layout {
            FusionLayout::Concat => self.pooled_len() * self.conv_filters.1,
            FusionLayout::TextDense => self.text_dense,
        }
    }

    /// Architecture fields that differ from the reference topology.
    pub fn non_canonical(&self) -> Vec<&'static str> {
        let base = ModelConfig::default();
        let mut out = Vec::new();
        if self.emb_dim != base.emb_dim {
            out.push("emb_dim");
        }
        if self.conv_filters != base.conv_filters {
            out.push("conv_filters");
        }
        if self.pool != base.pool {
            out.push("pool");
        }
        if self.vector_dense != base.vector_dense {
            out.push("vector_dense");
        }
        if self.fusion_dense != base.fusion_dense {
            out.push("fusion_dense");
        }
        if self.n_classes != base.n_classes {
            out.push("n_classes");
        }
        if self.fusion_layout != base.fusion_layout {
            out.push("fusion_layout");
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        let positive = [
            ("seq_len", self.seq_len),
            ("emb_dim", self.emb_dim),
            ("conv_filters.0", self.conv_filters.0),
            ("conv_filters.1", self.conv_filters.1),
            ("kernel_widths.0", self.kernel_widths.0),
            ("kernel_widths.1", self.kernel_widths.1),
            ("pool", self.pool),
            ("vector_dense.0", self.vector_dense.0),
            ("vector_dense.1", self.vector_dense.1),
            ("fusion_dense", self.fusion_dense),
            ("text_dense", self.text_dense),
            ("batch_size", self.batch_size),
            ("chunk_size", self.chunk_size),
            ("max_epochs", self.max_epochs),
        ];
        for (name, v) in positive {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(2..=ReactionType::COUNT).contains(&self.n_classes) {
            return bad(format!("n_classes must be in 2..={}, got {}", ReactionType::COUNT, self.n_classes));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate));
        }
        let total = 2 * self.seq_len + 1;
        let after_first = total.checked_sub(self.kernel_widths.0 - 1).unwrap_or(0);
        if after_first < self.kernel_widths.1 || self.conv_out_len() < self.pool {
            return bad(format!(
                "sequence of {total} ids is too short for kernel widths {:?} and pool {}",
                self.kernel_widths, self.pool
            ));
        }
        if !(self.optimizer.lr > 0.0 && self.optimizer.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.optimizer.lr));
        }
        Ok(())
    }
}
