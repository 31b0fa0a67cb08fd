//! The late-fusion reaction-type classifier: assembly, training,
//! prediction and persistence.

mod config;
mod network;
mod persist;
mod train;

use std::path::{Path, PathBuf};

pub use config::{FusionLayout, ModelConfig};
pub use network::{argmax, Gradients, Model, Prediction, TrainSummary};
pub use persist::{from_bytes, meta_path, to_bytes, FORMAT_VERSION, MAGIC};
pub use train::{inverse_frequency_weights, macro_f1, train, Dataset, EpochRecord, TrainHistory, TrainOptions};

use crate::fingerprint::Fingerprint;
use crate::nn::NnError;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("model file checksum mismatch (truncated or corrupted)")]
    Checksum,
    #[error("unsupported model format version {found} (supported: {supported})")]
    Version { found: u32, supported: u32 },
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{what} fingerprint mismatch: model has {expected}, input has {found}")]
    FingerprintMismatch { what: &'static str, expected: Fingerprint, found: Fingerprint },
    #[error("invalid model input: {0}")]
    Input(String),
    #[error("empty data: {0}")]
    EmptyData(String),
    #[error("model is untrained; call allow_untrained() to predict anyway")]
    Untrained,
    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error(transparent)]
    Nn(#[from] NnError),
}

impl ModelError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ModelError::Io { path: path.to_path_buf(), source }
    }
}
