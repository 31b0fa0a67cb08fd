//! Text pairs → padded token-id sequences and normalized lexicon features.

mod embeddings;
mod encode;
mod lexicon;
mod normalize;
mod tokenize;
mod vocab;

use std::path::{Path, PathBuf};

pub use embeddings::{load_embeddings, read_embeddings, EmbeddingMatrix, RowSource, EMBEDDING_DIM};
pub use encode::{encode_pair, Encoder, PairEncoding};
pub use lexicon::{CategoryLexicon, LexiconEntry};
pub use normalize::Normalizer;
pub use tokenize::{tokenize, MENTION_TOKEN, NUM_TOKEN, URL_TOKEN};
pub use vocab::{Vocabulary, PAD_ID, RESERVED, SEP_ID, UNK_ID};

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("cannot fit a normalizer on an empty set")]
    EmptyFit,
    #[error("expected dimension {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl TextError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        TextError::Io { path: path.to_path_buf(), source }
    }
}
