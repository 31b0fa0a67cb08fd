//! Reaction-type classification for social-media reactions to news sources,
//! plus the credibility analytics built on top of it.
//!
//! The pipeline: [`ingest`] archived data, encode text pairs with
//! [`text`], classify with the late-fusion network in [`model`] (built on the
//! small layer library in [`nn`]), score it with [`metrics`], and compare
//! trusted and deceptive sources with [`analysis`].

pub mod analysis;
pub mod fingerprint;
pub mod ingest;
pub mod labels;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod text;

pub use fingerprint::Fingerprint;
pub use labels::{Platform, ReactionType, SourceClass, SourceGroup};

/// Coarse failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Contract,
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Text(#[from] text::TextError),
    #[error(transparent)]
    Nn(#[from] nn::NnError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use model::ModelError;
        match self {
            Error::Ingest(ingest::IngestError::InvalidArgument(_)) => ErrorKind::Usage,
            Error::Ingest(ingest::IngestError::PlatformMismatch { .. }) => ErrorKind::Contract,
            Error::Ingest(_) | Error::Text(_) => ErrorKind::Data,
            Error::Nn(_) => ErrorKind::Contract,
            Error::Model(ModelError::Diverged { .. }) => ErrorKind::Numeric,
            Error::Model(
                ModelError::FingerprintMismatch { .. }
                | ModelError::Nn(_)
                | ModelError::Input(_)
                | ModelError::Untrained,
            ) => ErrorKind::Contract,
            Error::Model(ModelError::InvalidConfig(_)) => ErrorKind::Usage,
            Error::Model(_) => ErrorKind::Data,
            Error::Metrics(_) => ErrorKind::Contract,
            Error::Analysis(analysis::AnalysisError::Model(_)) => ErrorKind::Contract,
            Error::Analysis(_) => ErrorKind::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
