use std::path::{Path, PathBuf};
use std::process::ExitCode;

use reactscope::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] reactscope::Error),
}

macro_rules! from_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

from_core!(
    reactscope::ingest::IngestError,
    reactscope::text::TextError,
    reactscope::model::ModelError,
    reactscope::metrics::MetricsError,
    reactscope::analysis::AnalysisError
);

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            CliError::Usage(_) => ErrorKind::Usage,
            CliError::Io { .. } => ErrorKind::Data,
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(exit_status(self.kind()))
    }
}

pub fn exit_status(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Contract => 4,
        ErrorKind::Numeric => 5,
    }
}
