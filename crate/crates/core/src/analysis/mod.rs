//! Credibility analytics over labeled reactions: type distributions per
//! source group, reaction-delay CDFs and Mann-Whitney U comparisons.

mod cdf;
mod compare;
mod distribution;
mod labeling;
mod mwu;

use std::path::{Path, PathBuf};

pub use cdf::{delay_cdf, CdfSeries, DEFAULT_STEP_SECS};
pub use compare::{compare_groups, AnalysisReport, CdfEntry, CompareOptions, DelayComparison, ProportionComparison};
pub use distribution::{frequent_types, type_distribution, TypeDistribution};
pub use labeling::{label_corpus, LabeledReaction, LabelingOutcome};
pub use mwu::{mann_whitney_u, MwuMethod, MwuMethodUsed, MwuResult, EXACT_MAX_PER_SAMPLE, EXACT_MAX_TOTAL};

use crate::ingest::IngestError;
use crate::labels::Platform;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("no reactions for group {group}{}", platform.map(|p| format!(" on {p}")).unwrap_or_default())]
    EmptyGroup { group: String, platform: Option<Platform> },
    #[error("empty sample: {0}")]
    EmptySample(String),
    #[error("not enough source groups: {0}")]
    InsufficientGroups(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl AnalysisError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        AnalysisError::Io { path: path.to_path_buf(), source }
    }
}
