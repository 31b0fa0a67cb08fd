//! Archived social-media data, source registries and annotated training data.

mod annotations;
mod reactions;
mod sources;
mod split;
mod synth;
mod volumes;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use annotations::{
    load_annotated, parse_annotated, resolve_majority, write_annotations, AnnotatedCorpus,
    AnnotationRow, AnnotationTally,
};
pub use reactions::{
    load_reaction_shards, load_reactions, parse_reactions, write_reactions, IngestMode,
    ReactionLoad, RejectReason,
};
pub use sources::{load_sources, parse_sources, Attribution, SourceRegistry};
pub use split::{split_dataset, DatasetSplit, SplitRatios};
pub use synth::{
    signature_rule, synth_fixture, FixtureManifest, SynthConfig, SynthFixture,
};
pub use volumes::{
    bundled_source_volumes, load_source_volumes, parse_source_volumes, registry_from_volumes,
    SourceVolume, VolumeTotals,
};

use crate::labels::{Platform, ReactionType};

/// One reaction (Reddit comment or tweet) with its parent linkage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub platform: Platform,
    pub reaction_id: String,
    pub parent_id: String,
    pub source_key: String,
    pub reaction_text: String,
    /// Empty only for Twitter retweets that carry no parent text.
    #[serde(default)]
    pub parent_text: String,
    /// UTC epoch seconds.
    pub parent_created_at: i64,
    /// UTC epoch seconds.
    pub reaction_created_at: i64,
}

impl ReactionRecord {
    /// Seconds between the source post and the reaction.
    pub fn delay_secs(&self) -> i64 {
        self.reaction_created_at - self.parent_created_at
    }

    /// Twitter reaction without parent text (plain retweet or mention of an
    /// unarchived post).
    pub fn is_bare_retweet(&self) -> bool {
        self.platform == Platform::Twitter && self.parent_text.trim().is_empty()
    }

    pub fn to_sample(&self) -> PairedSample {
        PairedSample {
            parent_text: self.parent_text.clone(),
            reaction_text: self.reaction_text.clone(),
            gold_label: None,
        }
    }
}

/// Classifier input: reaction text plus the text it replies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedSample {
    pub parent_text: String,
    pub reaction_text: String,
    pub gold_label: Option<ReactionType>,
}

impl PairedSample {
    pub fn new(parent_text: impl Into<String>, reaction_text: impl Into<String>) -> Self {
        PairedSample {
            parent_text: parent_text.into(),
            reaction_text: reaction_text.into(),
            gold_label: None,
        }
    }

    pub fn labeled(mut self, label: ReactionType) -> Self {
        self.gold_label = Some(label);
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {message}")]
    Validation { line: u64, message: String },
    #[error("line {line}: duplicate source `{key}` on {platform}")]
    DuplicateSource { line: u64, platform: Platform, key: String },
    #[error("source `{key}` is registered for {registered_platform}, record is from {record_platform}")]
    PlatformMismatch {
        key: String,
        record_platform: Platform,
        registered_platform: Platform,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(line: u64, err: impl std::fmt::Display) -> Self {
        IngestError::Parse { line, message: err.to_string() }
    }
}

/// Physical 1-based line of a csv record. The csv reader's own line numbers
/// skip comment lines, and a record's byte offset starts before any comment
/// lines skipped ahead of it.
pub(crate) fn csv_line(text: &str, pos: Option<&csv::Position>) -> u64 {
    let Some(p) = pos else { return 0 };
    let mut byte = (p.byte() as usize).min(text.len());
    let mut line = text.as_bytes()[..byte].iter().filter(|&&b| b == b'\n').count() as u64 + 1;
    while let Some(rest) = text.get(byte..).filter(|r| r.starts_with('#') || r.starts_with('\n')) {
        match rest.find('\n') {
            Some(nl) => {
                byte += nl + 1;
                line += 1;
            }
            None => break,
        }
    }
    line
}
