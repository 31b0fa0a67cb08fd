use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::ingest::{Attribution, ReactionRecord, SourceRegistry};
use crate::labels::{ReactionType, SourceClass};
use crate::model::Model;
use crate::text::Encoder;

/// A reaction with its predicted type and its source's class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledReaction {
    #[serde(flatten)]
    pub record: ReactionRecord,
    pub reaction_type: ReactionType,
    pub probability: f64,
    pub source_class: SourceClass,
}

impl LabeledReaction {
    pub fn delay_secs(&self) -> i64 {
        self.record.delay_secs()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelingOutcome {
    pub labeled: Vec<LabeledReaction>,
    /// Records whose source is not in the registry.
    pub unattributed: usize,
}

/// Encodes and labels every attributable record, in input order.
pub fn label_corpus(
    model: &Model,
    encoder: &Encoder,
    records: &[ReactionRecord],
    registry: &SourceRegistry,
) -> Result<LabelingOutcome, AnalysisError> {
    let mut kept = Vec::with_capacity(records.len());
    let mut unattributed = 0;
    for record in records {
        match registry.resolve(record)? {
            Attribution::Class(class) => kept.push((record, class)),
            Attribution::Unattributed => unattributed += 1,
        }
    }
    if kept.is_empty() {
        return Ok(LabelingOutcome { labeled: Vec::new(), unattributed });
    }
    let samples: Vec<_> = kept.iter().map(|(r, _)| r.to_sample()).collect();
    let predictions = model.predict(&encoder.encode_batch(&samples))?;
    let labeled = kept
        .into_iter()
        .zip(predictions)
        .map(|((record, source_class), p)| LabeledReaction {
            record: record.clone(),
            reaction_type: p.label,
            probability: p.probability,
            source_class,
        })
        .collect();
    Ok(LabelingOutcome { labeled, unattributed })
}
