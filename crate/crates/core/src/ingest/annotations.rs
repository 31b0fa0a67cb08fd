use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IngestError, PairedSample};
use crate::labels::ReactionType;

/// One annotated item with the raw per-annotator votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub item_id: String,
    #[serde(default)]
    pub parent_text: String,
    #[serde(alias = "reaction_text")]
    pub text: String,
    /// `null` marks an annotator who did not label the item.
    pub votes: Vec<Option<ReactionType>>,
}

impl AnnotationRow {
    pub fn resolved_label(&self) -> Option<ReactionType> {
        resolve_majority(&self.votes)
    }
}

/// Label holding a strict majority (> 50%) of the cast votes, if any.
pub fn resolve_majority(votes: &[Option<ReactionType>]) -> Option<ReactionType> {
    let mut counts = [0usize; ReactionType::COUNT];
    let mut cast = 0;
    for v in votes.iter().flatten() {
        counts[v.index()] += 1;
        cast += 1;
    }
    counts
        .iter()
        .position(|&c| 2 * c > cast)
        .and_then(ReactionType::from_index)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTally {
    pub rows: usize,
    pub resolved: usize,
    pub no_majority: usize,
    pub unvoted: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotatedCorpus {
    pub item_ids: Vec<String>,
    /// Training pool: every sample has a gold label.
    pub samples: Vec<PairedSample>,
    pub tally: AnnotationTally,
}

impl AnnotatedCorpus {
    pub fn from_rows(rows: impl IntoIterator<Item = AnnotationRow>) -> Self {
        let mut out = AnnotatedCorpus::default();
        for row in rows {
            out.tally.rows += 1;
            if row.votes.iter().all(Option::is_none) {
                out.tally.unvoted += 1;
                continue;
            }
            match row.resolved_label() {
                Some(label) => {
                    out.tally.resolved += 1;
                    out.item_ids.push(row.item_id);
                    out.samples.push(PairedSample {
                        parent_text: row.parent_text,
                        reaction_text: row.text,
                        gold_label: Some(label),
                    });
                }
                None => out.tally.no_majority += 1,
            }
        }
        out
    }
}

pub fn load_annotated(path: impl AsRef<Path>) -> Result<AnnotatedCorpus, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_annotated(BufReader::new(file))
}

pub fn parse_annotated(reader: impl BufRead) -> Result<AnnotatedCorpus, IngestError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| IngestError::parse(line_no, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: AnnotationRow =
            serde_json::from_str(&line).map_err(|e| IngestError::parse(line_no, e))?;
        if row.text.trim().is_empty() {
            return Err(IngestError::Validation {
                line: line_no,
                message: format!("item `{}` has empty text", row.item_id),
            });
        }
        rows.push(row);
    }
    Ok(AnnotatedCorpus::from_rows(rows))
}

pub fn write_annotations(path: impl AsRef<Path>, rows: &[AnnotationRow]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for row in rows {
        let line = serde_json::to_string(row).expect("row serializes");
        writeln!(w, "{line}").map_err(|e| IngestError::io(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}
