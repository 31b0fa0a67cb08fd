use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IngestError, ReactionRecord};
use crate::labels::Platform;

/// What to do with a line that cannot be parsed at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IngestMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NegativeDelay,
    DuplicateId,
    PlatformMismatch,
    EmptyReaction,
    MissingParentText,
    Malformed,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NegativeDelay => "negative_delay",
            RejectReason::DuplicateId => "duplicate_id",
            RejectReason::PlatformMismatch => "platform_mismatch",
            RejectReason::EmptyReaction => "empty_reaction",
            RejectReason::MissingParentText => "missing_parent_text",
            RejectReason::Malformed => "malformed",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReactionLoad {
    pub records: Vec<ReactionRecord>,
    pub rejects: BTreeMap<RejectReason, usize>,
}

impl ReactionLoad {
    pub fn rejected(&self, reason: RejectReason) -> usize {
        self.rejects.get(&reason).copied().unwrap_or(0)
    }

    pub fn total_rejected(&self) -> usize {
        self.rejects.values().sum()
    }

    fn reject(&mut self, reason: RejectReason) {
        *self.rejects.entry(reason).or_default() += 1;
    }
}

fn validate(record: &ReactionRecord, platform: Platform) -> Option<RejectReason> {
    if record.platform != platform {
        Some(RejectReason::PlatformMismatch)
    } else if record.reaction_created_at < record.parent_created_at {
        Some(RejectReason::NegativeDelay)
    } else if record.reaction_text.trim().is_empty() {
        Some(RejectReason::EmptyReaction)
    } else if platform == Platform::Reddit && record.parent_text.trim().is_empty() {
        Some(RejectReason::MissingParentText)
    } else {
        None
    }
}

/// Reads newline-delimited JSON reaction records for one platform.
///
/// Invalid records (negative delay, duplicate id, ...) are rejected and
/// tallied in both modes; only unparseable lines depend on `mode`.
pub fn load_reactions(
    path: impl AsRef<Path>,
    platform: Platform,
    mode: IngestMode,
) -> Result<ReactionLoad, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_reactions(BufReader::new(file), platform, mode)
}

pub fn parse_reactions(
    reader: impl BufRead,
    platform: Platform,
    mode: IngestMode,
) -> Result<ReactionLoad, IngestError> {
    let mut out = ReactionLoad::default();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| IngestError::parse(line_no, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ReactionRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => match mode {
                IngestMode::Strict => return Err(IngestError::parse(line_no, e)),
                IngestMode::Lenient => {
                    out.reject(RejectReason::Malformed);
                    continue;
                }
            },
        };
        if let Some(reason) = validate(&record, platform) {
            out.reject(reason);
            continue;
        }
        if !seen.insert(record.reaction_id.clone()) {
            out.reject(RejectReason::DuplicateId);
            continue;
        }
        out.records.push(record);
    }
    Ok(out)
}

/// Parses shards in parallel and merges them ordered by `reaction_id`.
/// A duplicate id across shards keeps the copy from the earliest shard.
pub fn load_reaction_shards<P: AsRef<Path> + Sync>(
    paths: &[P],
    platform: Platform,
    mode: IngestMode,
) -> Result<ReactionLoad, IngestError> {
    let loads: Vec<ReactionLoad> = paths
        .par_iter()
        .map(|p| load_reactions(p, platform, mode))
        .collect::<Result<_, _>>()?;
    let mut merged = ReactionLoad::default();
    let mut tagged = Vec::new();
    for (shard, load) in loads.into_iter().enumerate() {
        for (reason, n) in load.rejects {
            *merged.rejects.entry(reason).or_default() += n;
        }
        tagged.extend(load.records.into_iter().map(|r| (shard, r)));
    }
    tagged.sort_by(|(sa, a), (sb, b)| a.reaction_id.cmp(&b.reaction_id).then(sa.cmp(sb)));
    for (_, record) in tagged {
        if merged
            .records
            .last()
            .is_some_and(|last| last.reaction_id == record.reaction_id)
        {
            merged.reject(RejectReason::DuplicateId);
        } else {
            merged.records.push(record);
        }
    }
    Ok(merged)
}

pub fn write_reactions(path: impl AsRef<Path>, records: &[ReactionRecord]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(w, "{line}").map_err(|e| IngestError::io(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, parent_at: i64, at: i64) -> String {
        format!(
            r#"{{"platform":"reddit","reaction_id":"{id}","parent_id":"p","source_key":"cnn.com","reaction_text":"ok","parent_text":"title","parent_created_at":{parent_at},"reaction_created_at":{at}}}"#
        )
    }

    #[test]
    fn three_valid_lines() {
        let text = [line("a", 0, 5), line("b", 0, 6), line("c", 10, 10)].join("\n");
        let load = parse_reactions(text.as_bytes(), Platform::Reddit, IngestMode::Strict).unwrap();
        assert_eq!(load.records.len(), 3);
        assert_eq!(load.total_rejected(), 0);
    }

    #[test]
    fn negative_delay_rejected_not_clamped() {
        let text = [line("a", 100, 50), line("b", 0, 1)].join("\n");
        let load = parse_reactions(text.as_bytes(), Platform::Reddit, IngestMode::Strict).unwrap();
        assert_eq!(load.records.len(), 1);
        assert_eq!(load.rejected(RejectReason::NegativeDelay), 1);
        assert!(load.records.iter().all(|r| r.delay_secs() >= 0));
    }

    #[test]
    fn malformed_line_strict_vs_lenient() {
        let text = format!("{}\nnot json\n{}", line("a", 0, 1), line("b", 0, 1));
        let err = parse_reactions(text.as_bytes(), Platform::Reddit, IngestMode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 2, .. }), "{err}");
        let load = parse_reactions(text.as_bytes(), Platform::Reddit, IngestMode::Lenient).unwrap();
        assert_eq!(load.records.len(), 2);
        assert_eq!(load.rejected(RejectReason::Malformed), 1);
    }

    #[test]
    fn duplicate_ids_and_wrong_platform() {
        let text = [line("a", 0, 1), line("a", 0, 2)].join("\n");
        let load = parse_reactions(text.as_bytes(), Platform::Reddit, IngestMode::Strict).unwrap();
        assert_eq!(load.records.len(), 1);
        assert_eq!(load.rejected(RejectReason::DuplicateId), 1);
        let load = parse_reactions(text.as_bytes(), Platform::Twitter, IngestMode::Strict).unwrap();
        assert_eq!(load.rejected(RejectReason::PlatformMismatch), 2);
    }

    #[test]
    fn twitter_may_omit_parent_text_reddit_may_not() {
        let tw = r#"{"platform":"twitter","reaction_id":"t","parent_id":"p","source_key":"nytimes","reaction_text":"RT wow","parent_created_at":0,"reaction_created_at":3}"#;
        let load = parse_reactions(tw.as_bytes(), Platform::Twitter, IngestMode::Strict).unwrap();
        assert_eq!(load.records.len(), 1);
        assert!(load.records[0].is_bare_retweet());
        let rd = tw.replace("twitter", "reddit");
        let load = parse_reactions(rd.as_bytes(), Platform::Reddit, IngestMode::Strict).unwrap();
        assert_eq!(load.rejected(RejectReason::MissingParentText), 1);
    }
}
