use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::{csv_line, IngestError, ReactionRecord};
use crate::labels::{Platform, SourceClass};

#[derive(Debug, Deserialize)]
struct SourceRow {
    platform: String,
    key: String,
    class: String,
}

/// Source key → credibility class, per platform. Keys are stored lower-cased.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceRegistry {
    entries: HashMap<(Platform, String), SourceClass>,
}

/// Outcome of attributing a reaction to a source class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attribution {
    Class(SourceClass),
    Unattributed,
}

impl SourceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        platform: Platform,
        key: &str,
        class: SourceClass,
    ) -> Result<(), IngestError> {
        let k = key.trim().to_lowercase();
        if self.entries.contains_key(&(platform, k.clone())) {
            return Err(IngestError::DuplicateSource { line: 0, platform, key: k });
        }
        self.entries.insert((platform, k), class);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, platform: Platform, key: &str) -> Option<SourceClass> {
        self.entries.get(&(platform, key.trim().to_lowercase())).copied()
    }

    /// Number of sources per class on one platform.
    pub fn count(&self, platform: Platform, class: SourceClass) -> usize {
        self.entries
            .iter()
            .filter(|((p, _), c)| *p == platform && **c == class)
            .count()
    }

    /// Entries sorted by (platform, key).
    pub fn entries(&self) -> Vec<(Platform, &str, SourceClass)> {
        let mut out: Vec<_> = self
            .entries
            .iter()
            .map(|((p, k), c)| (*p, k.as_str(), *c))
            .collect();
        out.sort();
        out
    }

    /// Unknown keys are unattributed. A key that is only registered under the
    /// other platform is a lookup error: the record is probably mis-tagged.
    pub fn resolve_key(&self, platform: Platform, key: &str) -> Result<Attribution, IngestError> {
        if let Some(class) = self.get(platform, key) {
            return Ok(Attribution::Class(class));
        }
        let other = match platform {
            Platform::Reddit => Platform::Twitter,
            Platform::Twitter => Platform::Reddit,
        };
        if self.get(other, key).is_some() {
            return Err(IngestError::PlatformMismatch {
                key: key.to_string(),
                record_platform: platform,
                registered_platform: other,
            });
        }
        Ok(Attribution::Unattributed)
    }

    pub fn resolve(&self, record: &ReactionRecord) -> Result<Attribution, IngestError> {
        self.resolve_key(record.platform, &record.source_key)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("platform,key,class\n");
        for (p, k, c) in self.entries() {
            out.push_str(&format!("{p},{k},{c}\n"));
        }
        out
    }
}

/// Reads a `platform,key,class` CSV. `#` lines are comments.
pub fn load_sources(path: impl AsRef<Path>) -> Result<SourceRegistry, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_sources(file)
}

pub fn parse_sources(mut reader: impl std::io::Read) -> Result<SourceRegistry, IngestError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| IngestError::parse(1, e))?;
    let line_of = |pos: Option<&csv::Position>| csv_line(&text, pos);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| IngestError::parse(1, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["platform", "key", "class"] {
        return Err(IngestError::Parse {
            line: line_of(headers.position()).max(1),
            message: format!(
                "expected header `platform,key,class`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut registry = SourceRegistry::new();
    for result in rdr.records() {
        let record = result.map_err(|e| {
            let line = line_of(e.position());
            IngestError::parse(line, e)
        })?;
        let line = line_of(record.position());
        let row: SourceRow = record
            .deserialize(Some(&headers))
            .map_err(|e| IngestError::parse(line, e))?;
        let platform: Platform = row.platform.parse().map_err(|_| IngestError::Validation {
            line,
            message: format!("unknown platform `{}`", row.platform),
        })?;
        let class: SourceClass = row.class.parse().map_err(|_| IngestError::Validation {
            line,
            message: format!("unknown source class `{}`", row.class),
        })?;
        if row.key.is_empty() {
            return Err(IngestError::Validation { line, message: "empty source key".into() });
        }
        registry.insert(platform, &row.key, class).map_err(|e| match e {
            IngestError::DuplicateSource { platform, key, .. } => {
                IngestError::DuplicateSource { line, platform, key }
            }
            other => other,
        })?;
    }
    Ok(registry)
}
