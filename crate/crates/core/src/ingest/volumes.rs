use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{csv_line, Attribution, IngestError, SourceRegistry};
use crate::labels::{Platform, SourceClass, SourceGroup};

/// Aggregate reaction count for one source, used when per-reaction records
/// are too large to ship.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct SourceVolume {
    pub platform: Platform,
    pub key: String,
    pub class: SourceClass,
    pub reactions: u64,
}

/// Reads a `platform,key,class,reactions` CSV. `#` lines are comments.
pub fn load_source_volumes(path: impl AsRef<Path>) -> Result<Vec<SourceVolume>, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_source_volumes(file)
}

pub fn parse_source_volumes(mut reader: impl std::io::Read) -> Result<Vec<SourceVolume>, IngestError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| IngestError::parse(1, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize::<SourceVolume>() {
        let row = row.map_err(|e| IngestError::parse(csv_line(&text, e.position()), e))?;
        out.push(row);
    }
    Ok(out)
}

/// Source-volume table shipped with the crate: per-source reaction counts
/// whose class totals match the published platform breakdown.
pub fn bundled_source_volumes() -> Vec<SourceVolume> {
    parse_source_volumes(include_str!("../../data/source_volumes.csv").as_bytes())
        .expect("bundled volume table parses")
}

/// Build the registry implied by a volume table.
pub fn registry_from_volumes(volumes: &[SourceVolume]) -> Result<SourceRegistry, IngestError> {
    let mut reg = SourceRegistry::new();
    for v in volumes {
        reg.insert(v.platform, &v.key, v.class)?;
    }
    Ok(reg)
}

/// Reaction and source totals per (platform, class), attributed through a registry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VolumeTotals {
    per_class: BTreeMap<(Platform, SourceClass), (usize, u64)>,
    pub unattributed_reactions: u64,
}

impl VolumeTotals {
    pub fn tally(volumes: &[SourceVolume], registry: &SourceRegistry) -> Result<Self, IngestError> {
        let mut out = VolumeTotals::default();
        for v in volumes {
            match registry.resolve_key(v.platform, &v.key)? {
                Attribution::Class(c) => {
                    let e = out.per_class.entry((v.platform, c)).or_default();
                    e.0 += 1;
                    e.1 += v.reactions;
                }
                Attribution::Unattributed => out.unattributed_reactions += v.reactions,
            }
        }
        Ok(out)
    }

    pub fn reactions(&self, platform: Platform, group: SourceGroup) -> u64 {
        self.per_class
            .iter()
            .filter(|((p, c), _)| *p == platform && group.contains(*c))
            .map(|(_, (_, r))| r)
            .sum()
    }

    pub fn sources(&self, platform: Platform, group: SourceGroup) -> usize {
        self.per_class
            .iter()
            .filter(|((p, c), _)| *p == platform && group.contains(*c))
            .map(|(_, (s, _))| s)
            .sum()
    }
}
