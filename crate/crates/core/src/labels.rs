//! Closed label sets shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Discourse act of a reaction. `Other` is a real class, not a missing value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReactionType {
    Agreement,
    Answer,
    Appreciation,
    Disagreement,
    Elaboration,
    Humor,
    NegativeReaction,
    Question,
    Other,
}

impl ReactionType {
    pub const COUNT: usize = 9;

    /// Canonical label order. Indices into this array are the classifier's output columns.
    pub const ALL: [ReactionType; 9] = [
        ReactionType::Agreement,
        ReactionType::Answer,
        ReactionType::Appreciation,
        ReactionType::Disagreement,
        ReactionType::Elaboration,
        ReactionType::Humor,
        ReactionType::NegativeReaction,
        ReactionType::Question,
        ReactionType::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReactionType::Agreement => "agreement",
            ReactionType::Answer => "answer",
            ReactionType::Appreciation => "appreciation",
            ReactionType::Disagreement => "disagreement",
            ReactionType::Elaboration => "elaboration",
            ReactionType::Humor => "humor",
            ReactionType::NegativeReaction => "negative_reaction",
            ReactionType::Question => "question",
            ReactionType::Other => "other",
        }
    }
}

impl fmt::Display for ReactionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for ReactionType {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_lowercase().replace([' ', '-'], "_");
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl Serialize for ReactionType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ReactionType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Platform {
    Reddit,
    Twitter,
}

impl Platform {
    pub const ALL: [Platform; 2] = [Platform::Reddit, Platform::Twitter];

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Reddit => "reddit",
            Platform::Twitter => "twitter",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "reddit" => Ok(Platform::Reddit),
            "twitter" => Ok(Platform::Twitter),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// Base credibility class of a news source, ordered by increasing intent to deceive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceClass {
    Trusted,
    Clickbait,
    Conspiracy,
    Propaganda,
    Disinformation,
}

impl SourceClass {
    pub const ALL: [SourceClass; 5] = [
        SourceClass::Trusted,
        SourceClass::Clickbait,
        SourceClass::Conspiracy,
        SourceClass::Propaganda,
        SourceClass::Disinformation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceClass::Trusted => "trusted",
            SourceClass::Clickbait => "clickbait",
            SourceClass::Conspiracy => "conspiracy",
            SourceClass::Propaganda => "propaganda",
            SourceClass::Disinformation => "disinformation",
        }
    }

    pub fn is_deceptive(self) -> bool {
        self != SourceClass::Trusted
    }
}

impl fmt::Display for SourceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceClass {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

/// A set of source classes compared as one unit. Membership is computed from
/// the base class and never stored on a source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceGroup {
    Class(SourceClass),
    DeceptiveAll,
    DeceptiveNoDisinfo,
}

impl SourceGroup {
    pub const TRUSTED: SourceGroup = SourceGroup::Class(SourceClass::Trusted);

    pub fn contains(self, class: SourceClass) -> bool {
        match self {
            SourceGroup::Class(c) => c == class,
            SourceGroup::DeceptiveAll => class.is_deceptive(),
            SourceGroup::DeceptiveNoDisinfo => {
                class.is_deceptive() && class != SourceClass::Disinformation
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceGroup::Class(c) => c.as_str(),
            SourceGroup::DeceptiveAll => "deceptive_all",
            SourceGroup::DeceptiveNoDisinfo => "deceptive_no_disinfo",
        }
    }
}

impl fmt::Display for SourceGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceGroup {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "deceptive_all" | "deceptive" => Ok(SourceGroup::DeceptiveAll),
            "deceptive_no_disinfo" => Ok(SourceGroup::DeceptiveNoDisinfo),
            other => other.parse().map(SourceGroup::Class),
        }
    }
}
