use serde::{Deserialize, Serialize};

use super::labeling::LabeledReaction;
use super::AnalysisError;
use crate::labels::{Platform, ReactionType, SourceGroup};

const K: usize = ReactionType::COUNT;

/// Share of each reaction type within one source group on one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeDistribution {
    pub group: String,
    pub platform: Option<Platform>,
    pub counts: [u64; K],
    /// Items without a resolved type that still count toward the total.
    pub unresolved: u64,
    pub total: u64,
    /// `100 · count / total` in label order.
    pub percent: [f64; K],
}

impl TypeDistribution {
    pub fn from_counts(group: impl Into<String>, platform: Option<Platform>, counts: [u64; K]) -> Result<Self, AnalysisError> {
        Self::from_counts_with_unresolved(group, platform, counts, 0)
    }

    /// Like [`TypeDistribution::from_counts`], but `unresolved` items (for
    /// example annotations without a majority label) join the denominator,
    /// so the nine percentages sum to less than 100.
    pub fn from_counts_with_unresolved(
        group: impl Into<String>,
        platform: Option<Platform>,
        counts: [u64; K],
        unresolved: u64,
    ) -> Result<Self, AnalysisError> {
        let group = group.into();
        let total = counts.iter().sum::<u64>() + unresolved;
        if total == 0 {
            return Err(AnalysisError::EmptyGroup { group, platform });
        }
        let percent = counts.map(|c| 100.0 * c as f64 / total as f64);
        Ok(TypeDistribution { group, platform, counts, unresolved, total, percent })
    }

    pub fn percent_of(&self, t: ReactionType) -> f64 {
        self.percent[t.index()]
    }

    pub fn unresolved_percent(&self) -> f64 {
        100.0 * self.unresolved as f64 / self.total as f64
    }

    /// `type,percent,count` rows in label order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("type,percent,count\n");
        for t in ReactionType::ALL {
            out.push_str(&format!("{t},{},{}\n", self.percent[t.index()], self.counts[t.index()]));
        }
        out
    }
}

pub fn type_distribution(
    labeled: &[LabeledReaction],
    group: SourceGroup,
    platform: Platform,
) -> Result<TypeDistribution, AnalysisError> {
    let mut counts = [0u64; K];
    labeled
        .iter()
        .filter(|r| r.record.platform == platform && group.contains(r.source_class))
        .for_each(|r| counts[r.reaction_type.index()] += 1);
    TypeDistribution::from_counts(group.name(), Some(platform), counts)
}

/// Types at or above `threshold` percent, most frequent first; equal
/// percentages keep label order.
pub fn frequent_types(dist: &TypeDistribution, threshold: f64) -> Vec<ReactionType> {
    let mut out: Vec<ReactionType> =
        ReactionType::ALL.iter().copied().filter(|t| dist.percent_of(*t) >= threshold).collect();
    out.sort_by(|a, b| dist.percent_of(*b).total_cmp(&dist.percent_of(*a)));
    out
}
