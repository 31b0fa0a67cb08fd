//! Confusion-matrix evaluation: per-class precision, recall and F1 plus
//! macro/micro aggregates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::labels::ReactionType;

const K: usize = ReactionType::COUNT;

/// Published per-class F1 of the reference system, kept for documentation
/// and report comparison only. `other` has no published value.
pub const REFERENCE_F1: [(ReactionType, f64); 8] = [
    (ReactionType::Agreement, 0.403),
    (ReactionType::Answer, 0.872),
    (ReactionType::Appreciation, 0.728),
    (ReactionType::Disagreement, 0.064),
    (ReactionType::Elaboration, 0.606),
    (ReactionType::Humor, 0.063),
    (ReactionType::NegativeReaction, 0.094),
    (ReactionType::Question, 0.781),
];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{preds} predictions but {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("nothing to score")]
    Empty,
}

/// Rows are gold labels, columns predictions, both in canonical label order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn add(&mut self, gold: ReactionType, pred: ReactionType) {
        self.counts[gold.index()][pred.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..K).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, label: ReactionType) -> u64 {
        self.counts[label.index()].iter().sum()
    }

    pub fn predicted(&self, label: ReactionType) -> u64 {
        self.counts.iter().map(|row| row[label.index()]).sum()
    }
}

pub fn confusion(preds: &[ReactionType], golds: &[ReactionType]) -> Result<ConfusionMatrix, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch { preds: preds.len(), golds: golds.len() });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut m = ConfusionMatrix::default();
    preds.iter().zip(golds).for_each(|(&p, &g)| m.add(g, p));
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: ReactionType,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub per_class: Vec<ClassScore>,
    /// Unweighted mean of the nine per-class F1 scores.
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub accuracy: f64,
}

impl ClassMetrics {
    pub fn get(&self, label: ReactionType) -> &ClassScore {
        &self.per_class[label.index()]
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 per class; every 0/0 is taken as 0.
pub fn prf(matrix: &ConfusionMatrix) -> ClassMetrics {
    let per_class: Vec<ClassScore> = ReactionType::ALL
        .iter()
        .map(|&label| {
            let i = label.index();
            let tp = matrix.counts[i][i];
            let precision = ratio(tp, matrix.predicted(label));
            let recall = ratio(tp, matrix.support(label));
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassScore { label, precision, recall, f1, support: matrix.support(label) }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / K as f64;
    let accuracy = ratio(matrix.trace(), matrix.total());
    ClassMetrics { per_class, macro_f1, micro_f1: accuracy, accuracy }
}

/// Metrics plus the provenance of the scored split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub split: String,
    pub samples: u64,
    pub metrics: ClassMetrics,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn new(split: impl Into<String>, matrix: ConfusionMatrix) -> Self {
        MetricsReport { split: split.into(), samples: matrix.total(), metrics: prf(&matrix), confusion: matrix }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per class: `label,precision,recall,f1,support,reference_f1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,precision,recall,f1,support,reference_f1\n");
        for c in &self.metrics.per_class {
            let reference = REFERENCE_F1
                .iter()
                .find(|(l, _)| *l == c.label)
                .map(|(_, v)| v.to_string())
                .unwrap_or_default();
            writeln!(out, "{},{},{},{},{},{}", c.label, c.precision, c.recall, c.f1, c.support, reference).expect("string write");
        }
        out
    }
}
