use serde::{Deserialize, Serialize};

use super::TextError;

/// Per-dimension z-score fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Normalizer {
    /// Population mean and standard deviation per dimension.
    pub fn fit<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self, TextError> {
        let first = vectors.first().ok_or(TextError::EmptyFit)?;
        let dim = first.as_ref().len();
        let n = vectors.len() as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(TextError::Dimension { expected: dim, found: v.len() });
            }
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for v in vectors {
            for ((s, x), m) in var.iter_mut().zip(v.as_ref()).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let sd = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                // Constant columns can leave rounding residue in the variance.
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Normalizer { mean, sd })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Zero-variance dimensions map to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }
}
