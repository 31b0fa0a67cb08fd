use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// One hour, in seconds.
pub const DEFAULT_STEP_SECS: u64 = 3600;

/// Empirical CDF of delays sampled at `t_k = k · step`, k = 1..=⌈max/step⌉
/// (at least one point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub step: u64,
    /// `(t_k, fraction of delays ≤ t_k)`.
    pub points: Vec<(u64, f64)>,
    pub samples: usize,
}

impl CdfSeries {
    /// Value at grid time `t`: `None` off the grid or before the first point,
    /// 1.0 past the last point.
    pub fn at(&self, t: u64) -> Option<f64> {
        if t == 0 || t % self.step != 0 {
            return None;
        }
        let k = (t / self.step) as usize;
        Some(self.points.get(k - 1).map_or(1.0, |p| p.1))
    }

    fn value_at_index(&self, k: usize) -> f64 {
        self.points.get(k).map_or(1.0, |p| p.1)
    }

    /// True when this CDF is ≥ `other` at every grid point of either series
    /// (both must share a step).
    pub fn dominates(&self, other: &CdfSeries) -> bool {
        assert_eq!(self.step, other.step, "CDFs on different grids");
        let n = self.points.len().max(other.points.len());
        (0..n).all(|k| self.value_at_index(k) >= other.value_at_index(k))
    }

    /// `t_seconds,fraction` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_seconds,fraction\n");
        for (t, f) in &self.points {
            out.push_str(&format!("{t},{f}\n"));
        }
        out
    }
}

pub fn delay_cdf(delays: &[i64], step: u64) -> Result<CdfSeries, AnalysisError> {
    if delays.is_empty() {
        return Err(AnalysisError::EmptySample("delay CDF needs at least one delay".into()));
    }
    if step == 0 {
        return Err(AnalysisError::InvalidArgument("CDF step must be positive".into()));
    }
    if let Some(d) = delays.iter().find(|&&d| d < 0) {
        return Err(AnalysisError::InvalidArgument(format!("negative delay {d}")));
    }
    let mut sorted: Vec<u64> = delays.iter().map(|&d| d as u64).collect();
    sorted.sort_unstable();
    let max = *sorted.last().expect("nonempty");
    let steps = max.div_ceil(step).max(1);
    let n = sorted.len();
    let points = (1..=steps)
        .map(|k| {
            let t = k * step;
            (t, sorted.partition_point(|&d| d <= t) as f64 / n as f64)
        })
        .collect();
    Ok(CdfSeries { step, points, samples: n })
}
