use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::AnalysisError;

/// Largest per-sample size enumerated exactly under [`MwuMethod::Auto`].
pub const EXACT_MAX_PER_SAMPLE: usize = 8;
/// Largest combined size enumerated exactly.
pub const EXACT_MAX_TOTAL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwuMethod {
    /// Exact when both samples are small enough, otherwise normal.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwuMethodUsed {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwuResult {
    pub n1: usize,
    pub n2: usize,
    /// Rank sum of the first sample (average ranks for ties).
    pub r1: f64,
    pub u1: f64,
    pub u2: f64,
    pub mean: f64,
    /// Tie-corrected variance of U under the null.
    pub variance: f64,
    /// Continuity-corrected z; positive when the first sample ranks higher.
    pub z: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: MwuMethodUsed,
    /// Every value in both samples is identical.
    pub degenerate: bool,
}

/// Average ranks (1-based) of `values`, plus the tie-group sizes.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        order[i..j].iter().for_each(|&k| ranks[k] = avg);
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

/// Two-sided exact p: share of all C(N, n1) rank assignments whose U is at
/// least as far from the mean as the observed one. Ranks are doubled so
/// half ranks compare exactly.
fn exact_p(ranks: &[f64], n1: usize, r1: f64) -> f64 {
    let twice: Vec<i64> = ranks.iter().map(|r| (2.0 * r).round() as i64).collect();
    let n = twice.len();
    let n2 = n - n1;
    let offset = (n1 * (n1 + 1)) as i64;
    let mean2 = (n1 * n2) as i64;
    let observed = (2.0 * r1).round() as i64 - offset - mean2;
    let observed = observed.abs();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let sum: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| twice[i]).sum();
        let dev = (sum - offset - mean2).abs();
        total += 1;
        if dev >= observed {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

pub fn mann_whitney_u(a: &[f64], b: &[f64], method: MwuMethod) -> Result<MwuResult, AnalysisError> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(AnalysisError::EmptySample(format!("Mann-Whitney U needs two nonempty samples, got {n1} and {n2}")));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!("non-finite sample value {v}")));
    }
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = average_ranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let nn = (n1 * n2) as f64;
    let u2 = nn - u1;
    let mean = nn / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1)) as f64;
    let variance = nn / 12.0 * ((n + 1) as f64 - tie_term);
    let degenerate = ties.len() == 1;
    let use_exact = match method {
        MwuMethod::Auto => n1 <= EXACT_MAX_PER_SAMPLE && n2 <= EXACT_MAX_PER_SAMPLE && n <= EXACT_MAX_TOTAL,
        MwuMethod::Exact => {
            if n > EXACT_MAX_TOTAL {
                return Err(AnalysisError::InvalidArgument(format!(
                    "exact enumeration supports at most {EXACT_MAX_TOTAL} values, got {n}"
                )));
            }
            true
        }
        MwuMethod::Normal => false,
    };
    let method = if use_exact { MwuMethodUsed::Exact } else { MwuMethodUsed::NormalApprox };
    if degenerate || variance <= 0.0 {
        return Ok(MwuResult { n1, n2, r1, u1, u2, mean, variance, z: 0.0, p: 1.0, method, degenerate: true });
    }
    let dev = u1 - mean;
    let z = dev.signum() * (dev.abs() - 0.5).max(0.0) / variance.sqrt();
    let p = if use_exact {
        exact_p(&ranks, n1, r1)
    } else {
        let normal = Normal::standard();
        (2.0 * normal.sf(z.abs())).min(1.0)
    };
    Ok(MwuResult { n1, n2, r1, u1, u2, mean, variance, z, p: p.max(f64::MIN_POSITIVE), method, degenerate })
}
