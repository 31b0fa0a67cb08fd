use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{IngestError, PairedSample};
use crate::labels::ReactionType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.8, dev: 0.1, test: 0.1 }
    }
}

impl SplitRatios {
    fn as_array(&self) -> [f64; 3] {
        [self.train, self.dev, self.test]
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let r = self.as_array();
        if r.iter().any(|&x| !(x > 0.0) || !x.is_finite()) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(IngestError::InvalidArgument(format!(
                "split ratios must be positive and sum to 1, got {:?}",
                r
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<PairedSample>,
    pub dev: Vec<PairedSample>,
    pub test: Vec<PairedSample>,
    /// Positions in the input, ascending, per split (train, dev, test).
    pub indices: [Vec<usize>; 3],
    pub warnings: Vec<String>,
}

/// Largest-remainder apportionment of `total` according to `ratios`.
fn apportion(total: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let mut out = [0usize; 3];
    let mut rem = [(0.0f64, 0usize); 3];
    for j in 0..3 {
        let q = total as f64 * ratios[j];
        out[j] = q.floor() as usize;
        rem[j] = (q - q.floor(), j);
    }
    let short = total - out.iter().sum::<usize>();
    rem.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, j) in rem.iter().take(short) {
        out[j] += 1;
    }
    out
}

/// Deterministic stratified train/dev/test split.
///
/// Split sizes are the largest-remainder apportionment of the pool; every
/// stratum lands within one sample of its proportional share in each split.
/// Strata smaller than the number of splits go wholly to train.
pub fn split_dataset(
    samples: &[PairedSample],
    ratios: SplitRatios,
    seed: u64,
) -> Result<DatasetSplit, IngestError> {
    ratios.validate()?;
    let r = ratios.as_array();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Strata in canonical label order, unlabeled last.
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); ReactionType::COUNT + 1];
    for (i, s) in samples.iter().enumerate() {
        let k = s.gold_label.map_or(ReactionType::COUNT, ReactionType::index);
        strata[k].push(i);
    }
    for stratum in strata.iter_mut() {
        stratum.shuffle(&mut rng);
    }

    let mut out = DatasetSplit::default();
    let mut big = Vec::new();
    for (k, stratum) in strata.iter().enumerate() {
        if stratum.is_empty() {
            continue;
        }
        if stratum.len() < 3 {
            let name = ReactionType::from_index(k).map_or("unlabeled", ReactionType::as_str);
            let msg = format!("class `{name}` has {} samples; placed wholly in train", stratum.len());
            log::warn!("{msg}");
            out.warnings.push(msg);
            out.indices[0].extend(stratum);
        } else {
            big.push(k);
        }
    }

    let pool: usize = big.iter().map(|&k| strata[k].len()).sum();
    let targets = apportion(pool, &r);
    let mut sizes: Vec<[usize; 3]> = Vec::with_capacity(big.len());
    let mut extras: Vec<(usize, usize)> = Vec::new();
    let mut fracs: Vec<[f64; 3]> = Vec::new();
    let mut need = targets.map(|t| t as i64);
    for (slot, &k) in big.iter().enumerate() {
        let n = strata[k].len();
        let mut s = [0usize; 3];
        let mut f = [0.0; 3];
        for j in 0..3 {
            let q = n as f64 * r[j];
            s[j] = q.floor() as usize;
            f[j] = q - q.floor();
            need[j] -= s[j] as i64;
        }
        extras.push((n - s.iter().sum::<usize>(), slot));
        sizes.push(s);
        fracs.push(f);
    }
    // Hand out the leftover units, at most one per (stratum, split), always to
    // the splits with the largest remaining demand.
    extras.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(e, slot) in &extras {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            need[b]
                .cmp(&need[a])
                .then(fracs[slot][b].total_cmp(&fracs[slot][a]))
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(e) {
            sizes[slot][j] += 1;
            need[j] -= 1;
        }
    }
    // Float rounding can leave a split one unit off; move units between splits.
    while let (Some(over), Some(under)) = (
        (0..3).find(|&j| need[j] < 0),
        (0..3).find(|&j| need[j] > 0),
    ) {
        let Some(slot) = (0..sizes.len()).find(|&s| sizes[s][over] > 0) else { break };
        sizes[slot][over] -= 1;
        sizes[slot][under] += 1;
        need[over] += 1;
        need[under] -= 1;
    }

    for (slot, &k) in big.iter().enumerate() {
        let mut rest = strata[k].as_slice();
        for j in 0..3 {
            let (head, tail) = rest.split_at(sizes[slot][j]);
            out.indices[j].extend_from_slice(head);
            rest = tail;
        }
    }
    for idx in out.indices.iter_mut() {
        idx.sort_unstable();
    }
    out.train = out.indices[0].iter().map(|&i| samples[i].clone()).collect();
    out.dev = out.indices[1].iter().map(|&i| samples[i].clone()).collect();
    out.test = out.indices[2].iter().map(|&i| samples[i].clone()).collect();
    Ok(out)
}
