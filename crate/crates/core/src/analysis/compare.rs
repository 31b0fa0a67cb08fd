use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cdf::{delay_cdf, CdfSeries, DEFAULT_STEP_SECS};
use super::distribution::{frequent_types, type_distribution, TypeDistribution};
use super::labeling::LabeledReaction;
use super::mwu::{mann_whitney_u, MwuMethod, MwuResult};
use super::AnalysisError;
use crate::labels::{Platform, ReactionType, SourceGroup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareOptions {
    /// Smaller samples are skipped with a reason.
    pub min_group_size: usize,
    pub alpha: f64,
    /// Percent share at which a type counts as frequent.
    pub frequent_threshold: f64,
    pub cdf_step: u64,
    pub bootstrap_resamples: usize,
    pub seed: u64,
    pub method: MwuMethod,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            min_group_size: 30,
            alpha: 0.01,
            frequent_threshold: 5.0,
            cdf_step: DEFAULT_STEP_SECS,
            bootstrap_resamples: 1000,
            seed: 0,
            method: MwuMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfEntry {
    pub group: String,
    /// `None` covers every reaction type.
    pub reaction_type: Option<ReactionType>,
    pub series: CdfSeries,
}

/// Delay comparison between two groups, for one reaction type or all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayComparison {
    pub group_a: String,
    pub group_b: String,
    pub reaction_type: Option<ReactionType>,
    pub n_a: usize,
    pub n_b: usize,
    pub result: Option<MwuResult>,
    pub significant: bool,
    pub skipped: Option<String>,
}

/// Comparison of one type's share, using per-source proportions as units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionComparison {
    pub group_a: String,
    pub group_b: String,
    pub reaction_type: ReactionType,
    pub sources_a: usize,
    pub sources_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Bootstrap 95% percentile interval of `mean_a − mean_b`.
    pub ci95: Option<(f64, f64)>,
    pub result: Option<MwuResult>,
    pub significant: bool,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub platform: Platform,
    pub options: CompareOptions,
    pub distributions: Vec<TypeDistribution>,
    pub frequent_types: BTreeMap<String, Vec<ReactionType>>,
    pub cdfs: Vec<CdfEntry>,
    pub delay_tests: Vec<DelayComparison>,
    pub proportion_tests: Vec<ProportionComparison>,
    /// Groups with no reactions on this platform.
    pub empty_groups: Vec<String>,
}

fn type_name(t: Option<ReactionType>) -> String {
    t.map_or_else(|| "all".to_string(), |t| t.to_string())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl AnalysisReport {
    /// `group_a,group_b,type,U,z,p,significant` for every delay test;
    /// skipped tests have empty statistics.
    pub fn mwu_csv(&self) -> String {
        let mut out = String::from("group_a,group_b,type,U,z,p,significant\n");
        for t in &self.delay_tests {
            let r = t.result.as_ref();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t.group_a,
                t.group_b,
                type_name(t.reaction_type),
                fmt_opt(r.map(|r| r.u1)),
                fmt_opt(r.map(|r| r.z)),
                fmt_opt(r.map(|r| r.p)),
                t.significant
            )
            .expect("string write");
        }
        out
    }

    pub fn proportions_csv(&self) -> String {
        let mut out = String::from("group_a,group_b,type,sources_a,sources_b,mean_a,mean_b,ci_low,ci_high,U,p,significant\n");
        for t in &self.proportion_tests {
            let r = t.result.as_ref();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                t.group_a,
                t.group_b,
                t.reaction_type,
                t.sources_a,
                t.sources_b,
                t.mean_a,
                t.mean_b,
                fmt_opt(t.ci95.map(|c| c.0)),
                fmt_opt(t.ci95.map(|c| c.1)),
                fmt_opt(r.map(|r| r.u1)),
                fmt_opt(r.map(|r| r.p)),
                t.significant
            )
            .expect("string write");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `report.json`, `mwu_summary.csv`, `proportions.csv`, one
    /// `dist_<group>.csv` per distribution and one `cdf_<group>_<type>.csv`
    /// per CDF into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), AnalysisError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| AnalysisError::io(dir, e))?;
        let write = |name: String, body: String| {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| AnalysisError::io(&path, e))
        };
        write("report.json".into(), self.to_json())?;
        write("mwu_summary.csv".into(), self.mwu_csv())?;
        write("proportions.csv".into(), self.proportions_csv())?;
        for d in &self.distributions {
            write(format!("dist_{}.csv", d.group), d.to_csv())?;
        }
        for c in &self.cdfs {
            write(format!("cdf_{}_{}.csv", c.group, type_name(c.reaction_type)), c.series.to_csv())?;
        }
        Ok(())
    }
}

fn delays(labeled: &[&LabeledReaction], t: Option<ReactionType>) -> Vec<i64> {
    labeled
        .iter()
        .filter(|r| t.is_none_or(|t| r.reaction_type == t))
        .map(|r| r.delay_secs())
        .collect()
}

/// Per-source share of `t`, sources in key order.
fn source_proportions(labeled: &[&LabeledReaction], t: ReactionType) -> Vec<f64> {
    let mut by_source: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for r in labeled {
        let e = by_source.entry(r.record.source_key.to_lowercase()).or_default();
        e.1 += 1;
        if r.reaction_type == t {
            e.0 += 1;
        }
    }
    by_source.values().map(|&(hit, all)| hit as f64 / all as f64).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn bootstrap_ci(a: &[f64], b: &[f64], resamples: usize, rng: &mut ChaCha8Rng) -> Option<(f64, f64)> {
    if resamples == 0 {
        return None;
    }
    let mut diffs: Vec<f64> = (0..resamples)
        .map(|_| {
            let ma = (0..a.len()).map(|_| a[rng.gen_range(0..a.len())]).sum::<f64>() / a.len() as f64;
            let mb = (0..b.len()).map(|_| b[rng.gen_range(0..b.len())]).sum::<f64>() / b.len() as f64;
            ma - mb
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let at = |q: f64| diffs[((q * resamples as f64) as usize).min(resamples - 1)];
    Some((at(0.025), at(0.975)))
}

/// Trusted versus all deceptive sources, and versus deceptive sources
/// without disinformation, on one platform.
pub fn compare_groups(
    labeled: &[LabeledReaction],
    platform: Platform,
    options: &CompareOptions,
) -> Result<AnalysisReport, AnalysisError> {
    let groups = [SourceGroup::TRUSTED, SourceGroup::DeceptiveAll, SourceGroup::DeceptiveNoDisinfo];
    let members: Vec<Vec<&LabeledReaction>> = groups
        .iter()
        .map(|g| labeled.iter().filter(|r| r.record.platform == platform && g.contains(r.source_class)).collect())
        .collect();
    if members[0].is_empty() || members[1].is_empty() {
        return Err(AnalysisError::InsufficientGroups(format!(
            "{platform}: need trusted and deceptive reactions, found {} and {}",
            members[0].len(),
            members[1].len()
        )));
    }

    let mut report = AnalysisReport {
        platform,
        options: options.clone(),
        distributions: Vec::new(),
        frequent_types: BTreeMap::new(),
        cdfs: Vec::new(),
        delay_tests: Vec::new(),
        proportion_tests: Vec::new(),
        empty_groups: Vec::new(),
    };
    let mut present = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        if members[gi].is_empty() {
            report.empty_groups.push(g.name().to_string());
            continue;
        }
        let dist = type_distribution(labeled, *g, platform)?;
        report.frequent_types.insert(g.name().to_string(), frequent_types(&dist, options.frequent_threshold));
        report.distributions.push(dist);
        present.push(gi);
    }
    let of_interest: Vec<ReactionType> = ReactionType::ALL
        .iter()
        .copied()
        .filter(|t| report.frequent_types.values().any(|f| f.contains(t)))
        .collect();
    let scopes: Vec<Option<ReactionType>> = std::iter::once(None).chain(of_interest.iter().map(|&t| Some(t))).collect();

    for &gi in &present {
        for &scope in &scopes {
            let d = delays(&members[gi], scope);
            if !d.is_empty() {
                let series = delay_cdf(&d, options.cdf_step)?;
                report.cdfs.push(CdfEntry { group: groups[gi].name().to_string(), reaction_type: scope, series });
            }
        }
    }

    for (pair, &gb) in [1usize, 2].iter().enumerate() {
        if members[gb].is_empty() {
            continue;
        }
        let (name_a, name_b) = (groups[0].name().to_string(), groups[gb].name().to_string());
        for &scope in &scopes {
            let a = delays(&members[0], scope);
            let b = delays(&members[gb], scope);
            let mut test = DelayComparison {
                group_a: name_a.clone(),
                group_b: name_b.clone(),
                reaction_type: scope,
                n_a: a.len(),
                n_b: b.len(),
                result: None,
                significant: false,
                skipped: None,
            };
            if a.len().min(b.len()) < options.min_group_size {
                test.skipped = Some(format!(
                    "sample sizes {} and {} below minimum {}",
                    a.len(),
                    b.len(),
                    options.min_group_size
                ));
            } else {
                let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
                let bf: Vec<f64> = b.iter().map(|&v| v as f64).collect();
                let r = mann_whitney_u(&af, &bf, options.method)?;
                test.significant = !r.degenerate && r.p < options.alpha;
                test.result = Some(r);
            }
            report.delay_tests.push(test);
        }
        for &t in &of_interest {
            let pa = source_proportions(&members[0], t);
            let pb = source_proportions(&members[gb], t);
            let mut test = ProportionComparison {
                group_a: name_a.clone(),
                group_b: name_b.clone(),
                reaction_type: t,
                sources_a: pa.len(),
                sources_b: pb.len(),
                mean_a: mean(&pa),
                mean_b: mean(&pb),
                ci95: None,
                result: None,
                significant: false,
                skipped: None,
            };
            if pa.len() < 2 || pb.len() < 2 {
                test.skipped = Some(format!("{} and {} sources; need at least 2 per group", pa.len(), pb.len()));
            } else {
                let seed = options.seed ^ ((pair as u64) << 16) ^ t.index() as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                test.ci95 = bootstrap_ci(&pa, &pb, options.bootstrap_resamples, &mut rng);
                let r = mann_whitney_u(&pa, &pb, MwuMethod::Auto)?;
                test.significant = !r.degenerate && r.p < options.alpha;
                test.result = Some(r);
            }
            report.proportion_tests.push(test);
        }
    }
    Ok(report)
}
