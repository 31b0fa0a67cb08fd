use std::io::BufRead;

use reactscope::analysis::{compare_groups, AnalysisError, LabeledReaction};
use reactscope::ingest::IngestError;
use reactscope::Platform;

use super::{ANALYSIS_DIR, LABELED};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

fn read_labeled(path: &std::path::Path) -> Result<Vec<LabeledReaction>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| IngestError::Parse { line: i as u64 + 1, message: format!("{}: {e}", path.display()) })?;
        out.push(r);
    }
    Ok(out)
}

/// Trusted vs deceptive comparison per platform: type distributions, delay
/// CDFs, Mann-Whitney U tests and per-source type proportions.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "analyze")?;
    let path = cfg.input_or_default(&cfg.paths.labeled, LABELED);
    let labeled = read_labeled(&run.input("labeled reactions", &path)?)?;
    let mut analyzed = 0;
    let mut last_err = None;
    for platform in Platform::ALL {
        if !labeled.iter().any(|r| r.record.platform == platform) {
            continue;
        }
        match compare_groups(&labeled, platform, &cfg.analysis) {
            Ok(report) => {
                let dir = cfg.out().join(ANALYSIS_DIR).join(platform.to_string());
                report.write_to(&dir)?;
                for entry in std::fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
                    let name = entry.map_err(|e| CliError::io(&dir, e))?.file_name();
                    run.output(&format!("{ANALYSIS_DIR}/{platform}/{}", name.to_string_lossy()));
                }
                let significant = report.delay_tests.iter().filter(|t| t.significant).count();
                log::info!(
                    "{platform}: {} delay tests ({significant} significant), {} proportion tests",
                    report.delay_tests.len(),
                    report.proportion_tests.len()
                );
                analyzed += 1;
            }
            Err(e @ AnalysisError::InsufficientGroups(_)) => {
                log::warn!("{platform}: {e}");
                last_err = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if analyzed == 0 {
        return Err(match last_err {
            Some(e) => e.into(),
            None => CliError::Usage(format!("{} holds no labeled reactions", path.display())),
        });
    }
    run.finish()
}
