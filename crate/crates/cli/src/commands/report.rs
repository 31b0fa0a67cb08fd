use std::fmt::Write as _;

use reactscope::analysis::AnalysisReport;
use reactscope::metrics::{MetricsReport, REFERENCE_F1};
use reactscope::{Platform, ReactionType};

use super::ANALYSIS_DIR;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

fn read_json<T: serde::de::DeserializeOwned>(run: &mut Run, role: &str, path: &std::path::Path) -> Result<Option<T>, CliError> {
    if !path.is_file() {
        return Ok(None);
    }
    run.input(role, path)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
}

fn metrics_section(out: &mut String, m: &MetricsReport) {
    writeln!(out, "## Classifier ({} split, {} pairs)\n", m.split, m.samples).unwrap();
    writeln!(out, "accuracy {:.4}, macro-F1 {:.4}\n", m.metrics.accuracy, m.metrics.macro_f1).unwrap();
    writeln!(out, "| type | precision | recall | F1 | support | reference F1 |").unwrap();
    writeln!(out, "|---|---|---|---|---|---|").unwrap();
    for c in &m.metrics.per_class {
        let reference = REFERENCE_F1
            .iter()
            .find(|(l, _)| *l == c.label)
            .map_or_else(|| "-".to_string(), |(_, v)| format!("{v:.3}"));
        writeln!(
            out,
            "| {} | {:.3} | {:.3} | {:.3} | {} | {reference} |",
            c.label, c.precision, c.recall, c.f1, c.support
        )
        .unwrap();
    }
    out.push('\n');
}

fn analysis_section(out: &mut String, r: &AnalysisReport) {
    writeln!(out, "## Reactions on {}\n", r.platform).unwrap();
    write!(out, "| group | n |").unwrap();
    for t in ReactionType::ALL {
        write!(out, " {t} |").unwrap();
    }
    writeln!(out, "\n|---|---|{}", "---|".repeat(ReactionType::COUNT)).unwrap();
    for d in &r.distributions {
        write!(out, "| {} | {} |", d.group, d.total).unwrap();
        for p in d.percent {
            write!(out, " {p:.2} |").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "\n| comparison | type | n | U | p | significant |").unwrap();
    writeln!(out, "|---|---|---|---|---|---|").unwrap();
    for t in &r.delay_tests {
        let ty = t.reaction_type.map_or_else(|| "all".to_string(), |t| t.to_string());
        let (u, p) = t.result.as_ref().map_or(("-".to_string(), "-".to_string()), |m| {
            (format!("{}", m.u1), format!("{:.3e}", m.p))
        });
        let flag = match &t.skipped {
            Some(why) => format!("skipped: {why}"),
            None => if t.significant { "yes" } else { "no" }.to_string(),
        };
        writeln!(out, "| {} vs {} | {ty} | {}/{} | {u} | {p} | {flag} |", t.group_a, t.group_b, t.n_a, t.n_b)
            .unwrap();
    }
    out.push('\n');
}

/// Collects metrics and analysis outputs from the output directory into
/// one markdown summary.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "report")?;
    let mut body = String::from("# Reaction-type report\n\n");
    let mut sections = 0;
    for split in ["test", "dev", "train"] {
        let path = cfg.out().join(format!("metrics_{split}.json"));
        if let Some(m) = read_json::<MetricsReport>(&mut run, &format!("metrics_{split}"), &path)? {
            metrics_section(&mut body, &m);
            sections += 1;
            break;
        }
    }
    for platform in Platform::ALL {
        let path = cfg.out().join(ANALYSIS_DIR).join(platform.to_string()).join("report.json");
        if let Some(r) = read_json::<AnalysisReport>(&mut run, &format!("analysis_{platform}"), &path)? {
            analysis_section(&mut body, &r);
            sections += 1;
        }
    }
    if sections == 0 {
        return Err(CliError::Usage(format!(
            "nothing to report in {}: run evaluate or analyze first",
            cfg.out().display()
        )));
    }
    run.write("report.md", body)?;
    run.finish()
}
