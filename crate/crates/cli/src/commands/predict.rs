use std::collections::BTreeMap;
use std::io::Write as _;
use std::time::Instant;

use reactscope::analysis::label_corpus;
use reactscope::ingest::{load_reaction_shards, load_sources, RejectReason};
use reactscope::{Platform, ReactionType};
use serde::Serialize;

use super::{encoder_for, json_line, load_model, pretty_json, reactions_file, LABELED, SOURCES};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

/// Records labeled per model call; bounds memory on large corpora.
const BLOCK: usize = 4096;

#[derive(Serialize, Default)]
struct PlatformSummary {
    records: usize,
    labeled: usize,
    unattributed: usize,
    rejected: BTreeMap<RejectReason, usize>,
    types: BTreeMap<ReactionType, usize>,
}

/// Labels every attributable reaction with its predicted type.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "predict")?;
    let model = load_model(&mut run)?;
    let encoder = encoder_for(&mut run, &model)?;
    let sources = run.cfg.input_or_default(&cfg.paths.sources, SOURCES);
    let registry = load_sources(run.input("sources", &sources)?)?;

    // Output-directory defaults apply only when no reaction file is configured.
    let configured = Platform::ALL.iter().any(|&p| !cfg.paths.reactions.for_platform(p).is_empty());
    let mut shards: Vec<(Platform, Vec<std::path::PathBuf>)> = Vec::new();
    for platform in Platform::ALL {
        let paths = if configured {
            cfg.paths.reactions.for_platform(platform).to_vec()
        } else {
            let default = cfg.out().join(reactions_file(platform));
            if default.is_file() {
                vec![default]
            } else {
                Vec::new()
            }
        };
        if !paths.is_empty() {
            shards.push((platform, paths));
        }
    }
    if shards.is_empty() {
        return Err(CliError::Usage("no reaction files configured or found in the output directory".into()));
    }

    let out_path = run.output(LABELED);
    let file = std::fs::File::create(&out_path).map_err(|e| CliError::io(&out_path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut summary: BTreeMap<Platform, PlatformSummary> = BTreeMap::new();
    let started = Instant::now();
    let mut labeled_total = 0usize;
    for (platform, paths) in &shards {
        for p in paths {
            run.input(&format!("reactions_{platform}"), p)?;
        }
        let load = load_reaction_shards(paths, *platform, cfg.ingest_mode)?;
        let s = summary.entry(*platform).or_default();
        s.records = load.records.len();
        s.rejected = load.rejects.clone();
        for block in load.records.chunks(BLOCK) {
            let outcome = label_corpus(&model, &encoder, block, &registry)?;
            s.unattributed += outcome.unattributed;
            s.labeled += outcome.labeled.len();
            for r in &outcome.labeled {
                *s.types.entry(r.reaction_type).or_default() += 1;
                out.write_all(json_line(r).as_bytes()).map_err(|e| CliError::io(&out_path, e))?;
            }
        }
        labeled_total += s.labeled;
        log::info!(
            "{platform}: {} records, {} labeled, {} unattributed, {} rejected",
            s.records,
            s.labeled,
            s.unattributed,
            load.total_rejected()
        );
    }
    out.flush().map_err(|e| CliError::io(&out_path, e))?;
    let secs = started.elapsed().as_secs_f64();
    if labeled_total > 0 && secs > 0.0 {
        log::info!("labeled {labeled_total} reactions in {secs:.2}s ({:.0}/s)", labeled_total as f64 / secs);
    }
    run.write("predict_summary.json", pretty_json(&summary))?;
    run.finish()
}
