use reactscope::ingest::{synth_fixture, write_annotations, write_reactions};
use reactscope::Platform;

use super::{load_lexicon, pretty_json, reactions_file, ANNOTATIONS, SOURCES};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

/// Writes a seeded synthetic corpus: sources, per-platform reactions,
/// annotations and the generator manifest.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "fixture")?;
    let lexicon = load_lexicon(&mut run)?;
    let fx = synth_fixture(cfg.seed, cfg.fixture.size, &lexicon, &cfg.fixture.synth)?;
    run.write(SOURCES, fx.registry.to_csv())?;
    for platform in Platform::ALL {
        let records: Vec<_> = fx.records.iter().filter(|r| r.platform == platform).cloned().collect();
        write_reactions(run.output(&reactions_file(platform)), &records)?;
    }
    write_annotations(run.output(ANNOTATIONS), &fx.annotations)?;
    run.write("fixture_manifest.json", pretty_json(&fx.manifest))?;
    log::info!("fixture: {} records, {} annotation rows", fx.records.len(), fx.annotations.len());
    run.finish()
}
