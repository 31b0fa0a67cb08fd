//! One module per pipeline stage. Stages hand off through files in the
//! output directory.

mod analyze;
mod evaluate;
mod fixture;
mod predict;
mod report;
mod train;
mod vocab;

pub use analyze::run as analyze;
pub use evaluate::run as evaluate;
pub use fixture::run as fixture;
pub use predict::run as predict;
pub use report::run as report;
pub use train::run as train;
pub use vocab::run as vocab;

use reactscope::ingest::{load_annotated, split_dataset, DatasetSplit};
use reactscope::model::Model;
use reactscope::text::{CategoryLexicon, Encoder, Vocabulary};

use crate::error::CliError;
use crate::provenance::Run;

pub const ANNOTATIONS: &str = "annotations.jsonl";
pub const SOURCES: &str = "sources.csv";
pub const VOCAB: &str = "vocab.txt";
pub const MODEL: &str = "model.rscm";
pub const LABELED: &str = "labeled.jsonl";
pub const ANALYSIS_DIR: &str = "analysis";

pub fn reactions_file(platform: reactscope::Platform) -> String {
    format!("reactions_{platform}.jsonl")
}

/// Configured lexicon file, or the bundled demonstration lexicon.
fn load_lexicon(run: &mut Run) -> Result<CategoryLexicon, CliError> {
    let lexicon = match &run.cfg.paths.lexicon {
        Some(path) => {
            let path = run.input("lexicon", path)?;
            CategoryLexicon::load(path)?
        }
        None => CategoryLexicon::demo(),
    };
    run.fingerprint("lexicon", lexicon.fingerprint());
    Ok(lexicon)
}

fn load_vocab(run: &mut Run) -> Result<Vocabulary, CliError> {
    let path = run.cfg.input_or_default(&run.cfg.paths.vocab, VOCAB);
    let path = run.input("vocab", &path)?;
    let vocab = Vocabulary::load(path)?;
    run.fingerprint("vocab", vocab.fingerprint());
    Ok(vocab)
}

/// Annotated pool split with the run seed; every stage sees the same split.
fn annotated_split(run: &mut Run) -> Result<DatasetSplit, CliError> {
    let path = run.cfg.input_or_default(&run.cfg.paths.annotations, ANNOTATIONS);
    let path = run.input("annotations", &path)?;
    let corpus = load_annotated(path)?;
    let t = corpus.tally;
    log::info!(
        "annotations: {} rows, {} labeled, {} without majority, {} unvoted",
        t.rows,
        t.resolved,
        t.no_majority,
        t.unvoted
    );
    let split = split_dataset(&corpus.samples, run.cfg.split, run.cfg.seed)?;
    for w in &split.warnings {
        log::warn!("{w}");
    }
    Ok(split)
}

fn load_model(run: &mut Run) -> Result<Model, CliError> {
    let path = run.cfg.input_or_default(&run.cfg.paths.model, MODEL);
    let path = run.input("model", &path)?;
    let model = Model::load(path)?;
    run.fingerprint("model_vocab", model.vocab_fingerprint());
    run.fingerprint("model_lexicon", model.lexicon_fingerprint());
    Ok(model)
}

/// Encoder matching a trained model: its sequence length and normalizer,
/// with the configured vocabulary and lexicon.
fn encoder_for(run: &mut Run, model: &Model) -> Result<Encoder, CliError> {
    let vocab = load_vocab(run)?;
    let lexicon = load_lexicon(run)?;
    let mut encoder = Encoder::new(vocab, lexicon, model.config().seq_len)?;
    if let Some(n) = model.normalizer() {
        encoder.set_normalizer(n.clone())?;
    }
    Ok(encoder)
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("value serializes");
    s.push('\n');
    s
}

fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
