use reactscope::text::{load_embeddings, tokenize, Vocabulary, RESERVED};
use serde::Serialize;

use super::{annotated_split, pretty_json, VOCAB};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

#[derive(Serialize)]
struct VocabReport {
    tokens: usize,
    reserved: usize,
    train_samples: usize,
    min_count: usize,
    max_size: usize,
    /// Share of non-reserved tokens found in the embedding file.
    embedding_coverage: Option<f64>,
}

/// Builds the vocabulary from the training split of the annotations.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "vocab")?;
    let split = annotated_split(&mut run)?;
    let docs: Vec<Vec<String>> = split
        .train
        .iter()
        .flat_map(|s| [tokenize(&s.parent_text), tokenize(&s.reaction_text)])
        .collect();
    let vocab = Vocabulary::build(&docs, cfg.vocab.min_count, cfg.vocab.max_size);
    run.fingerprint("vocab", vocab.fingerprint());
    vocab.save(run.output(VOCAB))?;

    let embedding_coverage = match &cfg.paths.embeddings {
        Some(path) => {
            let path = run.input("embeddings", path)?;
            Some(load_embeddings(path, &vocab, cfg.model_config.emb_dim, cfg.seed)?.coverage())
        }
        None => None,
    };
    let report = VocabReport {
        tokens: vocab.len(),
        reserved: RESERVED.len(),
        train_samples: split.train.len(),
        min_count: cfg.vocab.min_count,
        max_size: cfg.vocab.max_size,
        embedding_coverage,
    };
    run.write("vocab_report.json", pretty_json(&report))?;
    log::info!("vocab: {} tokens from {} training pairs", vocab.len(), split.train.len());
    run.finish()
}
