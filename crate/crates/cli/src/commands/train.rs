use std::fmt::Write as _;

use reactscope::model::{train, Dataset, Model, TrainOptions};
use reactscope::text::{load_embeddings, EmbeddingMatrix, Encoder};

use super::{annotated_split, load_lexicon, load_vocab, pretty_json, MODEL};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

/// Fits the classifier on the training split with early stopping on dev.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "train")?;
    let split = annotated_split(&mut run)?;
    let vocab = load_vocab(&mut run)?;
    let lexicon = load_lexicon(&mut run)?;
    let mc = &cfg.model_config;
    let mut encoder = Encoder::new(vocab, lexicon, mc.seq_len)?;
    encoder.fit_normalizer(&split.train)?;

    let embeddings = match &cfg.paths.embeddings {
        Some(path) => {
            let path = run.input("embeddings", path)?;
            load_embeddings(path, encoder.vocab(), mc.emb_dim, cfg.seed)?
        }
        None => EmbeddingMatrix::random(encoder.vocab(), mc.emb_dim, cfg.seed),
    };
    log::info!("embedding coverage {:.4}", embeddings.coverage());
    let model = Model::build(mc.clone(), &embeddings, &encoder)?;
    for w in model.warnings() {
        log::warn!("{w}");
    }
    log::info!("model: {} parameters", model.param_count());

    let train_set = Dataset::from_samples(&encoder, &split.train);
    let dev_set = Dataset::from_samples(&encoder, &split.dev);
    let (model, history) = train(model, &train_set, &dev_set, &TrainOptions { serial: cfg.serial })?;
    let best = history.best();
    log::info!(
        "chosen epoch {} of {}: dev macro-F1 {:.4}, train loss {:.4}",
        best.epoch,
        history.epochs.len(),
        best.dev_macro_f1,
        best.train_loss
    );

    let model_path = run.output(MODEL);
    model.save(&model_path)?;
    let meta = reactscope::model::meta_path(&model_path);
    run.output(&meta.file_name().expect("meta file name").to_string_lossy());
    run.write("history.json", pretty_json(&history))?;
    let mut csv = String::from("epoch,train_loss,dev_macro_f1\n");
    for e in &history.epochs {
        writeln!(csv, "{},{},{}", e.epoch, e.train_loss, e.dev_macro_f1).expect("string write");
    }
    run.write("history.csv", csv)?;
    run.finish()
}
