use reactscope::metrics::{confusion, MetricsReport};

use super::{annotated_split, encoder_for, load_model};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::provenance::Run;

/// Scores the trained model on the train, dev and test splits.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg, "evaluate")?;
    let model = load_model(&mut run)?;
    let encoder = encoder_for(&mut run, &model)?;
    let split = annotated_split(&mut run)?;
    for (name, samples) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
        if samples.is_empty() {
            log::warn!("{name} split is empty; skipped");
            continue;
        }
        let golds: Vec<_> = samples.iter().map(|s| s.gold_label.expect("annotated pool is labeled")).collect();
        let preds: Vec<_> = model.predict(&encoder.encode_batch(samples))?.into_iter().map(|p| p.label).collect();
        let report = MetricsReport::new(name, confusion(&preds, &golds)?);
        log::info!(
            "{name}: accuracy {:.4}, macro-F1 {:.4} over {} pairs",
            report.metrics.accuracy,
            report.metrics.macro_f1,
            report.samples
        );
        run.write(&format!("metrics_{name}.json"), report.to_json())?;
        run.write(&format!("metrics_{name}.csv"), report.to_csv())?;
    }
    run.finish()
}
