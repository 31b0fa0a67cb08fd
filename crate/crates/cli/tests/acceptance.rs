//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines always print. The process fails when
//! any criterion fails, except those listed in `KNOWN_UNATTAINABLE`, which
//! are still evaluated at their stated tolerance and reported as FAIL.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactscope::analysis::*;
use reactscope::ingest::*;
use reactscope::metrics::{confusion, prf, REFERENCE_F1};
use reactscope::model::{train, Dataset, Model, ModelConfig};
use reactscope::nn::*;
use reactscope::text::{tokenize, CategoryLexicon, EmbeddingMatrix, Encoder, Vocabulary};
use reactscope::{Platform, ReactionType, SourceClass, SourceGroup};

/// Criteria that cannot hold as stated, with the reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    6,
    "the continuity-corrected normal approximation differs from the exact p by more than 0.02 for n1 = n2 <= 4",
)];

/// Synthetic texts are at most a dozen tokens per half, so 16 positions hold
/// every token and longer halves only add padding.
const SYNTH_SEQ_LEN: usize = 16;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- helpers

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn with_data(t: &Tensor, data: &[f64]) -> Tensor {
    Tensor::from_vec(t.shape(), data.to_vec()).unwrap()
}

fn project(y: &Tensor, r: &Tensor) -> f64 {
    y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

fn check(value: impl Fn(&[f64]) -> f64, grad: Vec<f64>, at: &[f64]) -> f64 {
    let f = FnFragment { value, gradient: move |_: &[f64]| grad.clone() };
    grad_check(&f, at, GradCheckOptions::default()).max_rel_error
}

fn synth_encoder(samples: &[PairedSample], seq_len: usize) -> Encoder {
    let docs: Vec<Vec<String>> =
        samples.iter().flat_map(|s| [tokenize(&s.parent_text), tokenize(&s.reaction_text)]).collect();
    let vocab = Vocabulary::build(&docs, 1, 100_000);
    let mut encoder = Encoder::new(vocab, CategoryLexicon::demo(), seq_len).unwrap();
    encoder.fit_normalizer(samples).unwrap();
    encoder
}

fn accuracy(model: &Model, data: &Dataset) -> f64 {
    let preds = model.predict(&data.encodings).unwrap();
    preds.iter().zip(&data.labels).filter(|(p, g)| p.label == **g).count() as f64 / data.len() as f64
}

// ---------------------------------------------------------------- criteria

fn layer_errors() -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut out = Vec::new();

    let (x, w, b) = (random(&[4, 3], &mut rng), random(&[3, 2], &mut rng), random(&[2], &mut rng));
    let r = random(&[4, 2], &mut rng);
    let g = dense_backward(&x, &w, &r).unwrap();
    let e = check(|p| project(&dense_forward(&with_data(&x, p), &w, &b).unwrap(), &r), g.dx.data().to_vec(), x.data())
        .max(check(|p| project(&dense_forward(&x, &with_data(&w, p), &b).unwrap(), &r), g.dw.data().to_vec(), w.data()))
        .max(check(|p| project(&dense_forward(&x, &w, &with_data(&b, p)).unwrap(), &r), g.db.data().to_vec(), b.data()));
    out.push(("dense", e));

    let xr = Tensor::from_vec(
        &[4, 6],
        (0..24).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * rng.gen_range(0.1..1.0)).collect(),
    )
    .unwrap();
    let r = random(&[4, 6], &mut rng);
    let e = check(|p| project(&relu_forward(&with_data(&xr, p)), &r), relu_backward(&xr, &r).data().to_vec(), xr.data());
    out.push(("relu", e));

    let (x, k, b) = (random(&[2, 7, 3], &mut rng), random(&[3, 3, 4], &mut rng), random(&[4], &mut rng));
    let r = random(&[2, 5, 4], &mut rng);
    let g = conv1d_backward(&x, &k, &r).unwrap();
    let e = check(|p| project(&conv1d_forward(&with_data(&x, p), &k, &b).unwrap(), &r), g.dx.data().to_vec(), x.data())
        .max(check(|p| project(&conv1d_forward(&x, &with_data(&k, p), &b).unwrap(), &r), g.dk.data().to_vec(), k.data()))
        .max(check(|p| project(&conv1d_forward(&x, &k, &with_data(&b, p)).unwrap(), &r), g.db.data().to_vec(), b.data()));
    out.push(("conv1d", e));

    let mut vals: Vec<f64> = (0..54).map(|i| i as f64 * 0.37).collect();
    rand::seq::SliceRandom::shuffle(vals.as_mut_slice(), &mut rng);
    let x = Tensor::from_vec(&[2, 9, 3], vals).unwrap();
    let pooled = maxpool1d_forward(&x, 3).unwrap();
    let r = random(pooled.out.shape(), &mut rng);
    let g = maxpool1d_backward(x.shape(), &pooled.argmax, &r);
    let e = check(|p| project(&maxpool1d_forward(&with_data(&x, p), 3).unwrap().out, &r), g.data().to_vec(), x.data());
    out.push(("maxpool", e));

    let table = random(&[7, 4], &mut rng);
    let ids: Vec<u32> = vec![3, 1, 3, 2, 6, 2, 3, 5, 1, 4];
    let r = random(&[2, 5, 4], &mut rng);
    let mut dense = Tensor::zeros(&[7, 4]);
    embedding_backward(&ids, &r).unwrap().scatter_into(&mut dense);
    let e = check(
        |p| project(&embedding_forward(&ids, 5, &with_data(&table, p)).unwrap(), &r),
        dense.data().to_vec(),
        table.data(),
    );
    out.push(("embedding", e));

    let logits = random(&[3, 9], &mut rng);
    let gold = [0, 4, 8];
    let sce = softmax_cross_entropy(&logits, &gold, None).unwrap();
    let e = check(
        |p| softmax_cross_entropy(&with_data(&logits, p), &gold, None).unwrap().loss,
        sce.grad.data().to_vec(),
        logits.data(),
    );
    out.push(("softmax_cross_entropy", e));
    out
}

fn network_error(layout: reactscope::model::FusionLayout) -> f64 {
    let lexicon = CategoryLexicon::demo();
    let fx = synth_fixture(5, 36, &lexicon, &SynthConfig::default()).unwrap();
    let encoder = synth_encoder(&fx.samples, 4);
    let embeddings = EmbeddingMatrix::random(encoder.vocab(), 200, 5);
    let cfg = ModelConfig { seq_len: 4, fusion_layout: layout, ..ModelConfig::default() };
    let mut model = Model::build(cfg, &embeddings, &encoder).unwrap();
    // Zero biases put padded positions on the ReLU kink; check at a generic point.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in model.params_mut().iter_mut().filter(|p| p.name.ends_with(".bias")) {
        p.value.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-0.1..0.1));
    }
    let batch = encoder.encode_batch(&fx.samples[..4]);
    let gold: Vec<usize> = fx.samples[..4].iter().map(|s| s.gold_label.unwrap().index()).collect();
    let (_, grads) = model.loss_and_gradients(&batch, &gold, None, true).unwrap();
    let mut worst: f64 = 0.0;
    for (pi, param) in model.params().iter().enumerate() {
        let analytic = if pi == 0 {
            let mut dense = Tensor::zeros(param.value.shape());
            grads.embedding.scatter_into(&mut dense);
            dense.into_data()
        } else {
            grads.dense[pi].data().to_vec()
        };
        let value = |p: &[f64]| {
            let mut m = model.clone();
            m.params_mut()[pi].value.data_mut().copy_from_slice(p);
            m.loss_and_gradients(&batch, &gold, None, true).unwrap().0
        };
        let f = FnFragment { value, gradient: |_: &[f64]| analytic.clone() };
        let report = grad_check(&f, param.value.data(), GradCheckOptions { seed: pi as u64, ..Default::default() });
        worst = worst.max(report.max_rel_error);
    }
    worst
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut parts: Vec<(&str, f64)> = layer_errors();
    parts.push(("network/concat", network_error(reactscope::model::FusionLayout::Concat)));
    parts.push(("network/text_dense", network_error(reactscope::model::FusionLayout::TextDense)));
    let secs = t.elapsed().as_secs_f64();
    let worst = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let detail = parts.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", ");
    outcome(worst < 1e-4 && secs < 120.0, format!("max rel error {worst:.2e} < 1e-4 in {secs:.1}s ({detail})"))
}

fn criterion_2() -> Outcome {
    let fx = synth_fixture(2, 200, &CategoryLexicon::demo(), &SynthConfig::default()).unwrap();
    let corpus = AnnotatedCorpus::from_rows(fx.annotations.clone());
    let encoder = synth_encoder(&corpus.samples, SYNTH_SEQ_LEN);
    let embeddings = EmbeddingMatrix::random(encoder.vocab(), 200, 2);
    let cfg = ModelConfig { seq_len: SYNTH_SEQ_LEN, seed: 2, max_epochs: 200, patience: 10, ..ModelConfig::default() };
    let data = Dataset::from_samples(&encoder, &corpus.samples);
    let model = Model::build(cfg, &embeddings, &encoder).unwrap();
    let (model, history) = train(model, &data, &data, &Default::default()).unwrap();
    let acc = accuracy(&model, &data);
    outcome(
        acc == 1.0 && history.chosen_epoch <= 200,
        format!("{} annotated pairs, train accuracy {acc:.4} at epoch {}", data.len(), history.chosen_epoch),
    )
}

struct Learned {
    model: Model,
    encoder: Encoder,
    dev_records: Vec<ReactionRecord>,
    registry: SourceRegistry,
}

fn criterion_3() -> (Outcome, Learned) {
    let t = Instant::now();
    let lexicon = CategoryLexicon::demo();
    let fx = synth_fixture(3, 6000, &lexicon, &SynthConfig::default()).unwrap();
    let (train_s, dev_s) = fx.samples.split_at(5000);
    let rule_hits = fx
        .samples
        .iter()
        .filter(|s| Some(signature_rule(&fx.manifest, &s.reaction_text)) == s.gold_label)
        .count();
    let rule_acc = rule_hits as f64 / fx.samples.len() as f64;

    let docs: Vec<Vec<String>> =
        train_s.iter().flat_map(|s| [tokenize(&s.parent_text), tokenize(&s.reaction_text)]).collect();
    let vocab = Vocabulary::build(&docs, 1, 100_000);
    let mut encoder = Encoder::new(vocab, lexicon, SYNTH_SEQ_LEN).unwrap();
    encoder.fit_normalizer(train_s).unwrap();
    let embeddings = EmbeddingMatrix::random(encoder.vocab(), 200, 3);
    let cfg = ModelConfig { seq_len: SYNTH_SEQ_LEN, seed: 3, max_epochs: 20, patience: 3, ..ModelConfig::default() };
    let model = Model::build(cfg, &embeddings, &encoder).unwrap();
    let train_set = Dataset::from_samples(&encoder, train_s);
    let dev_set = Dataset::from_samples(&encoder, dev_s);
    let (model, history) = train(model, &train_set, &dev_set, &Default::default()).unwrap();
    let f1 = history.best().dev_macro_f1;
    let secs = t.elapsed().as_secs_f64();
    let out = outcome(
        f1 >= 0.90 && rule_acc >= 0.99 && secs < 600.0,
        format!(
            "dev macro-F1 {f1:.4} >= 0.90 (epoch {} of {}), signature rule {rule_acc:.4} >= 0.99, {secs:.0}s",
            history.chosen_epoch,
            history.epochs.len()
        ),
    );
    let dev_records = fx.records[5000..].to_vec();
    (out, Learned { model, encoder, dev_records, registry: fx.registry })
}

fn criterion_4() -> Outcome {
    use ReactionType::*;
    let counts = [3_857, 32_561, 6_973, 2_654, 14_966, 1_878, 1_473, 8_194, 1_538];
    let d = TypeDistribution::from_counts_with_unresolved("annotated", None, counts, 9_532).unwrap();
    let printed = [
        (Agreement, 4.61),
        (Answer, 38.94),
        (Appreciation, 8.34),
        (Disagreement, 3.17),
        (Elaboration, 17.90),
        (Humor, 2.25),
        (NegativeReaction, 1.76),
        (Other, 1.84),
        (Question, 9.80),
    ];
    let worst = printed.iter().map(|(t, p)| (d.percent_of(*t) - p).abs()).fold(0.0, f64::max);
    let no_majority = (d.unresolved_percent() - 11.40).abs();
    outcome(
        worst <= 0.005 && no_majority <= 0.005 && d.total == 83_626,
        format!(
            "answer {:.4}%, agreement {:.4}%, max deviation {worst:.4} <= 0.005 over {} items",
            d.percent_of(Answer),
            d.percent_of(Agreement),
            d.total
        ),
    )
}

fn criterion_5() -> Outcome {
    let volumes = bundled_source_volumes();
    let registry = registry_from_volumes(&volumes).unwrap();
    let t = VolumeTotals::tally(&volumes, &registry).unwrap();
    let tw_nd = t.reactions(Platform::Twitter, SourceGroup::DeceptiveNoDisinfo);
    let tw_all = t.reactions(Platform::Twitter, SourceGroup::DeceptiveAll);
    let rd_all = t.reactions(Platform::Reddit, SourceGroup::DeceptiveAll);
    let pass = tw_nd == 775_844
        && tw_nd == 40_347 + 126_246 + 609_251
        && tw_all == 4_263_576
        && rd_all == 795_530
        && rd_all != 795_591
        && registry.count(Platform::Twitter, SourceClass::Trusted) == 182;
    outcome(
        pass,
        format!("twitter no-disinfo {tw_nd}, all-deceptive {tw_all}; reddit all-deceptive {rd_all} vs published 795591 (known mismatch)"),
    )
}

fn criterion_6() -> Outcome {
    let mut worst_by_n = BTreeMap::new();
    let mut sums_ok = true;
    let mut symmetric = true;
    for n in 1..=8usize {
        let mut worst: f64 = 0.0;
        for seed in 0..300u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 16 + n as u64);
            let a: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let exact = mann_whitney_u(&a, &b, MwuMethod::Exact).unwrap();
            let normal = mann_whitney_u(&a, &b, MwuMethod::Normal).unwrap();
            let swapped = mann_whitney_u(&b, &a, MwuMethod::Exact).unwrap();
            sums_ok &= exact.u1 + exact.u2 == (n * n) as f64 && normal.u1 + normal.u2 == (n * n) as f64;
            symmetric &= swapped.u1 == exact.u2 && (swapped.p - exact.p).abs() < 1e-12;
            worst = worst.max((exact.p - normal.p).abs());
        }
        worst_by_n.insert(n, worst);
    }
    let worst = worst_by_n.values().copied().fold(0.0, f64::max);
    let detail = worst_by_n.iter().map(|(n, w)| format!("n={n} {w:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        worst <= 0.02 && sums_ok && symmetric,
        format!("max |p_normal - p_exact| {worst:.4} (limit 0.02; {detail}); U1+U2=n1n2 {sums_ok}; swap symmetry {symmetric}"),
    )
}

fn criterion_7() -> Outcome {
    let hand = delay_cdf(&[1800, 5400, 9000], 3600).unwrap();
    let hand_ok = hand.points == [(3600, 1.0 / 3.0), (7200, 2.0 / 3.0), (10800, 1.0)];
    let mut props_ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..200);
        let delays: Vec<i64> = (0..n).map(|_| rng.gen_range(0..500_000)).collect();
        let c = delay_cdf(&delays, DEFAULT_STEP_SECS).unwrap();
        let monotone = c.points.windows(2).all(|w| w[0].1 <= w[1].1);
        let aligned = c.points.iter().enumerate().all(|(k, p)| p.0 == (k as u64 + 1) * 3600);
        let terminal = c.points.last().map(|p| p.1) == Some(1.0);
        props_ok &= monotone && aligned && terminal;
    }
    outcome(
        hand_ok && props_ok,
        format!("3-sample example exact {hand_ok}; monotone, hour-aligned, terminal 1.0 over 200 seeded sets {props_ok}"),
    )
}

fn criterion_8() -> Outcome {
    use ReactionType::*;
    let all = ReactionType::ALL.to_vec();
    let perfect = prf(&confusion(&all, &all).unwrap());
    let perfect_ok = perfect.per_class.iter().all(|c| c.f1 == 1.0) && perfect.macro_f1 == 1.0;
    let degenerate = prf(&confusion(&[Answer, Answer], &[Answer, Question]).unwrap());
    let degenerate_ok = degenerate.get(Answer).f1 == 2.0 / 3.0 && degenerate.get(Question).f1 == 0.0;
    let hand = prf(&confusion(&[Answer, Answer, Question, Question], &[Answer, Answer, Answer, Question]).unwrap());
    let hand_ok = hand.get(Answer).precision == 1.0 && hand.get(Answer).recall == 2.0 / 3.0 && hand.get(Question).precision == 0.5;
    outcome(
        perfect_ok && degenerate_ok && hand_ok,
        format!(
            "perfect {perfect_ok}, one-class degenerate 2/3 and 0 {degenerate_ok}, hand case {hand_ok}; {} reference F1 values shipped, not asserted",
            REFERENCE_F1.len()
        ),
    )
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn pipeline(dir: &Path) -> Result<(), String> {
    std::fs::write(dir.join("run.toml"), "seed = 17\n[model_config]\nseq_len = 16\nmax_epochs = 4\npatience = 2\n")
        .unwrap();
    for stage in [&["fixture", "--size", "600"][..], &["vocab"], &["train"], &["predict"], &["analyze"]] {
        let out = Command::new(env!("CARGO_BIN_EXE_reactscope"))
            .args(["--config", "run.toml", "--serial", "--out", "out"])
            .args(stage)
            .current_dir(dir)
            .env("RUST_LOG", "warn")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{stage:?}: {}", String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if let Err(e) = pipeline(a.path()).and_then(|_| pipeline(b.path())) {
        return outcome(false, format!("pipeline failed: {e}"));
    }
    let (fa, fb) = (files_under(&a.path().join("out")), files_under(&b.path().join("out")));
    let same_names = fa.keys().eq(fb.keys());
    let differing: Vec<_> = fa.iter().filter(|(k, v)| fb.get(*k) != Some(*v)).map(|(k, _)| k.display().to_string()).collect();
    outcome(
        same_names && differing.is_empty() && !fa.is_empty(),
        format!(
            "fixture -> vocab -> train -> predict -> analyze twice: {} files, {} differ{}",
            fa.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(" ({})", differing.join(", ")) }
        ),
    )
}

fn rate(model: &Model, encoder: &Encoder, records: &[ReactionRecord], registry: &SourceRegistry) -> f64 {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let t = Instant::now();
        let out = label_corpus(model, encoder, records, registry).unwrap();
        out.labeled.len() as f64 / t.elapsed().as_secs_f64()
    })
}

fn criterion_10(learned: &Learned) -> Outcome {
    let synth = rate(&learned.model, &learned.encoder, &learned.dev_records, &learned.registry);
    // Full-size architecture: throughput depends on shapes, not on weight values.
    let samples: Vec<PairedSample> = learned.dev_records.iter().map(|r| r.to_sample()).collect();
    let encoder = synth_encoder(&samples, 100);
    let embeddings = EmbeddingMatrix::random(encoder.vocab(), 200, 10);
    let mut full = Model::build(ModelConfig::default(), &embeddings, &encoder).unwrap();
    full.allow_untrained();
    let canonical = rate(&full, &encoder, &learned.dev_records, &learned.registry);
    outcome(
        synth >= 1000.0 && canonical >= 1000.0,
        format!(
            "single thread: {synth:.0} reactions/s at L={SYNTH_SEQ_LEN} (trained), {canonical:.0} reactions/s at L=100; target 1000/s, reported only"
        ),
    )
}

fn main() {
    println!("\nacceptance criteria");
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:>2} {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
        results.push((id, name, o));
    };
    run(1, "gradient correctness", &mut criterion_1);
    run(2, "capacity", &mut criterion_2);
    let mut learned = None;
    run(3, "learnability", &mut || {
        let (o, l) = criterion_3();
        learned = Some(l);
        o
    });
    run(4, "annotation table arithmetic", &mut criterion_4);
    run(5, "platform volume arithmetic", &mut criterion_5);
    run(6, "Mann-Whitney U correctness", &mut criterion_6);
    run(7, "CDF correctness", &mut criterion_7);
    run(8, "metrics correctness", &mut criterion_8);
    run(9, "end-to-end determinism", &mut criterion_9);
    let learned = learned.expect("criterion 3 ran");
    run(10, "throughput (soft)", &mut || criterion_10(&learned));

    let mut blocking = Vec::new();
    for (id, name, o) in &results {
        if o.pass || *id == 10 {
            continue;
        }
        match KNOWN_UNATTAINABLE.iter().find(|(k, _)| k == id) {
            Some((_, why)) => println!("note: criterion {id} ({name}) fails as documented: {why}"),
            None => blocking.push(*id),
        }
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    if !blocking.is_empty() {
        println!("unexpected failures: {blocking:?}");
        std::process::exit(1);
    }
}
