use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotationRow, IngestError, PairedSample, ReactionRecord, SourceRegistry};
use crate::labels::{Platform, ReactionType, SourceClass};
use crate::text::{tokenize, CategoryLexicon};

/// 2016-01-01T00:00:00Z.
const EPOCH_START: i64 = 1_451_606_400;
const SPAN_SECS: i64 = 396 * 86_400;

const CLASS_STEMS: [&str; 9] = ["agr", "ans", "apr", "dis", "ela", "hum", "neg", "que", "oth"];
const SIG_SUFFIXES: [&str; 6] = ["ka", "lo", "mu", "ri", "te", "zo"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub signature_tokens_per_class: usize,
    /// Independent signature-token slots per reaction.
    pub signature_slots: usize,
    /// Probability that each slot receives a signature token.
    pub injection_prob: f64,
    /// Probability of injecting one word from the class's lexicon category.
    pub lexicon_prob: f64,
    pub filler_vocab: usize,
    pub reaction_filler: (usize, usize),
    pub parent_filler: (usize, usize),
    /// Probability that a Twitter record has no parent text.
    pub bare_retweet_prob: f64,
    pub mean_delay_secs: f64,
    /// Added to every delay of a deceptive-source reaction.
    pub deceptive_delay_shift_secs: i64,
    /// Sources per platform for trusted, clickbait, conspiracy, propaganda, disinformation.
    pub sources_per_class: [usize; 5],
    pub annotators: usize,
    /// Fraction of annotation rows whose votes have no strict majority.
    pub no_majority_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            signature_tokens_per_class: 3,
            signature_slots: 3,
            injection_prob: 0.9,
            lexicon_prob: 0.9,
            filler_vocab: 400,
            reaction_filler: (3, 8),
            parent_filler: (3, 10),
            bare_retweet_prob: 0.2,
            mean_delay_secs: 7_200.0,
            deceptive_delay_shift_secs: 3_600,
            sources_per_class: [4, 1, 1, 1, 1],
            annotators: 3,
            no_majority_rate: 0.0,
        }
    }
}

/// Ground truth written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub seed: u64,
    pub n: usize,
    pub config: SynthConfig,
    pub reaction_type_counts: BTreeMap<ReactionType, usize>,
    pub source_class_counts: BTreeMap<SourceClass, usize>,
    pub platform_counts: BTreeMap<Platform, usize>,
    pub signature_tokens: BTreeMap<ReactionType, Vec<String>>,
    pub lexicon_words: BTreeMap<ReactionType, Vec<String>>,
    pub no_majority_items: usize,
    pub true_labels: Vec<ReactionType>,
}

#[derive(Debug, Clone)]
pub struct SynthFixture {
    /// Gold-labeled pairs, one per record, same order as `records`.
    pub samples: Vec<PairedSample>,
    pub records: Vec<ReactionRecord>,
    pub registry: SourceRegistry,
    pub annotations: Vec<AnnotationRow>,
    pub manifest: FixtureManifest,
}

fn filler_words(count: usize, lexicon: &CategoryLexicon, reserved: &[String]) -> Vec<String> {
    const CONS: &[u8] = b"bdfgklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let mut out = Vec::with_capacity(count);
    'outer: for &c1 in CONS {
        for &v1 in VOWELS {
            for &c2 in CONS {
                for &v2 in VOWELS {
                    if out.len() == count {
                        break 'outer;
                    }
                    let w = String::from_utf8(vec![c1, v1, c2, v2]).expect("ascii");
                    if lexicon.lookup(&w).is_empty() && !reserved.contains(&w) {
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

/// Exact single-category words of the lexicon category assigned to `label`.
fn category_words(lexicon: &CategoryLexicon, label: ReactionType) -> Vec<String> {
    let cat = label.index() % lexicon.num_categories();
    lexicon
        .entries()
        .iter()
        .filter(|e| !e.prefix && e.categories == [cat])
        .filter(|e| tokenize(&e.pattern) == [e.pattern.clone()])
        .map(|e| e.pattern.clone())
        .collect()
}

fn source_key(platform: Platform, class: SourceClass, i: usize) -> String {
    match platform {
        Platform::Reddit => format!("{class}-news-{i}.example"),
        Platform::Twitter => format!("{class}news{i}"),
    }
}

/// Generates a corpus whose classes are separable by construction.
///
/// Labels are assigned round-robin over the nine reaction types. Each class
/// owns a disjoint set of signature tokens; every reaction has
/// `signature_slots` independent chances to receive one. Records alternate
/// between Reddit and Twitter and are attributed to synthetic sources.
pub fn synth_fixture(
    seed: u64,
    n: usize,
    lexicon: &CategoryLexicon,
    config: &SynthConfig,
) -> Result<SynthFixture, IngestError> {
    if n < ReactionType::COUNT {
        return Err(IngestError::InvalidArgument(format!("fixture needs n >= 9, got {n}")));
    }
    if config.signature_tokens_per_class == 0 || config.signature_tokens_per_class > SIG_SUFFIXES.len() {
        return Err(IngestError::InvalidArgument("signature_tokens_per_class must be 1..=6".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let signatures: BTreeMap<ReactionType, Vec<String>> = ReactionType::ALL
        .iter()
        .map(|&t| {
            let toks = SIG_SUFFIXES[..config.signature_tokens_per_class]
                .iter()
                .map(|s| format!("q{}x{}", CLASS_STEMS[t.index()], s))
                .collect();
            (t, toks)
        })
        .collect();
    let all_sigs: Vec<String> = signatures.values().flatten().cloned().collect();
    debug_assert!(all_sigs.iter().all(|s| lexicon.lookup(s).is_empty()));
    let lex_words: BTreeMap<ReactionType, Vec<String>> =
        ReactionType::ALL.iter().map(|&t| (t, category_words(lexicon, t))).collect();
    let filler = filler_words(config.filler_vocab, lexicon, &all_sigs);

    let mut sources: BTreeMap<Platform, Vec<(String, SourceClass)>> = BTreeMap::new();
    let mut registry = SourceRegistry::new();
    for platform in Platform::ALL {
        for (class, &count) in SourceClass::ALL.iter().zip(&config.sources_per_class) {
            for i in 1..=count {
                let key = source_key(platform, *class, i);
                registry.insert(platform, &key, *class)?;
                sources.entry(platform).or_default().push((key, *class));
            }
        }
    }

    let pick_filler = |rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)| -> Vec<String> {
        let len = rng.gen_range(lo..=hi);
        (0..len).map(|_| filler.choose(rng).expect("filler").clone()).collect()
    };

    let mut manifest = FixtureManifest {
        seed,
        n,
        config: config.clone(),
        reaction_type_counts: BTreeMap::new(),
        source_class_counts: BTreeMap::new(),
        platform_counts: BTreeMap::new(),
        signature_tokens: signatures.clone(),
        lexicon_words: lex_words.clone(),
        no_majority_items: 0,
        true_labels: Vec::with_capacity(n),
    };
    let mut samples = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    let mut annotations = Vec::with_capacity(n);

    for i in 0..n {
        let label = ReactionType::ALL[i % ReactionType::COUNT];
        let mut words = pick_filler(&mut rng, config.reaction_filler);
        for _ in 0..config.signature_slots {
            if rng.gen_bool(config.injection_prob) {
                words.push(signatures[&label].choose(&mut rng).expect("signature").clone());
            }
        }
        if !lex_words[&label].is_empty() && rng.gen_bool(config.lexicon_prob) {
            words.push(lex_words[&label].choose(&mut rng).expect("word").clone());
        }
        words.shuffle(&mut rng);
        let reaction_text = words.join(" ");

        let platform = Platform::ALL[i % 2];
        let mut parent_text = pick_filler(&mut rng, config.parent_filler).join(" ");
        if platform == Platform::Twitter && rng.gen_bool(config.bare_retweet_prob) {
            parent_text.clear();
        }
        let (key, class) = sources[&platform].choose(&mut rng).expect("source").clone();
        let parent_created_at = EPOCH_START + rng.gen_range(0..SPAN_SECS);
        let u: f64 = rng.gen();
        let mut delay = (-(1.0 - u).ln() * config.mean_delay_secs).floor() as i64;
        if class.is_deceptive() {
            delay += config.deceptive_delay_shift_secs;
        }
        let prefix = match platform {
            Platform::Reddit => "rd",
            Platform::Twitter => "tw",
        };
        records.push(ReactionRecord {
            platform,
            reaction_id: format!("{prefix}{i:07}"),
            parent_id: format!("{prefix}post{:05}", rng.gen_range(0..n.max(1))),
            source_key: key,
            reaction_text: reaction_text.clone(),
            parent_text: parent_text.clone(),
            parent_created_at,
            reaction_created_at: parent_created_at + delay,
        });

        let annotators = config.annotators.max(3);
        let votes: Vec<Option<ReactionType>> = if rng.gen_bool(config.no_majority_rate) {
            manifest.no_majority_items += 1;
            // Every label at most once: no strict majority for annotators >= 3.
            let mut others: Vec<ReactionType> =
                ReactionType::ALL.iter().copied().filter(|&t| t != label).collect();
            others.shuffle(&mut rng);
            let mut v = vec![Some(label)];
            v.extend(others.into_iter().take(annotators - 1).map(Some));
            v.resize(annotators, None);
            v
        } else {
            let dissent = if rng.gen_bool(0.3) { (annotators - 1) / 2 } else { 0 };
            let mut v = vec![Some(label); annotators - dissent];
            for _ in 0..dissent {
                let other = loop {
                    let t = *ReactionType::ALL.choose(&mut rng).expect("label");
                    if t != label {
                        break t;
                    }
                };
                v.push(Some(other));
            }
            v
        };
        annotations.push(AnnotationRow {
            item_id: format!("item{i:07}"),
            parent_text: parent_text.clone(),
            text: reaction_text.clone(),
            votes,
        });

        *manifest.reaction_type_counts.entry(label).or_default() += 1;
        *manifest.source_class_counts.entry(class).or_default() += 1;
        *manifest.platform_counts.entry(platform).or_default() += 1;
        manifest.true_labels.push(label);
        samples.push(PairedSample { parent_text, reaction_text, gold_label: Some(label) });
    }

    Ok(SynthFixture { samples, records, registry, annotations, manifest })
}

/// Closed-form decision rule of the generator: the class with the most
/// signature tokens, else the class with the most category words, else the
/// first class. Ties go to the earlier class.
pub fn signature_rule(manifest: &FixtureManifest, reaction_text: &str) -> ReactionType {
    let tokens = tokenize(reaction_text);
    let score = |table: &BTreeMap<ReactionType, Vec<String>>| -> Option<ReactionType> {
        let mut best: Option<(usize, ReactionType)> = None;
        for t in ReactionType::ALL {
            let hits = tokens.iter().filter(|tok| table[&t].contains(tok)).count();
            if hits > 0 && best.is_none_or(|(b, _)| hits > b) {
                best = Some((hits, t));
            }
        }
        best.map(|(_, t)| t)
    };
    score(&manifest.signature_tokens)
        .or_else(|| score(&manifest.lexicon_words))
        .unwrap_or(ReactionType::ALL[0])
}
