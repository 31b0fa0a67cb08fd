#![allow(dead_code)]

use reactscope::ingest::{synth_fixture, SynthConfig, SynthFixture};
use reactscope::model::ModelConfig;
use reactscope::text::{tokenize, CategoryLexicon, EmbeddingMatrix, Encoder, Vocabulary};

pub struct Setup {
    pub fixture: SynthFixture,
    pub encoder: Encoder,
    pub embeddings: EmbeddingMatrix,
}

pub fn vocab_of(samples: &[reactscope::ingest::PairedSample]) -> Vocabulary {
    let corpus: Vec<Vec<String>> =
        samples.iter().flat_map(|s| [tokenize(&s.parent_text), tokenize(&s.reaction_text)]).collect();
    Vocabulary::build(&corpus, 1, 100_000)
}

/// Synthetic fixture with a vocabulary over all of it, a fitted normalizer
/// and random 200-d embeddings.
pub fn setup(n: usize, seq_len: usize, seed: u64) -> Setup {
    let lexicon = CategoryLexicon::demo();
    let fixture = synth_fixture(seed, n, &lexicon, &SynthConfig::default()).unwrap();
    let vocab = vocab_of(&fixture.samples);
    let embeddings = EmbeddingMatrix::random(&vocab, 200, seed);
    let mut encoder = Encoder::new(vocab, lexicon, seq_len).unwrap();
    encoder.fit_normalizer(&fixture.samples).unwrap();
    Setup { fixture, encoder, embeddings }
}

pub fn config(seq_len: usize) -> ModelConfig {
    ModelConfig { seq_len, ..Default::default() }
}
