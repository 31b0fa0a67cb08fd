use rayon::prelude::*;

use super::lexicon::CategoryLexicon;
use super::normalize::Normalizer;
use super::tokenize::tokenize;
use super::vocab::{Vocabulary, PAD_ID, SEP_ID};
use super::TextError;
use crate::fingerprint::Fingerprint;
use crate::ingest::PairedSample;

/// Fixed-length classifier input for one (parent, reaction) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEncoding {
    /// Parent ids padded to L, SEP, reaction ids padded to L.
    pub ids: Vec<u32>,
    /// Parent category block then reaction category block.
    pub features: Vec<f64>,
    pub vocab_fingerprint: Fingerprint,
    pub lexicon_fingerprint: Fingerprint,
}

/// Vocabulary, lexicon, optional normalizer and half-length L bundled into
/// the pure function that turns samples into encodings.
#[derive(Debug, Clone)]
pub struct Encoder {
    vocab: Vocabulary,
    lexicon: CategoryLexicon,
    seq_len: usize,
    normalizer: Option<Normalizer>,
    vocab_fp: Fingerprint,
    lexicon_fp: Fingerprint,
}

impl Encoder {
    pub fn new(vocab: Vocabulary, lexicon: CategoryLexicon, seq_len: usize) -> Result<Self, TextError> {
        if seq_len == 0 {
            return Err(TextError::InvalidArgument("sequence length must be at least 1".into()));
        }
        let vocab_fp = vocab.fingerprint();
        let lexicon_fp = lexicon.fingerprint();
        Ok(Encoder { vocab, lexicon, seq_len, normalizer: None, vocab_fp, lexicon_fp })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn lexicon(&self) -> &CategoryLexicon {
        &self.lexicon
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    /// Total encoded sequence length, 2L + 1.
    pub fn encoded_len(&self) -> usize {
        2 * self.seq_len + 1
    }

    pub fn feature_dim(&self) -> usize {
        2 * self.lexicon.num_categories()
    }

    pub fn vocab_fingerprint(&self) -> Fingerprint {
        self.vocab_fp
    }

    pub fn lexicon_fingerprint(&self) -> Fingerprint {
        self.lexicon_fp
    }

    pub fn normalizer(&self) -> Option<&Normalizer> {
        self.normalizer.as_ref()
    }

    pub fn set_normalizer(&mut self, normalizer: Normalizer) -> Result<(), TextError> {
        if normalizer.dim() != self.feature_dim() {
            return Err(TextError::Dimension { expected: self.feature_dim(), found: normalizer.dim() });
        }
        self.normalizer = Some(normalizer);
        Ok(())
    }

    /// Unnormalized lexicon features: parent block then reaction block.
    pub fn raw_features(&self, sample: &PairedSample) -> Vec<f64> {
        let mut out = self.lexicon.features(&tokenize(&sample.parent_text));
        out.extend(self.lexicon.features(&tokenize(&sample.reaction_text)));
        out
    }

    /// Fits the z-score normalizer on (training) samples and installs it.
    pub fn fit_normalizer(&mut self, samples: &[PairedSample]) -> Result<&Normalizer, TextError> {
        let raw: Vec<Vec<f64>> = samples.par_iter().map(|s| self.raw_features(s)).collect();
        self.normalizer = Some(Normalizer::fit(&raw)?);
        Ok(self.normalizer.as_ref().expect("just set"))
    }

    fn push_half(&self, tokens: &[String], out: &mut Vec<u32>) {
        let kept = tokens.len().min(self.seq_len);
        out.extend(tokens[..kept].iter().map(|t| self.vocab.id(t) as u32));
        out.extend(std::iter::repeat(PAD_ID as u32).take(self.seq_len - kept));
    }

    pub fn encode(&self, sample: &PairedSample) -> PairEncoding {
        let parent = tokenize(&sample.parent_text);
        let reaction = tokenize(&sample.reaction_text);
        let mut ids = Vec::with_capacity(self.encoded_len());
        self.push_half(&parent, &mut ids);
        ids.push(SEP_ID as u32);
        self.push_half(&reaction, &mut ids);
        let mut features = self.lexicon.features(&parent);
        features.extend(self.lexicon.features(&reaction));
        if let Some(n) = &self.normalizer {
            features = n.apply(&features);
        }
        PairEncoding {
            ids,
            features,
            vocab_fingerprint: self.vocab_fp,
            lexicon_fingerprint: self.lexicon_fp,
        }
    }

    /// Parallel over samples; output order follows input order.
    pub fn encode_batch(&self, samples: &[PairedSample]) -> Vec<PairEncoding> {
        samples.par_iter().map(|s| self.encode(s)).collect()
    }
}

/// Encodes one pair without feature normalization.
pub fn encode_pair(
    sample: &PairedSample,
    vocab: &Vocabulary,
    lexicon: &CategoryLexicon,
    seq_len: usize,
) -> Result<PairEncoding, TextError> {
    Ok(Encoder::new(vocab.clone(), lexicon.clone(), seq_len)?.encode(sample))
}
