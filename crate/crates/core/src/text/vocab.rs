use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::TextError;
use crate::fingerprint::Fingerprint;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const SEP_ID: usize = 2;
pub const RESERVED: [&str; 3] = ["<pad>", "<unk>", "<sep>"];

/// Dense token ids. Ids 0..3 are reserved for PAD, UNK and SEP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_tokens_unchecked(tokens: Vec<String>) -> Self {
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens, ids }
    }

    /// Token list in id order, reserved tokens first. Fails on duplicates or
    /// a wrong reserved prefix.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, TextError> {
        if tokens.len() < RESERVED.len() || tokens[..3] != RESERVED {
            return Err(TextError::Format {
                line: 1,
                message: "vocabulary must start with <pad>, <unk>, <sep>".into(),
            });
        }
        let vocab = Self::from_tokens_unchecked(tokens);
        if vocab.ids.len() != vocab.tokens.len() {
            return Err(TextError::Format { line: 0, message: "duplicate vocabulary token".into() });
        }
        Ok(vocab)
    }

    /// Tokens with frequency ≥ `min_count`, most frequent first, ties
    /// lexicographic; at most `max_size` ids including the reserved ones.
    pub fn build<I, S>(corpus: I, min_count: usize, max_size: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[String]>,
    {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        let corpus: Vec<S> = corpus.into_iter().collect();
        for doc in &corpus {
            for tok in doc.as_ref() {
                *freq.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = freq
            .into_iter()
            .filter(|(t, c)| *c >= min_count.max(1) && !RESERVED.contains(t))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let room = max_size.saturating_sub(RESERVED.len());
        tokens.extend(ranked.into_iter().take(room).map(|(t, _)| t.to_string()));
        Self::from_tokens_unchecked(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() == RESERVED.len()
    }

    pub fn id(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of_strings(self.tokens.iter().map(String::as_str))
    }

    /// One token per line in id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TextError> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| TextError::io(path, e))?;
        f.write_all(self.to_text().as_bytes()).map_err(|e| TextError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TextError::io(path, e))?;
        Self::from_tokens(text.lines().map(str::to_string).collect())
    }
}
