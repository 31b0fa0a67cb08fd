use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::TextError;
use crate::fingerprint::Fingerprint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub pattern: String,
    pub prefix: bool,
    pub categories: Vec<usize>,
}

/// Word/prefix → category lexicon.
///
/// A token matches its exact entry when one exists; otherwise the longest
/// prefix pattern it starts with. One match can hit several categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryLexicon {
    categories: Vec<String>,
    entries: Vec<LexiconEntry>,
    exact: HashMap<String, usize>,
    prefixes: HashMap<String, usize>,
}

impl CategoryLexicon {
    pub fn new(categories: Vec<String>, entries: Vec<LexiconEntry>) -> Result<Self, TextError> {
        if categories.is_empty() {
            return Err(TextError::Format { line: 0, message: "lexicon has no categories".into() });
        }
        let mut exact = HashMap::new();
        let mut prefixes = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if let Some(&bad) = e.categories.iter().find(|&&c| c >= categories.len()) {
                return Err(TextError::Format {
                    line: 0,
                    message: format!("category id {bad} out of range for `{}`", e.pattern),
                });
            }
            let map = if e.prefix { &mut prefixes } else { &mut exact };
            if map.insert(e.pattern.clone(), i).is_some() {
                return Err(TextError::Format {
                    line: 0,
                    message: format!("duplicate lexicon pattern `{}`", e.pattern),
                });
            }
        }
        Ok(CategoryLexicon { categories, entries, exact, prefixes })
    }

    /// Parses the tab-separated lexicon format: a `%categories<TAB>a,b,c`
    /// header followed by `pattern<TAB>cat1,cat2` lines; `*` suffix marks a
    /// prefix pattern and `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut categories: Option<Vec<String>> = None;
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| TextError::Format { line: line_no, message };
            let (left, right) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `pattern<TAB>categories`".into()))?;
            if left == "%categories" {
                if categories.is_some() {
                    return Err(err("repeated %categories header".into()));
                }
                let names: Vec<String> = right.split(',').map(|s| s.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    return Err(err("empty category name".into()));
                }
                categories = Some(names);
                continue;
            }
            let names = categories.as_ref().ok_or_else(|| err("entry before %categories header".into()))?;
            let pattern = left.trim().to_lowercase();
            let (pattern, prefix) = match pattern.strip_suffix('*') {
                Some(stem) => (stem.to_string(), true),
                None => (pattern, false),
            };
            if pattern.is_empty() {
                return Err(err("empty pattern".into()));
            }
            if !seen.insert((pattern.clone(), prefix)) {
                return Err(err(format!("duplicate pattern `{left}`")));
            }
            let mut cats = Vec::new();
            for name in right.split(',').map(str::trim) {
                let id = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| err(format!("unknown category `{name}`")))?;
                if !cats.contains(&id) {
                    cats.push(id);
                }
            }
            cats.sort_unstable();
            entries.push(LexiconEntry { pattern, prefix, categories: cats });
        }
        let categories = categories.ok_or(TextError::Format {
            line: 0,
            message: "missing %categories header".into(),
        })?;
        Self::new(categories, entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TextError::io(path, e))?;
        Self::parse(&text)
    }

    /// Twelve-category demonstration lexicon bundled with the crate.
    pub fn demo() -> Self {
        Self::parse(include_str!("../../data/demo_lexicon.tsv")).expect("bundled lexicon parses")
    }

    pub fn demo_text() -> &'static str {
        include_str!("../../data/demo_lexicon.tsv")
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Categories hit by one token.
    pub fn lookup(&self, token: &str) -> &[usize] {
        if let Some(&i) = self.exact.get(token) {
            return &self.entries[i].categories;
        }
        let mut ends: Vec<usize> = token.char_indices().map(|(i, c)| i + c.len_utf8()).collect();
        ends.reverse();
        for end in ends {
            if let Some(&i) = self.prefixes.get(&token[..end]) {
                return &self.entries[i].categories;
            }
        }
        &[]
    }

    /// Per-category hit count divided by `max(1, tokens.len())`.
    pub fn features<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut counts = vec![0usize; self.categories.len()];
        for t in tokens {
            for &c in self.lookup(t.as_ref()) {
                counts[c] += 1;
            }
        }
        let denom = tokens.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / denom).collect()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut canon: Vec<String> = self
            .entries
            .iter()
            .map(|e| {
                let cats: Vec<String> = e.categories.iter().map(|c| c.to_string()).collect();
                format!("{}{}\t{}", e.pattern, if e.prefix { "*" } else { "" }, cats.join(","))
            })
            .collect();
        canon.sort();
        let header = self.categories.join(",");
        Fingerprint::of_strings(std::iter::once(header.as_str()).chain(canon.iter().map(String::as_str)))
    }
}
