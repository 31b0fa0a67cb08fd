use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{Vocabulary, PAD_ID, RESERVED};
use super::TextError;

pub const EMBEDDING_DIM: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSource {
    Pretrained,
    Random,
}

/// V × dim initial embedding table with per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub dim: usize,
    /// Row-major, `rows * dim` values.
    pub values: Vec<f64>,
    pub provenance: Vec<RowSource>,
}

impl EmbeddingMatrix {
    pub fn rows(&self) -> usize {
        self.provenance.len()
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.values[id * self.dim..(id + 1) * self.dim]
    }

    /// Fraction of non-reserved vocabulary rows taken from the file.
    pub fn coverage(&self) -> f64 {
        let candidates = self.rows().saturating_sub(RESERVED.len());
        if candidates == 0 {
            return 0.0;
        }
        let hits = self.provenance[RESERVED.len()..]
            .iter()
            .filter(|p| **p == RowSource::Pretrained)
            .count();
        hits as f64 / candidates as f64
    }

    /// Every row drawn from uniform(−0.05, 0.05); PAD zeroed.
    pub fn random(vocab: &Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(vocab.len() * dim);
        for _ in 0..vocab.len() * dim {
            values.push(rng.gen_range(-0.05..0.05));
        }
        values[PAD_ID * dim..(PAD_ID + 1) * dim].fill(0.0);
        EmbeddingMatrix { dim, values, provenance: vec![RowSource::Random; vocab.len()] }
    }
}

/// Reads a text embedding file (`token v1 ... v_dim` per line) for the tokens
/// in `vocab`. Missing tokens keep their seeded random rows.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix, TextError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| TextError::io(path, e))?;
    read_embeddings(BufReader::new(file), vocab, dim, seed)
}

pub fn read_embeddings(
    reader: impl BufRead,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix, TextError> {
    let mut matrix = EmbeddingMatrix::random(vocab, dim, seed);
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| TextError::Format { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default();
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(TextError::Format {
                line: line_no,
                message: format!("expected {dim} values for `{token}`, found {}", values.len()),
            });
        }
        let Some(id) = vocab.get(token) else { continue };
        if id == PAD_ID {
            continue;
        }
        let row = &mut matrix.values[id * dim..(id + 1) * dim];
        for (slot, v) in row.iter_mut().zip(&values) {
            *slot = v.parse().map_err(|_| TextError::Format {
                line: line_no,
                message: format!("`{v}` is not a number"),
            })?;
        }
        matrix.provenance[id] = RowSource::Pretrained;
    }
    Ok(matrix)
}
