//! Binary model container.
//!
//! Layout (little-endian): magic `RSCM`, u32 format version, u32-length JSON
//! config, u8 trained flag, vocabulary and lexicon fingerprints (32 bytes
//! each), u32 label count and one u8 label index per class, u8 normalizer
//! flag with u32 dimension and mean/sd values, u32 parameter count and per
//! parameter a u32-length name, u32 rank, u64 dims and f64 values. A SHA-256
//! of everything before it closes the file.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ModelConfig;
use super::network::{Model, TrainSummary};
use super::ModelError;
use crate::fingerprint::Fingerprint;
use crate::labels::ReactionType;
use crate::nn::{Param, Tensor, PAD_ROW};
use crate::text::Normalizer;

pub const MAGIC: &[u8; 4] = b"RSCM";
pub const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len());
        self.0.extend_from_slice(b);
    }
    fn f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|x| self.0.extend_from_slice(&x.to_le_bytes()));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| ModelError::Format(format!("unexpected end of data at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<usize, ModelError> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| ModelError::Format(format!("dimension {v} too large")))
    }
    fn bytes(&mut self) -> Result<&'a [u8], ModelError> {
        let n = self.u32()?;
        self.take(n)
    }
    fn fingerprint(&mut self) -> Result<Fingerprint, ModelError> {
        Ok(Fingerprint(self.take(32)?.try_into().expect("32 bytes")))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, ModelError> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| ModelError::Format("tensor too large".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}

/// Serializes the model to the container format.
pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.bytes(&serde_json::to_vec(&model.config).expect("config serializes"));
    w.u8(model.trained as u8);
    w.0.extend_from_slice(&model.vocab_fingerprint.0);
    w.0.extend_from_slice(&model.lexicon_fingerprint.0);
    w.u32(model.label_order.len());
    model.label_order.iter().for_each(|l| w.u8(l.index() as u8));
    match &model.normalizer {
        Some(n) => {
            w.u8(1);
            w.u32(n.dim());
            w.f64s(&n.mean);
            w.f64s(&n.sd);
        }
        None => w.u8(0),
    }
    w.u32(model.params.len());
    for p in &model.params {
        w.bytes(p.name.as_bytes());
        w.u32(p.value.shape().len());
        p.value.shape().iter().for_each(|&d| w.0.extend_from_slice(&(d as u64).to_le_bytes()));
        w.f64s(p.value.data());
    }
    let digest = Sha256::digest(&w.0);
    w.0.extend_from_slice(&digest);
    w.0
}

/// Parses a container, verifying magic, checksum and version. No model is
/// returned unless every check passes.
pub fn from_bytes(buf: &[u8]) -> Result<Model, ModelError> {
    if buf.len() < MAGIC.len() + 4 + CHECKSUM_LEN {
        return Err(ModelError::Checksum);
    }
    if &buf[..4] != MAGIC {
        return Err(ModelError::Format("missing RSCM magic bytes".into()));
    }
    let (body, stored) = buf.split_at(buf.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != stored {
        return Err(ModelError::Checksum);
    }
    let mut r = Reader { buf: body, pos: 4 };
    let version = r.u32()? as u32;
    if version != FORMAT_VERSION {
        return Err(ModelError::Version { found: version, supported: FORMAT_VERSION });
    }
    let config: ModelConfig =
        serde_json::from_slice(r.bytes()?).map_err(|e| ModelError::Format(format!("config: {e}")))?;
    config.validate()?;
    let trained = r.u8()? != 0;
    let vocab_fingerprint = r.fingerprint()?;
    let lexicon_fingerprint = r.fingerprint()?;
    let n_labels = r.u32()?;
    let label_order = (0..n_labels)
        .map(|_| {
            let i = r.u8()? as usize;
            ReactionType::from_index(i).ok_or_else(|| ModelError::Format(format!("label index {i} out of range")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let normalizer = match r.u8()? {
        0 => None,
        _ => {
            let dim = r.u32()?;
            Some(Normalizer { mean: r.f64s(dim)?, sd: r.f64s(dim)? })
        }
    };
    let n_params = r.u32()?;
    let mut params = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        let name = String::from_utf8(r.bytes()?.to_vec()).map_err(|_| ModelError::Format("parameter name is not UTF-8".into()))?;
        let rank = r.u32()?;
        let shape = (0..rank).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
        let count = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let count = count.ok_or_else(|| ModelError::Format(format!("{name}: shape overflows")))?;
        let value = Tensor::from_vec(&shape, r.f64s(count)?)?;
        let param = Param::new(name, value);
        params.push(if params.is_empty() { param.frozen(&[PAD_ROW]) } else { param });
    }
    if r.pos != body.len() {
        return Err(ModelError::Format(format!("{} trailing bytes", body.len() - r.pos)));
    }
    let feature_dim = params
        .get(5)
        .map(|p| p.value.shape()[0])
        .ok_or_else(|| ModelError::Format(format!("{n_params} parameters is too few")))?;
    Ok(Model {
        config,
        params,
        vocab_fingerprint,
        lexicon_fingerprint,
        normalizer,
        label_order,
        feature_dim,
        trained,
        untrained_ok: false,
        summary: None,
    })
}

/// Path of the human-readable sidecar written next to a model file.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Meta<'a> {
    format_version: u32,
    config: &'a ModelConfig,
    non_canonical: Vec<&'static str>,
    trained: bool,
    vocab_fingerprint: Fingerprint,
    lexicon_fingerprint: Fingerprint,
    labels: &'a [ReactionType],
    parameters: Vec<(&'a str, &'a [usize])>,
    parameter_count: usize,
    history: Option<&'a TrainSummary>,
}

impl Model {
    /// Writes the container to `path` and the metadata sidecar to
    /// `<path>.meta.json`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, to_bytes(self)).map_err(|e| ModelError::io(path, e))?;
        let meta = Meta {
            format_version: FORMAT_VERSION,
            config: &self.config,
            non_canonical: self.config.non_canonical(),
            trained: self.trained,
            vocab_fingerprint: self.vocab_fingerprint,
            lexicon_fingerprint: self.lexicon_fingerprint,
            labels: &self.label_order,
            parameters: self.params.iter().map(|p| (p.name.as_str(), p.value.shape())).collect(),
            parameter_count: self.param_count(),
            history: self.summary.as_ref(),
        };
        let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        text.push('\n');
        let meta_file = meta_path(path);
        std::fs::write(&meta_file, text).map_err(|e| ModelError::io(&meta_file, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model, ModelError> {
        let path = path.as_ref();
        let buf = std::fs::read(path).map_err(|e| ModelError::io(path, e))?;
        from_bytes(&buf)
    }
}
