//! Portable scorer checkpoints.
//!
//! Layout: one line of UTF-8 JSON metadata terminated by `\n`, followed by
//! every tensor as raw little-endian f32 in the order listed under
//! `tensors` (each entry gives name, shape and byte offset into the blob).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::SourceTag;
use crate::error::{Error, Result};
use crate::model::{zero_params, ModelConfig, ScorerParams};
use crate::tensor::Tensors;

pub const FORMAT: &str = "mcsf-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub model: ModelConfig,
    pub dims: BTreeMap<SourceTag, usize>,
    pub fused_dim: Option<usize>,
    /// Fixed segment count used in training, `None` for per-video default.
    pub segments: Option<usize>,
    pub seed: u64,
    pub tensors: Vec<TensorEntry>,
}

pub fn encode(params: &ScorerParams, segments: Option<usize>) -> Vec<u8> {
    let mut tensors = Vec::new();
    let mut blob = Vec::new();
    for t in params.tensors() {
        tensors.push(TensorEntry {
            name: t.name.clone(),
            shape: t.shape.clone(),
            offset: blob.len(),
        });
        blob.extend(t.data.iter().flat_map(|&v| (v as f32).to_le_bytes()));
    }
    let mut model = params.config.clone();
    model.fused_dim = params.fused_dim();
    let header = CheckpointHeader {
        format: FORMAT.into(),
        version: VERSION,
        model,
        dims: params.dims.clone(),
        fused_dim: params.fused_dim(),
        segments,
        seed: params.seed,
        tensors,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.extend(blob);
    out
}

pub fn decode(bytes: &[u8]) -> Result<(ScorerParams, CheckpointHeader)> {
    let bad = |msg: String| Error::Invalid(vec![format!("checkpoint: {msg}")]);
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header: CheckpointHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(bad(format!("unsupported format {} v{}", header.format, header.version)));
    }
    let blob = &bytes[nl + 1..];
    let mut params = zero_params(&header.model, &header.dims)?;
    params.seed = header.seed;

    let mut expected_len = 0;
    for (t, entry) in params.tensors_mut().into_iter().zip(&header.tensors) {
        if t.name != entry.name || t.shape != entry.shape || entry.offset != expected_len {
            return Err(bad(format!("tensor `{}` {:?} does not match `{}` {:?}", entry.name, entry.shape, t.name, t.shape)));
        }
        let n = t.data.len();
        let raw = blob
            .get(entry.offset..entry.offset + 4 * n)
            .ok_or_else(|| bad(format!("tensor `{}` truncated", entry.name)))?;
        for (v, c) in t.data.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
        }
        expected_len += 4 * n;
    }
    if header.tensors.len() != params.tensors().len() || blob.len() != expected_len {
        return Err(bad(format!("{} bytes of tensor data, expected {expected_len}", blob.len())));
    }
    Ok((params, header))
}

pub fn save(path: impl AsRef<Path>, params: &ScorerParams, segments: Option<usize>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(params, segments)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<(ScorerParams, CheckpointHeader)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
