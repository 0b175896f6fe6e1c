//! Model file layout:
//!
//! ```text
//! MAGIC (8 bytes) | version: u32 LE | header length: u64 LE | header JSON | tensors
//! ```
//!
//! The header holds the dimensions, seed, both vocabularies and the name and
//! shape of every tensor. Tensor values follow in header order as
//! little-endian `f64`, so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{Param, Params};
use super::tensor::Tensor;
use super::{NeuralScorer, ScorerConfig};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"NMTRSCOR";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    embedding_dim: usize,
    hidden_dim: usize,
    attention_hidden_dim: usize,
    seed: u64,
    source_vocab: Vocabulary,
    target_vocab: Vocabulary,
    tensors: Vec<(String, usize, usize)>,
}

impl NeuralScorer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let c = &self.config;
        let header = Header {
            embedding_dim: c.embedding_dim,
            hidden_dim: c.hidden_dim,
            attention_hidden_dim: c.attention_hidden_dim,
            seed: c.seed,
            source_vocab: c.source_vocab.clone(),
            target_vocab: c.target_vocab.clone(),
            tensors: self
                .params
                .iter()
                .map(|(p, t)| (p.name().to_owned(), t.rows(), t.cols()))
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(20 + json.len() + 8 * self.params.num_values());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in self.params.iter() {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::ModelFormat(m.to_owned());
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(bad("missing magic string"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format version {version}"
            )));
        }
        let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let body = &bytes[20..];
        if body.len() < header_len {
            return Err(bad("truncated header"));
        }
        let header: Header = serde_json::from_slice(&body[..header_len])
            .map_err(|e| Error::ModelFormat(format!("header: {e}")))?;
        let config = ScorerConfig::new(
            header.embedding_dim,
            header.hidden_dim,
            header.attention_hidden_dim,
            header.source_vocab,
            header.target_vocab,
            header.seed,
        )?;
        if header.tensors.len() != Param::ALL.len() {
            return Err(bad("wrong number of tensors"));
        }
        let mut values = body[header_len..].chunks_exact(8);
        if !values.remainder().is_empty() {
            return Err(bad("trailing bytes"));
        }
        let mut tensors = Vec::with_capacity(Param::ALL.len());
        for (p, (name, rows, cols)) in Param::ALL.iter().zip(header.tensors) {
            if name != p.name() || (rows, cols) != p.shape(&config) {
                return Err(Error::ModelFormat(format!(
                    "tensor {name} ({rows}x{cols}) does not match {}",
                    p.name()
                )));
            }
            let data: Vec<f64> = values
                .by_ref()
                .take(rows * cols)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            if data.len() != rows * cols {
                return Err(bad("truncated tensor data"));
            }
            tensors.push(Tensor::from_vec(rows, cols, data));
        }
        if values.next().is_some() {
            return Err(bad("trailing bytes"));
        }
        NeuralScorer::from_params(config, Params::from_tensors(tensors))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
