//! Data model and file formats.
//!
//! Everything here is pre-tokenized text: tokens are split on runs of any
//! whitespace and never contain whitespace themselves.

mod annotation;
mod nbest;
mod sentence;
mod vocab;
mod weights;

use std::fs;
use std::path::Path;

pub use annotation::{
    parse_annotations, parse_judgments, read_annotations, read_judgments, render_annotations,
    render_judgments, AnnotationRecord,
    Judgment, Outcome, PairwiseJudgment, Verdict,
};
pub use nbest::{parse_nbest, read_nbest, render_nbest, Hypothesis, NBestList};
pub use sentence::{parse_corpus, read_corpus, render_corpus, Sentence};
pub use vocab::{Vocabulary, END_ID, START_ID, UNKNOWN_ID};
pub use weights::{read_weights, WeightVector};

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Splits raw file content into UTF-8 lines, numbering from 1. A trailing
/// newline does not produce an extra empty line.
pub(crate) fn utf8_lines(bytes: &[u8]) -> Result<Vec<&str>> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            std::str::from_utf8(raw).map_err(|_| Error::InvalidUtf8 { line: i + 1 })
        })
        .collect()
}
