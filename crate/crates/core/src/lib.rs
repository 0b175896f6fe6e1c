//! Reranking of machine-translation n-best lists.
//!
//! The crate is split along the pipeline:
//!
//! - [`corpus`]: sentences, vocabularies, n-best lists, weights and annotation files.
//! - [`neural`]: a bidirectional-LSTM encoder with an attentional LSTM decoder that
//!   scores a target sentence given a source sentence, plus SGD training and
//!   linear-interpolation ensembles.
//! - [`rerank`]: feature augmentation, log-linear selection, MERT and n-best size sweeps.
//! - [`metrics`]: BLEU, BLEU+1, RIBES, paired bootstrap resampling, pairwise human
//!   scores and error-category tallies.
//! - [`synthetic`]: deterministic toy tasks used by the test suites and examples.

pub mod corpus;
pub mod error;
pub mod metrics;
pub mod neural;
pub mod rerank;
pub mod synthetic;

mod fmt;

pub use error::{Error, Result};
