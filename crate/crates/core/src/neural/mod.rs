//! Attentional encoder-decoder scorer.
//!
//! A bidirectional LSTM encodes the source into one vector per word (forward
//! and backward states concatenated). An LSTM decoder, initialized from the
//! backward encoder's final state, predicts the target one word at a time. At
//! each step a one-hidden-layer perceptron over `[decoder state; h_j]` scores
//! every source position, the softmax of those scores gives the alignment
//! weights, and their weighted sum of encodings is the context vector fed to
//! the decoder together with the previous word's embedding.

mod ensemble;
mod io;
mod model;
mod params;
mod tensor;
mod train;

pub use ensemble::{ensemble_score, ensemble_step_distributions};
pub use io::{MAGIC, FORMAT_VERSION};
pub use model::{weighted_context, Attention, ScoreTrace, StepTrace};
pub use params::{Param, Params};
pub use tensor::{log_softmax, log_sum_exp, softmax, Tensor};
pub use train::{
    halving_schedule, render_epoch_log, train, train_with_progress, EpochLog, TrainConfig, TrainOutcome,
    DEFAULT_CLIP_NORM,
};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Model dimensions, vocabularies and initialization seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorerConfig {
    embedding_dim: usize,
    hidden_dim: usize,
    attention_hidden_dim: usize,
    source_vocab: Vocabulary,
    target_vocab: Vocabulary,
    seed: u64,
}

impl ScorerConfig {
    pub fn new(
        embedding_dim: usize,
        hidden_dim: usize,
        attention_hidden_dim: usize,
        source_vocab: Vocabulary,
        target_vocab: Vocabulary,
        seed: u64,
    ) -> Result<Self> {
        for (name, v) in [
            ("embedding_dim", embedding_dim),
            ("hidden_dim", hidden_dim),
            ("attention_hidden_dim", attention_hidden_dim),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(ScorerConfig {
            embedding_dim,
            hidden_dim,
            attention_hidden_dim,
            source_vocab,
            target_vocab,
            seed,
        })
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// Hidden size of each encoder direction and of the decoder.
    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn attention_hidden_dim(&self) -> usize {
        self.attention_hidden_dim
    }

    pub fn source_vocab(&self) -> &Vocabulary {
        &self.source_vocab
    }

    pub fn target_vocab(&self) -> &Vocabulary {
        &self.target_vocab
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeuralScorer {
    config: ScorerConfig,
    params: Params,
}

impl NeuralScorer {
    /// Fresh scorer with parameters uniform in `[-0.1, 0.1]` drawn from the config seed.
    pub fn init(config: ScorerConfig) -> Self {
        let params = Params::uniform(&config);
        NeuralScorer { config, params }
    }

    /// Fails if any tensor has the wrong shape or a non-finite value.
    pub fn from_params(config: ScorerConfig, params: Params) -> Result<Self> {
        for (p, t) in params.iter() {
            if t.shape() != p.shape(&config) {
                return Err(Error::DimensionMismatch(format!(
                    "{} has shape {:?}, expected {:?}",
                    p.name(),
                    t.shape(),
                    p.shape(&config)
                )));
            }
        }
        if !params.all_finite() {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(NeuralScorer { config, params })
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_tokens(tokens.iter().copied()).unwrap()
    }

    #[test]
    fn zero_dims_rejected() {
        let v = vocab(&["a"]);
        assert!(ScorerConfig::new(0, 4, 4, v.clone(), v.clone(), 1).is_err());
        assert!(ScorerConfig::new(4, 0, 4, v.clone(), v.clone(), 1).is_err());
        assert!(ScorerConfig::new(4, 4, 0, v.clone(), v, 1).is_err());
    }

    #[test]
    fn init_is_seeded() {
        let v = vocab(&["a", "b"]);
        let cfg = |seed| ScorerConfig::new(3, 4, 5, v.clone(), v.clone(), seed).unwrap();
        let a = NeuralScorer::init(cfg(7));
        let b = NeuralScorer::init(cfg(7));
        let c = NeuralScorer::init(cfg(8));
        assert_eq!(a, b);
        assert_ne!(a.params(), c.params());
        assert!(a
            .params()
            .iter()
            .all(|(_, t)| t.data().iter().all(|v| (-0.1..=0.1).contains(v))));
    }

    #[test]
    fn from_params_checks_shapes() {
        let v = vocab(&["a"]);
        let cfg = ScorerConfig::new(2, 2, 2, v.clone(), v, 0).unwrap();
        let mut params = Params::zeros(&cfg);
        params[Param::AttV] = Tensor::zeros(2, 2);
        assert!(NeuralScorer::from_params(cfg, params).is_err());
    }
}
