use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::params::Params;
use super::NeuralScorer;
use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::fmt::real;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub initial_learning_rate: f64,
    pub max_epochs: usize,
    /// Seeds the per-epoch shuffle of the training pairs.
    pub seed: u64,
    /// Per-sentence gradients with a larger L2 norm are rescaled to this
    /// norm; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

/// Default gradient-norm threshold, the usual one for SGD on LSTMs.
pub const DEFAULT_CLIP_NORM: f64 = 5.0;

impl TrainConfig {
    pub fn new(initial_learning_rate: f64, max_epochs: usize, seed: u64) -> Result<Self> {
        if !(initial_learning_rate > 0.0 && initial_learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be at least 1".into()));
        }
        Ok(TrainConfig {
            initial_learning_rate,
            max_epochs,
            seed,
            clip_norm: Some(DEFAULT_CLIP_NORM),
        })
    }

    pub fn with_clip_norm(mut self, clip_norm: Option<f64>) -> Result<Self> {
        if clip_norm.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidConfig("clip norm must be positive".into()));
        }
        self.clip_norm = clip_norm;
        Ok(self)
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            initial_learning_rate: 0.1,
            max_epochs: 10,
            seed: 42,
            clip_norm: Some(DEFAULT_CLIP_NORM),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-sentence log-likelihood over the epoch's updates, each taken
    /// just before its update.
    pub train_ll: f64,
    /// Mean per-sentence dev log-likelihood after the epoch.
    pub dev_ll: f64,
    /// Total dev log-likelihood over total predicted words (end-of-sentence included).
    pub dev_ll_per_token: f64,
    /// Learning rate used during the epoch.
    pub learning_rate: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best dev likelihood.
    pub scorer: NeuralScorer,
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
}

/// Learning rate in effect after each dev evaluation: halved whenever the dev
/// likelihood dropped below the previous epoch's.
pub fn halving_schedule(initial: f64, dev_lls: &[f64]) -> Vec<f64> {
    let mut lr = initial;
    let mut prev: Option<f64> = None;
    dev_lls
        .iter()
        .map(|&ll| {
            if prev.is_some_and(|p| ll < p) {
                lr /= 2.0;
            }
            prev = Some(ll);
            lr
        })
        .collect()
}

fn dev_likelihood(scorer: &NeuralScorer, pairs: &[(Sentence, Sentence)]) -> Result<(f64, f64)> {
    let lls = pairs
        .par_iter()
        .map(|(s, t)| scorer.score(s, t))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = lls.iter().sum();
    let tokens: usize = pairs.iter().map(|(_, t)| t.len() + 1).sum();
    Ok((total / pairs.len() as f64, total / tokens as f64))
}

/// Per-sentence SGD with learning-rate halving on dev likelihood drops.
pub fn train(
    scorer: NeuralScorer,
    train_pairs: &[(Sentence, Sentence)],
    dev_pairs: &[(Sentence, Sentence)],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with_progress(scorer, train_pairs, dev_pairs, config, |_| {})
}

/// [`train`], calling `on_epoch` after each epoch's dev evaluation.
pub fn train_with_progress(
    mut scorer: NeuralScorer,
    train_pairs: &[(Sentence, Sentence)],
    dev_pairs: &[(Sentence, Sentence)],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    if train_pairs.is_empty() || dev_pairs.is_empty() {
        return Err(Error::EmptyInput("training and dev sets must be non-empty".into()));
    }
    if let Some(i) = train_pairs.iter().position(|(s, _)| s.is_empty()) {
        return Err(Error::Misaligned(format!("training pair {i} has an empty source")));
    }
    if let Some(i) = dev_pairs.iter().position(|(s, _)| s.is_empty()) {
        return Err(Error::Misaligned(format!("dev pair {i} has an empty source")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    let mut lr = config.initial_learning_rate;
    let mut log = Vec::with_capacity(config.max_epochs);
    let mut best: Option<(f64, usize, Params)> = None;
    let mut prev_dev: Option<f64> = None;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut train_total = 0.0;
        for &i in &order {
            let (src, trg) = &train_pairs[i];
            let mut grad = Params::zeros(scorer.config());
            let ll = scorer.accumulate_gradient(src, trg, &mut grad)?;
            if !ll.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, index: i });
            }
            train_total += ll;
            let mut step = lr;
            if let Some(clip) = config.clip_norm {
                let norm = grad.norm();
                if norm > clip {
                    step *= clip / norm;
                }
            }
            scorer.params_mut().axpy(-step, &grad);
        }
        if !scorer.params().all_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                index: *order.last().unwrap(),
            });
        }
        let (dev_ll, dev_ll_per_token) = dev_likelihood(&scorer, dev_pairs)?;
        if !dev_ll.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, index: 0 });
        }
        let entry = EpochLog {
            epoch,
            train_ll: train_total / train_pairs.len() as f64,
            dev_ll,
            dev_ll_per_token,
            learning_rate: lr,
        };
        on_epoch(&entry);
        log.push(entry);
        if best.as_ref().is_none_or(|(b, _, _)| dev_ll > *b) {
            best = Some((dev_ll, epoch, scorer.params().clone()));
        }
        if prev_dev.is_some_and(|p| dev_ll < p) {
            lr /= 2.0;
        }
        prev_dev = Some(dev_ll);
    }

    let (_, best_epoch, params) = best.expect("at least one epoch");
    *scorer.params_mut() = params;
    Ok(TrainOutcome {
        scorer,
        best_epoch,
        log,
    })
}

/// TSV with header `epoch, train_ll, dev_ll, lr`.
pub fn render_epoch_log(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch\ttrain_ll\tdev_ll\tlr\n");
    for e in log {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            e.epoch,
            real(e.train_ll),
            real(e.dev_ll),
            real(e.learning_rate)
        ));
    }
    out
}
