//! Log-linear reranking of n-best lists.

mod mert;
mod sweep;

use std::ops::Deref;

use rayon::prelude::*;

pub use mert::{mert, render_mert_log, upper_envelope, MertConfig, MertLogRow, MertResult, Tunable};
pub use sweep::{doubling_sizes, render_sweep, sweep, SweepPoint};

use crate::corpus::{Hypothesis, NBestList, Sentence, WeightVector};
use crate::error::{Error, Result};
use crate::metrics::{bleu_stats, corpus_bleu, BleuStats};
use crate::neural::{ensemble_score, NeuralScorer};

/// Name of the neural log-likelihood feature.
pub const NMT_FEATURE: &str = "nmt_loglik";

/// An n-best list in which every hypothesis carries a finite, non-positive
/// [`NMT_FEATURE`].
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedNBest(NBestList);

impl AugmentedNBest {
    /// Wraps a list that already carries the neural feature.
    pub fn from_list(list: NBestList) -> Result<Self> {
        for h in list.hypotheses() {
            match h.features.get(NMT_FEATURE) {
                Some(v) if v.is_finite() && *v <= 0.0 => {}
                Some(v) => {
                    return Err(Error::InvalidConfig(format!(
                        "{NMT_FEATURE} = {v} in sentence {} is not a log-likelihood",
                        list.sentence_id()
                    )))
                }
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "sentence {} lacks {NMT_FEATURE}",
                        list.sentence_id()
                    )))
                }
            }
        }
        Ok(AugmentedNBest(list))
    }

    pub fn into_inner(self) -> NBestList {
        self.0
    }
}

impl Deref for AugmentedNBest {
    type Target = NBestList;

    fn deref(&self) -> &NBestList {
        &self.0
    }
}

impl AsRef<NBestList> for AugmentedNBest {
    fn as_ref(&self) -> &NBestList {
        &self.0
    }
}

/// Ids must run 0, 1, 2, ... in order; otherwise reports the missing ones.
pub fn check_ids<L: AsRef<NBestList>>(lists: &[L], expected: usize) -> Result<()> {
    let present: std::collections::BTreeSet<usize> =
        lists.iter().map(|l| l.as_ref().sentence_id()).collect();
    let missing: Vec<String> = (0..expected)
        .filter(|id| !present.contains(id))
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Misaligned(format!(
            "n-best lists missing for sentence ids {}",
            missing.join(", ")
        )));
    }
    if lists.len() != expected {
        return Err(Error::Misaligned(format!(
            "{} n-best lists for {expected} sentences",
            lists.len()
        )));
    }
    Ok(())
}

/// Adds [`NMT_FEATURE`] (the ensemble log-likelihood of each hypothesis given
/// its source) to every hypothesis.
pub fn augment(
    lists: &[NBestList],
    scorers: &[NeuralScorer],
    ensemble_weights: &[f64],
    sources: &[Sentence],
) -> Result<Vec<AugmentedNBest>> {
    check_ids(lists, sources.len())?;
    if let Some(l) = lists
        .iter()
        .find(|l| l.hypotheses().iter().any(|h| h.features.contains_key(NMT_FEATURE)))
    {
        return Err(Error::FeatureAlreadyPresent(format!(
            "{NMT_FEATURE} in sentence {}",
            l.sentence_id()
        )));
    }
    lists
        .par_iter()
        .zip(sources)
        .map(|(list, source)| {
            let mut list = list.clone();
            for h in list.hypotheses_mut() {
                let ll = ensemble_score(scorers, ensemble_weights, source, &h.tokens)?;
                h.features.insert(NMT_FEATURE.to_owned(), ll);
            }
            AugmentedNBest::from_list(list)
        })
        .collect()
}

/// Log-linear score; absent features contribute 0.
pub fn model_score(hypothesis: &Hypothesis, weights: &WeightVector) -> f64 {
    weights.dot(&hypothesis.features)
}

/// Rank of the best hypothesis among the first `n` (at least one); ties go to
/// the smaller rank.
pub fn select_index(list: &NBestList, weights: &WeightVector, n: usize) -> usize {
    let limit = n.clamp(1, list.len());
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (k, h) in list.hypotheses()[..limit].iter().enumerate() {
        let s = model_score(h, weights);
        if s > best_score || k == 0 {
            best = k;
            best_score = s;
        }
    }
    best
}

pub fn select<'a>(list: &'a NBestList, weights: &WeightVector, n: usize) -> &'a Hypothesis {
    &list.hypotheses()[select_index(list, weights, n)]
}

/// Selected hypothesis for every list.
pub fn rerank<L: AsRef<NBestList> + Sync>(lists: &[L], weights: &WeightVector, n: usize) -> Vec<Sentence> {
    lists
        .par_iter()
        .map(|l| select(l.as_ref(), weights, n).tokens.clone())
        .collect()
}

/// Corpus BLEU of the selections under `weights` over full lists.
pub fn reranked_bleu<L: AsRef<NBestList> + Sync>(
    lists: &[L],
    references: &[Sentence],
    weights: &WeightVector,
) -> f64 {
    let stats: BleuStats = rerank(lists, weights, usize::MAX)
        .iter()
        .zip(references)
        .map(|(h, r)| bleu_stats(h, r))
        .sum();
    corpus_bleu(&stats)
}
