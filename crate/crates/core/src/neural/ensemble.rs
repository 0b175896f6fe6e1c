use super::tensor::log_sum_exp;
use super::NeuralScorer;
use crate::corpus::Sentence;
use crate::error::{Error, Result};

fn check(scorers: &[NeuralScorer], weights: &[f64]) -> Result<()> {
    let first = scorers
        .first()
        .ok_or_else(|| Error::EmptyInput("ensemble without scorers".into()))?;
    if weights.len() != scorers.len() {
        return Err(Error::InvalidConfig(format!(
            "{} ensemble weights for {} scorers",
            weights.len(),
            scorers.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidConfig(
            "ensemble weights must be non-negative and sum to 1".into(),
        ));
    }
    if scorers
        .iter()
        .any(|s| s.config().target_vocab() != first.config().target_vocab())
    {
        return Err(Error::VocabularyMismatch);
    }
    Ok(())
}

/// Log-likelihood under the per-step mixture `Σ_k w_k p_k(·)`, mixed in log space.
pub fn ensemble_score(
    scorers: &[NeuralScorer],
    weights: &[f64],
    source: &Sentence,
    target: &Sentence,
) -> Result<f64> {
    check(scorers, weights)?;
    if let [single] = scorers {
        return single.score(source, target);
    }
    let per_model = scorers
        .iter()
        .map(|s| s.step_log_likelihoods(source, target))
        .collect::<Result<Vec<_>>>()?;
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let steps = per_model[0].len();
    Ok((0..steps)
        .map(|t| {
            let terms: Vec<f64> = per_model
                .iter()
                .zip(&log_w)
                .map(|(lls, lw)| lw + lls[t])
                .collect();
            log_sum_exp(&terms)
        })
        .sum())
}

/// Mixture distribution over the target vocabulary at every decoding step.
pub fn ensemble_step_distributions(
    scorers: &[NeuralScorer],
    weights: &[f64],
    source: &Sentence,
    target: &Sentence,
) -> Result<Vec<Vec<f64>>> {
    check(scorers, weights)?;
    let traces = scorers
        .iter()
        .map(|s| s.trace(source, target))
        .collect::<Result<Vec<_>>>()?;
    let steps = traces[0].steps.len();
    let vocab = scorers[0].config().target_vocab().len();
    Ok((0..steps)
        .map(|t| {
            (0..vocab)
                .map(|y| {
                    traces
                        .iter()
                        .zip(weights)
                        .map(|(tr, w)| w * tr.steps[t].log_probs[y].exp())
                        .sum()
                })
                .collect()
        })
        .collect())
}
