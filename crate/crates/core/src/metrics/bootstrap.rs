use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bleu::{bleu_stats, corpus_bleu, BleuStats, MAX_ORDER};
use super::ribes::ribes;
use super::SIGNIFICANCE_LEVEL;
use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// A corpus metric expressible through additive per-sentence statistics.
pub trait CorpusMetric: Sync {
    fn name(&self) -> &str;

    fn sentence_stats(&self, hypothesis: &Sentence, reference: &Sentence) -> Vec<f64>;

    /// Corpus value from the componentwise sum of sentence statistics.
    fn score(&self, summed: &[f64]) -> f64;

    fn corpus_score(&self, hypotheses: &[Sentence], references: &[Sentence]) -> f64 {
        let mut total: Vec<f64> = Vec::new();
        for (h, r) in hypotheses.iter().zip(references) {
            accumulate(&mut total, &self.sentence_stats(h, r));
        }
        self.score(&total)
    }
}

fn accumulate(total: &mut Vec<f64>, stats: &[f64]) {
    if total.is_empty() {
        total.resize(stats.len(), 0.0);
    }
    for (t, s) in total.iter_mut().zip(stats) {
        *t += s;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Bleu,
    Ribes { alpha: f64, beta: f64 },
}

impl CorpusMetric for Metric {
    fn name(&self) -> &str {
        match self {
            Metric::Bleu => "bleu",
            Metric::Ribes { .. } => "ribes",
        }
    }

    fn sentence_stats(&self, hypothesis: &Sentence, reference: &Sentence) -> Vec<f64> {
        match *self {
            Metric::Bleu => bleu_stats(hypothesis, reference).to_vector().to_vec(),
            Metric::Ribes { alpha, beta } => vec![ribes(hypothesis, reference, alpha, beta), 1.0],
        }
    }

    fn score(&self, summed: &[f64]) -> f64 {
        match self {
            Metric::Bleu => {
                if summed.is_empty() {
                    return 0.0;
                }
                let mut stats = BleuStats::default();
                for n in 0..MAX_ORDER {
                    stats.matches[n] = summed[2 * n] as u64;
                    stats.candidates[n] = summed[2 * n + 1] as u64;
                }
                stats.hyp_len = summed[2 * MAX_ORDER] as u64;
                stats.ref_len = summed[2 * MAX_ORDER + 1] as u64;
                corpus_bleu(&stats)
            }
            Metric::Ribes { .. } => match summed {
                [total, count] if *count > 0.0 => total / count,
                _ => 0.0,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapOutcome {
    pub p_value: f64,
    pub significant: bool,
}

/// Sentence indices of resample `k`, drawn with replacement. Each resample has
/// its own stream so resamples can be drawn in any order.
pub fn resample_indices(n: usize, seed: u64, k: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Paired bootstrap resampling. The p-value is the fraction of resamples on
/// which system A fails to beat system B (ties count against A).
pub fn bootstrap_test(
    hyp_a: &[Sentence],
    hyp_b: &[Sentence],
    references: &[Sentence],
    metric: &dyn CorpusMetric,
    samples: usize,
    seed: u64,
) -> Result<BootstrapOutcome> {
    if hyp_a.len() != references.len() || hyp_b.len() != references.len() {
        return Err(Error::Misaligned(format!(
            "{} / {} hypotheses for {} references",
            hyp_a.len(),
            hyp_b.len(),
            references.len()
        )));
    }
    if references.len() < 2 {
        return Err(Error::EmptyInput(
            "bootstrap resampling needs at least 2 sentences".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("bootstrap samples must be positive".into()));
    }
    let stats = |hyps: &[Sentence]| -> Vec<Vec<f64>> {
        hyps.par_iter()
            .zip(references)
            .map(|(h, r)| metric.sentence_stats(h, r))
            .collect()
    };
    let (stats_a, stats_b) = (stats(hyp_a), stats(hyp_b));
    let n = references.len();
    let failures = (0..samples)
        .into_par_iter()
        .map(|k| {
            let (mut total_a, mut total_b) = (Vec::new(), Vec::new());
            for i in resample_indices(n, seed, k) {
                accumulate(&mut total_a, &stats_a[i]);
                accumulate(&mut total_b, &stats_b[i]);
            }
            metric.score(&total_a) <= metric.score(&total_b)
        })
        .filter(|&fails| fails)
        .count();
    let p_value = failures as f64 / samples as f64;
    Ok(BootstrapOutcome {
        p_value,
        significant: p_value < SIGNIFICANCE_LEVEL,
    })
}
