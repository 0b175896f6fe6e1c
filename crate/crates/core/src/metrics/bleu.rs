use std::collections::HashMap;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};

use crate::corpus::Sentence;

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics for single-reference BLEU. Additive across sentences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub candidates: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    /// Flattened as `[m1, c1, m2, c2, m3, c3, m4, c4, hyp_len, ref_len]`.
    pub fn to_vector(&self) -> [f64; 2 * MAX_ORDER + 2] {
        let mut v = [0.0; 2 * MAX_ORDER + 2];
        for n in 0..MAX_ORDER {
            v[2 * n] = self.matches[n] as f64;
            v[2 * n + 1] = self.candidates[n] as f64;
        }
        v[2 * MAX_ORDER] = self.hyp_len as f64;
        v[2 * MAX_ORDER + 1] = self.ref_len as f64;
        v
    }
}

impl Add for BleuStats {
    type Output = BleuStats;

    fn add(mut self, rhs: BleuStats) -> BleuStats {
        self += rhs;
        self
    }
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.candidates[n] += rhs.candidates[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl Sub for BleuStats {
    type Output = BleuStats;

    fn sub(mut self, rhs: BleuStats) -> BleuStats {
        for n in 0..MAX_ORDER {
            self.matches[n] -= rhs.matches[n];
            self.candidates[n] -= rhs.candidates[n];
        }
        self.hyp_len -= rhs.hyp_len;
        self.ref_len -= rhs.ref_len;
        self
    }
}

impl Sum for BleuStats {
    fn sum<I: Iterator<Item = BleuStats>>(iter: I) -> BleuStats {
        iter.fold(BleuStats::default(), Add::add)
    }
}

impl<'a> Sum<&'a BleuStats> for BleuStats {
    fn sum<I: Iterator<Item = &'a BleuStats>>(iter: I) -> BleuStats {
        iter.copied().sum()
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_default() += 1;
    }
    counts
}

/// Clipped n-gram matches against a single reference.
pub fn bleu_stats(hypothesis: &Sentence, reference: &Sentence) -> BleuStats {
    let mut stats = BleuStats {
        hyp_len: hypothesis.len() as u64,
        ref_len: reference.len() as u64,
        ..Default::default()
    };
    for n in 1..=MAX_ORDER {
        let hyp = ngram_counts(hypothesis, n);
        let reference = ngram_counts(reference, n);
        stats.candidates[n - 1] = hypothesis.len().saturating_sub(n - 1) as u64;
        stats.matches[n - 1] = hyp
            .iter()
            .map(|(gram, &c)| c.min(reference.get(gram).copied().unwrap_or(0)))
            .sum();
    }
    stats
}

fn brevity_penalty(hyp_len: f64, ref_len: f64) -> f64 {
    (1.0 - ref_len / hyp_len).min(0.0).exp()
}

/// Corpus BLEU in `[0, 1]` from summed statistics.
pub fn corpus_bleu(stats: &BleuStats) -> f64 {
    if stats.hyp_len == 0 || stats.matches.contains(&0) {
        return 0.0;
    }
    let log_precision: f64 = (0..MAX_ORDER)
        .map(|n| (stats.matches[n] as f64 / stats.candidates[n] as f64).ln())
        .sum::<f64>()
        / MAX_ORDER as f64;
    log_precision.exp() * brevity_penalty(stats.hyp_len as f64, stats.ref_len as f64)
}

pub fn corpus_bleu_of(hypotheses: &[Sentence], references: &[Sentence]) -> f64 {
    corpus_bleu(
        &hypotheses
            .iter()
            .zip(references)
            .map(|(h, r)| bleu_stats(h, r))
            .sum(),
    )
}

/// Sentence-level BLEU with add-one smoothing on orders 2 and above.
pub fn sentence_bleu_plus1(hypothesis: &Sentence, reference: &Sentence) -> f64 {
    let stats = bleu_stats(hypothesis, reference);
    if stats.hyp_len == 0 || stats.matches[0] == 0 {
        return 0.0;
    }
    let log_precision: f64 = (0..MAX_ORDER)
        .map(|n| {
            let (m, c) = (stats.matches[n] as f64, stats.candidates[n] as f64);
            if n == 0 {
                (m / c).ln()
            } else {
                ((m + 1.0) / (c + 1.0)).ln()
            }
        })
        .sum::<f64>()
        / MAX_ORDER as f64;
    log_precision.exp() * brevity_penalty(stats.hyp_len as f64, stats.ref_len as f64)
}
