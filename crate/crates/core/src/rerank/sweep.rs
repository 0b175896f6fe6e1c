use rayon::prelude::*;

use super::model_score;
use crate::corpus::{NBestList, Sentence, WeightVector};
use crate::error::{Error, Result};
use crate::fmt::real;
use crate::metrics::{bleu_stats, corpus_bleu, BleuStats};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    /// Mean model score of the selected hypotheses.
    pub model_score: f64,
    pub bleu: f64,
}

/// `1, 2, 4, ...` up to and including `max_n`'s largest power of two.
pub fn doubling_sizes(max_n: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= max_n)
        .collect()
}

/// Reranks with the first `n` hypotheses of every list for each `n` in `sizes`.
pub fn sweep<L: AsRef<NBestList> + Sync>(
    lists: &[L],
    references: &[Sentence],
    weights: &WeightVector,
    sizes: &[usize],
) -> Result<Vec<SweepPoint>> {
    if lists.len() != references.len() {
        return Err(Error::Misaligned(format!(
            "{} n-best lists for {} references",
            lists.len(),
            references.len()
        )));
    }
    if lists.is_empty() {
        return Err(Error::EmptyInput("no n-best lists".into()));
    }
    if sizes.contains(&0) || sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(
            "sweep sizes must be positive and ascending".into(),
        ));
    }
    // per sentence: (score, bleu stats) of the best hypothesis within each prefix
    let prefix_best: Vec<Vec<(f64, BleuStats)>> = lists
        .par_iter()
        .zip(references)
        .map(|(l, r)| {
            let mut best: Option<(f64, BleuStats)> = None;
            l.as_ref()
                .hypotheses()
                .iter()
                .map(|h| {
                    let s = model_score(h, weights);
                    if best.is_none_or(|(b, _)| s > b) {
                        best = Some((s, bleu_stats(&h.tokens, r)));
                    }
                    best.unwrap()
                })
                .collect()
        })
        .collect();
    Ok(sizes
        .iter()
        .map(|&n| {
            let picks = prefix_best.iter().map(|p| p[n.min(p.len()) - 1]);
            let (total, stats) = picks.fold((0.0, BleuStats::default()), |(t, st), (s, b)| (t + s, st + b));
            SweepPoint {
                n,
                model_score: total / lists.len() as f64,
                bleu: corpus_bleu(&stats),
            }
        })
        .collect())
}

/// TSV with header `n, model_score, bleu`.
pub fn render_sweep(points: &[SweepPoint]) -> String {
    let mut out = String::from("n\tmodel_score\tbleu\n");
    for p in points {
        out.push_str(&format!("{}\t{}\t{}\n", p.n, real(p.model_score), real(p.bleu)));
    }
    out
}
