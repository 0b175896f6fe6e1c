//! Minimum error rate training with exact line search.
//!
//! Along a direction `d` from weights `w`, each hypothesis scores
//! `w·f + γ (d·f)`, a line in `γ`. The upper envelope of a sentence's lines
//! splits the real line into intervals with a constant argmax, so corpus BLEU
//! along `d` is a step function whose value on every interval follows from
//! summed sufficient statistics.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::reranked_bleu;
use crate::corpus::{NBestList, Sentence, WeightVector};
use crate::error::{Error, Result};
use crate::fmt::real;
use crate::metrics::{bleu_stats, corpus_bleu, BleuStats};

/// Minimum tuning-BLEU gain per iteration to keep iterating.
const CONVERGENCE: f64 = 1e-4;

/// Candidate steps re-scored per direction before giving up on it.
const MAX_TRIALS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Tunable {
    /// Every feature seen in the lists or the initial weights.
    All,
    /// Only the named features; the rest stay fixed.
    Only(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MertConfig {
    /// Random unit directions per iteration, on top of the coordinate axes.
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub tunable: Tunable,
}

impl Default for MertConfig {
    fn default() -> Self {
        MertConfig {
            restarts: 8,
            iterations: 30,
            seed: 42,
            tunable: Tunable::All,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MertLogRow {
    pub iteration: usize,
    /// Coordinate axes first (tunable names in sorted order), then random directions.
    pub direction: usize,
    /// Accepted step, 0 when the direction gave no improvement.
    pub gamma: f64,
    pub bleu: f64,
}

#[derive(Clone, Debug)]
pub struct MertResult {
    pub weights: WeightVector,
    pub bleu: f64,
    pub initial_bleu: f64,
    pub log: Vec<MertLogRow>,
}

/// Upper envelope of lines `(slope, intercept)` as `(start of interval, line
/// index)` pairs in increasing order; the first interval starts at `-inf`.
/// Identical lines resolve to the smaller index.
pub fn upper_envelope(lines: &[(f64, f64)]) -> Vec<(f64, usize)> {
    let mut order: Vec<usize> = (0..lines.len()).collect();
    order.sort_by(|&a, &b| {
        lines[a]
            .0
            .total_cmp(&lines[b].0)
            .then(lines[b].1.total_cmp(&lines[a].1))
            .then(a.cmp(&b))
    });
    order.dedup_by(|b, a| lines[*a].0 == lines[*b].0);

    let mut env: Vec<(f64, usize)> = Vec::with_capacity(order.len());
    for k in order {
        let (m, b) = lines[k];
        loop {
            match env.last() {
                None => {
                    env.push((f64::NEG_INFINITY, k));
                    break;
                }
                Some(&(start, last)) => {
                    let (lm, lb) = lines[last];
                    let x = (lb - b) / (m - lm);
                    if x <= start {
                        env.pop();
                    } else {
                        env.push((x, k));
                        break;
                    }
                }
            }
        }
    }
    env
}

struct Problem {
    names: Vec<String>,
    /// Per sentence, per hypothesis, dense feature values in `names` order.
    features: Vec<Vec<Vec<f64>>>,
    stats: Vec<Vec<BleuStats>>,
}

impl Problem {
    fn argmax(&self, s: usize, w: &[f64]) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (k, f) in self.features[s].iter().enumerate() {
            let score: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
            if score > best_score || k == 0 {
                best = k;
                best_score = score;
            }
        }
        best
    }

    /// Candidate `(γ, bleu)` steps along `d` from `w`, best predicted first.
    /// Empty when the direction has no breakpoints.
    fn line_search(&self, w: &[f64], d: &[f64]) -> Vec<(f64, f64)> {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let envelopes: Vec<Vec<(f64, usize)>> = self
            .features
            .par_iter()
            .map(|hyps| {
                let lines: Vec<(f64, f64)> = hyps.iter().map(|f| (dot(d, f), dot(w, f))).collect();
                upper_envelope(&lines)
            })
            .collect();

        let mut current: Vec<usize> = envelopes.iter().map(|e| e[0].1).collect();
        let mut stats: BleuStats = current
            .iter()
            .enumerate()
            .map(|(s, &k)| self.stats[s][k])
            .sum();
        let mut events: Vec<(f64, usize, usize)> = envelopes
            .iter()
            .enumerate()
            .flat_map(|(s, env)| env[1..].iter().map(move |&(x, k)| (x, s, k)))
            .collect();
        if events.is_empty() {
            return Vec::new();
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut candidates: Vec<(f64, f64)> = Vec::new();
        let mut prev: Option<f64> = None;
        let mut i = 0;
        while i < events.len() {
            // crossings a few ulps apart are one breakpoint computed twice
            let x = events[i].0;
            let tol = 1e-9 * x.abs().max(1.0);
            let j = i + events[i..].iter().take_while(|e| e.0 - x <= tol).count();
            let probe = match prev {
                None => x - 1.0,
                Some(p) => 0.5 * (p + x),
            };
            candidates.push((probe, corpus_bleu(&stats)));

            // at the breakpoint itself ties resolve to the smaller rank
            let at: Vec<f64> = w.iter().zip(d).map(|(a, b)| a + x * b).collect();
            let mut tied = stats;
            let mut touched: Vec<usize> = events[i..j].iter().map(|e| e.1).collect();
            touched.sort_unstable();
            touched.dedup();
            for s in touched {
                tied = tied - self.stats[s][current[s]] + self.stats[s][self.argmax(s, &at)];
            }
            candidates.push((x, corpus_bleu(&tied)));

            for &(_, s, k) in &events[i..j] {
                stats = stats - self.stats[s][current[s]] + self.stats[s][k];
                current[s] = k;
            }
            prev = Some(x);
            i = j;
        }
        candidates.push((prev.unwrap() + 1.0, corpus_bleu(&stats)));

        candidates.retain(|(g, _)| g.is_finite());
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.abs().total_cmp(&b.0.abs())));
        candidates
    }
}

fn to_weights(names: &[String], dense: &[f64], keep: &BTreeSet<&str>) -> WeightVector {
    names
        .iter()
        .zip(dense)
        .filter(|(n, _)| keep.contains(n.as_str()))
        .map(|(n, &v)| (n.clone(), v))
        .collect()
}

/// Coordinate and random-direction line search maximizing corpus BLEU of the
/// selected hypotheses. Never returns weights scoring below `init`.
pub fn mert<L: AsRef<NBestList> + Sync>(
    lists: &[L],
    references: &[Sentence],
    init: &WeightVector,
    config: &MertConfig,
) -> Result<MertResult> {
    if lists.is_empty() {
        return Err(Error::EmptyInput("no n-best lists to tune on".into()));
    }
    if lists.len() != references.len() {
        return Err(Error::Misaligned(format!(
            "{} n-best lists for {} references",
            lists.len(),
            references.len()
        )));
    }
    let mut names: BTreeSet<String> = init.names().map(str::to_owned).collect();
    for l in lists {
        for h in l.as_ref().hypotheses() {
            names.extend(h.features.keys().cloned());
        }
    }
    let tunable: BTreeSet<String> = match &config.tunable {
        Tunable::All => names.clone(),
        Tunable::Only(only) if only.is_empty() => {
            return Err(Error::InvalidConfig("no tunable features".into()))
        }
        Tunable::Only(only) => only.iter().cloned().collect(),
    };
    names.extend(tunable.iter().cloned());
    let names: Vec<String> = names.into_iter().collect();
    let keep: BTreeSet<&str> = init
        .names()
        .chain(tunable.iter().map(String::as_str))
        .collect();

    let problem = Problem {
        features: lists
            .par_iter()
            .map(|l| {
                l.as_ref()
                    .hypotheses()
                    .iter()
                    .map(|h| names.iter().map(|n| h.feature(n)).collect())
                    .collect()
            })
            .collect(),
        stats: lists
            .par_iter()
            .zip(references)
            .map(|(l, r)| l.as_ref().hypotheses().iter().map(|h| bleu_stats(&h.tokens, r)).collect())
            .collect(),
        names,
    };
    let axes: Vec<usize> = problem
        .names
        .iter()
        .enumerate()
        .filter(|(_, n)| tunable.contains(*n))
        .map(|(i, _)| i)
        .collect();

    let mut w: Vec<f64> = problem.names.iter().map(|n| init.get(n)).collect();
    let initial_bleu = reranked_bleu(lists, references, init);
    let mut bleu = initial_bleu;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = Vec::new();

    for iteration in 1..=config.iterations {
        let start_bleu = bleu;
        let mut directions: Vec<Vec<f64>> = axes
            .iter()
            .map(|&a| {
                let mut d = vec![0.0; w.len()];
                d[a] = 1.0;
                d
            })
            .collect();
        for _ in 0..config.restarts {
            let mut d = vec![0.0; w.len()];
            for &a in &axes {
                d[a] = StandardNormal.sample(&mut rng);
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                d.iter_mut().for_each(|v| *v /= norm);
                directions.push(d);
            }
        }

        for (id, d) in directions.iter().enumerate() {
            let score = |trial: &[f64]| reranked_bleu(lists, references, &to_weights(&problem.names, trial, &keep));
            // predictions can disagree with a real rerank right at a breakpoint,
            // so every accepted step is re-scored
            let mut best: Option<(f64, Vec<f64>, f64)> = None;
            for (g, _) in problem
                .line_search(&w, d)
                .into_iter()
                .take_while(|&(_, predicted)| predicted > bleu)
                .take(MAX_TRIALS)
            {
                let trial: Vec<f64> = w.iter().zip(d).map(|(a, b)| a + g * b).collect();
                let actual = score(&trial);
                if actual > bleu {
                    best = Some((g, trial, actual));
                    break;
                }
            }
            // an axis weight of exactly zero ties every hypothesis on that
            // feature, a single point that floating-point steps never land on
            if id < axes.len() && w[axes[id]] != 0.0 {
                let mut trial = w.clone();
                trial[axes[id]] = 0.0;
                let actual = score(&trial);
                if actual > best.as_ref().map_or(bleu, |b| b.2) {
                    best = Some((-w[axes[id]], trial, actual));
                }
            }
            let mut gamma = 0.0;
            if let Some((g, trial, actual)) = best {
                w = trial;
                bleu = actual;
                gamma = g;
            }
            log.push(MertLogRow {
                iteration,
                direction: id,
                gamma,
                bleu,
            });
        }
        if bleu - start_bleu < CONVERGENCE {
            break;
        }
    }

    Ok(MertResult {
        weights: to_weights(&problem.names, &w, &keep),
        bleu,
        initial_bleu,
        log,
    })
}

/// TSV with header `iteration, direction, gamma, bleu`.
pub fn render_mert_log(rows: &[MertLogRow]) -> String {
    let mut out = String::from("iteration\tdirection\tgamma\tbleu\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.iteration,
            r.direction,
            real(r.gamma),
            real(r.bleu)
        ));
    }
    out
}
