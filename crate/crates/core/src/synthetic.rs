//! Deterministic toy data: a sequence-reversal "translation" task and n-best
//! lists with the correct output planted among perturbed distractors.

use std::collections::{BTreeMap, HashSet};
use std::ops::RangeInclusive;

use rand::Rng;

use crate::corpus::{Hypothesis, NBestList, Sentence};

/// Name of the baseline feature on planted lists: minus the baseline rank.
pub const BASE_FEATURE: &str = "base";

/// `w0, w1, ...`
pub fn reversal_tokens(vocab_size: usize) -> Vec<String> {
    (0..vocab_size).map(|k| format!("w{k}")).collect()
}

pub fn reverse(sentence: &Sentence) -> Sentence {
    Sentence::new(sentence.iter().rev().cloned()).expect("tokens already valid")
}

pub fn random_sentence(tokens: &[String], lengths: RangeInclusive<usize>, rng: &mut impl Rng) -> Sentence {
    let len = rng.random_range(lengths);
    Sentence::new((0..len).map(|_| tokens[rng.random_range(0..tokens.len())].clone()))
        .expect("tokens already valid")
}

/// `(source, reversed source)` pairs.
pub fn reversal_pairs(
    count: usize,
    vocab_size: usize,
    lengths: RangeInclusive<usize>,
    rng: &mut impl Rng,
) -> Vec<(Sentence, Sentence)> {
    let tokens = reversal_tokens(vocab_size);
    (0..count)
        .map(|_| {
            let src = random_sentence(&tokens, lengths.clone(), rng);
            let trg = reverse(&src);
            (src, trg)
        })
        .collect()
}

/// One to three random edits (adjacent swap, substitution, deletion, insertion).
pub fn perturb(sentence: &Sentence, tokens: &[String], rng: &mut impl Rng) -> Sentence {
    let mut words: Vec<String> = sentence.tokens().to_vec();
    for _ in 0..rng.random_range(1..=3) {
        let random_token = tokens[rng.random_range(0..tokens.len())].clone();
        match rng.random_range(0..4) {
            0 if words.len() >= 2 => {
                let i = rng.random_range(0..words.len() - 1);
                words.swap(i, i + 1);
            }
            1 if !words.is_empty() => {
                let i = rng.random_range(0..words.len());
                words[i] = random_token;
            }
            2 if words.len() >= 2 => {
                words.remove(rng.random_range(0..words.len()));
            }
            _ => {
                let i = rng.random_range(0..=words.len());
                words.insert(i, random_token);
            }
        }
    }
    Sentence::new(words).expect("tokens already valid")
}

/// An n-best list of up to `size` unique hypotheses with `correct` at a
/// uniformly random rank below `max_correct_rank` and perturbations of it
/// elsewhere. Hypotheses carry [`BASE_FEATURE`] = −rank, which is also their
/// baseline score.
pub fn planted_nbest(
    sentence_id: usize,
    correct: &Sentence,
    size: usize,
    max_correct_rank: usize,
    tokens: &[String],
    rng: &mut impl Rng,
) -> NBestList {
    let size = size.max(1);
    let correct_rank = rng.random_range(0..max_correct_rank.clamp(1, size));
    let mut seen: HashSet<Sentence> = HashSet::from([correct.clone()]);
    let mut distractors = Vec::with_capacity(size - 1);
    let mut attempts = 0;
    while distractors.len() + 1 < size && attempts < 50 * size {
        attempts += 1;
        let d = perturb(correct, tokens, rng);
        if seen.insert(d.clone()) {
            distractors.push(d);
        }
    }
    let correct_rank = correct_rank.min(distractors.len());
    distractors.insert(correct_rank, correct.clone());
    let hyps = distractors
        .into_iter()
        .enumerate()
        .map(|(rank, tokens)| {
            let base = -(rank as f64);
            Hypothesis::new(tokens, BTreeMap::from([(BASE_FEATURE.to_owned(), base)]), base)
        })
        .collect();
    NBestList::new(sentence_id, hyps).expect("non-empty")
}
