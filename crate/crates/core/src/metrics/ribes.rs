use crate::corpus::Sentence;

pub const RIBES_ALPHA: f64 = 0.25;
pub const RIBES_BETA: f64 = 0.10;

fn occurrences<'a>(haystack: &'a [String], needle: &'a [String]) -> impl Iterator<Item = usize> + 'a {
    haystack
        .windows(needle.len())
        .enumerate()
        .filter(move |(_, w)| *w == needle)
        .map(|(i, _)| i)
}

/// Position in `reference` of `needle` when it occurs exactly once there and
/// exactly once in `hypothesis`.
fn unique_position(hypothesis: &[String], reference: &[String], needle: &[String]) -> Option<usize> {
    if occurrences(hypothesis, needle).nth(1).is_some() {
        return None;
    }
    let mut hits = occurrences(reference, needle);
    match (hits.next(), hits.next()) {
        (Some(pos), None) => Some(pos),
        _ => None,
    }
}

/// Reference positions of aligned hypothesis words, in hypothesis order.
///
/// A word occurring once on each side aligns directly. Otherwise the
/// narrowest n-gram context around it (left context tried before right at
/// each width) that is unique on both sides fixes the position; words with
/// no such context stay unaligned.
pub fn ribes_alignment(hypothesis: &Sentence, reference: &Sentence) -> Vec<usize> {
    let (hyp, refr) = (hypothesis.tokens(), reference.tokens());
    let mut aligned = Vec::new();
    for i in 0..hyp.len() {
        let word = &hyp[i..=i];
        if !refr.contains(&hyp[i]) {
            continue;
        }
        if let Some(pos) = unique_position(hyp, refr, word) {
            aligned.push(pos);
            continue;
        }
        for width in 1..(i + 1).max(hyp.len() - i + 1) {
            if width <= i {
                if let Some(pos) = unique_position(hyp, refr, &hyp[i - width..=i]) {
                    aligned.push(pos + width);
                    break;
                }
            }
            if i + width < hyp.len() {
                if let Some(pos) = unique_position(hyp, refr, &hyp[i..=i + width]) {
                    aligned.push(pos);
                    break;
                }
            }
        }
    }
    aligned
}

/// Normalized Kendall's tau of the alignment times unigram precision to the
/// `alpha` times brevity penalty to the `beta`. Result in `[0, 1]`.
pub fn ribes(hypothesis: &Sentence, reference: &Sentence, alpha: f64, beta: f64) -> f64 {
    if hypothesis.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let (hyp_len, ref_len) = (hypothesis.len() as f64, reference.len() as f64);
    let bp = (1.0 - ref_len / hyp_len).exp().min(1.0);
    let aligned = ribes_alignment(hypothesis, reference);
    let n = aligned.len();
    let nkt = if n == 1 && reference.len() == 1 {
        // a single word cannot be ordered; a one-word reference matched counts as in order
        1.0
    } else if n < 2 {
        return 0.0;
    } else {
        let mut ascending = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if aligned[i] < aligned[j] {
                    ascending += 1;
                }
            }
        }
        ascending as f64 / (n * (n - 1) / 2) as f64
    };
    let precision = n as f64 / hyp_len;
    nkt * precision.powf(alpha) * bp.powf(beta)
}

/// Mean of sentence-level RIBES.
pub fn corpus_ribes(hypotheses: &[Sentence], references: &[Sentence], alpha: f64, beta: f64) -> f64 {
    if hypotheses.is_empty() {
        return 0.0;
    }
    hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| ribes(h, r, alpha, beta))
        .sum::<f64>()
        / hypotheses.len() as f64
}
