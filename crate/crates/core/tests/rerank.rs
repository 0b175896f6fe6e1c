//! Reranking, MERT and sweep checks against brute-force oracles.

use std::collections::BTreeMap;

use nmt_rerank::corpus::{Hypothesis, NBestList, Sentence, WeightVector};
use nmt_rerank::metrics::{bleu_stats, corpus_bleu, corpus_bleu_of, BleuStats};
use nmt_rerank::neural::{NeuralScorer, ScorerConfig};
use nmt_rerank::rerank::{
    augment, mert, rerank, reranked_bleu, select_index, sweep, MertConfig, Tunable, NMT_FEATURE,
};
use nmt_rerank::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{hand_set_scorer, Oracle};

fn s(text: &str) -> Sentence {
    Sentence::parse(text)
}

fn hyp(text: &str, features: &[(&str, f64)]) -> Hypothesis {
    let features: BTreeMap<String, f64> = features.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Hypothesis::new(s(text), features, 0.0)
}

fn weights(pairs: &[(&str, f64)]) -> WeightVector {
    pairs.iter().copied().collect()
}

/// Random single-feature instance over a 4-word vocabulary so n-grams collide.
fn toy_instance(rng: &mut ChaCha8Rng) -> (Vec<NBestList>, Vec<Sentence>) {
    let integral = rng.random_bool(0.5);
    let words = ["a", "b", "c", "d"];
    let sentence = |rng: &mut ChaCha8Rng| {
        Sentence::new((0..rng.random_range(4..7)).map(|_| words[rng.random_range(0..4)].to_string())).unwrap()
    };
    let count = rng.random_range(1..=5);
    let mut lists = Vec::new();
    let mut refs = Vec::new();
    for id in 0..count {
        let hyps: Vec<Hypothesis> = (0..rng.random_range(1..=4))
            .map(|_| {
                let f = if integral {
                    rng.random_range(-3..=3) as f64
                } else {
                    rng.random_range(-3.0..3.0)
                };
                Hypothesis::new(sentence(rng), BTreeMap::from([("f".to_string(), f)]), 0.0)
            })
            .collect();
        // mostly copy a hypothesis so BLEU is not uniformly zero
        let reference = if rng.random_bool(0.7) {
            hyps[rng.random_range(0..hyps.len())].tokens.clone()
        } else {
            sentence(rng)
        };
        lists.push(NBestList::new(id, hyps).unwrap());
        refs.push(reference);
    }
    (lists, refs)
}

#[test]
fn augment_adds_exactly_one_feature() {
    let scorer = hand_set_scorer();
    let list = NBestList::new(0, vec![hyp("a b", &[]), hyp("b", &[])]).unwrap();
    let out = augment(&[list], std::slice::from_ref(&scorer), &[1.0], &[s("b a")]).unwrap();
    let oracle = Oracle {
        p: scorer.params(),
        h: 2,
    };
    let v = scorer.config().target_vocab();
    for h in out[0].hypotheses() {
        assert_eq!(h.features.len(), 1);
        let want = oracle.log_likelihood(&v.ids(&s("b a")), &v.ids(&h.tokens));
        assert!((h.features[NMT_FEATURE] - want).abs() < 1e-8);
    }
}

#[test]
fn augment_leaves_other_features_alone() {
    let scorer = hand_set_scorer();
    let list = NBestList::new(0, vec![hyp("a", &[("lm", -2.5), ("tm_0", 1.0)])]).unwrap();
    let out = augment(&[list], &[scorer], &[1.0], &[s("a")]).unwrap();
    let h = &out[0].hypotheses()[0];
    assert_eq!(h.features["lm"], -2.5);
    assert_eq!(h.features["tm_0"], 1.0);
    assert_eq!(h.features.len(), 3);
}

#[test]
fn augmenting_twice_fails() {
    let scorer = hand_set_scorer();
    let list = NBestList::new(0, vec![hyp("a", &[])]).unwrap();
    let once = augment(&[list], std::slice::from_ref(&scorer), &[1.0], &[s("a")]).unwrap();
    let again = augment(&[once[0].clone().into_inner()], &[scorer], &[1.0], &[s("a")]);
    let err = again.unwrap_err();
    assert!(matches!(err, Error::FeatureAlreadyPresent(_)));
    assert!(err.to_string().starts_with("feature already present"));
}

#[test]
fn augment_rejects_misaligned_sources() {
    let scorer = hand_set_scorer();
    let lists = vec![
        NBestList::new(0, vec![hyp("a", &[])]).unwrap(),
        NBestList::new(2, vec![hyp("a", &[])]).unwrap(),
    ];
    assert!(augment(&lists, std::slice::from_ref(&scorer), &[1.0], &[s("a"), s("b")]).is_err());
    assert!(augment(&lists[..1], &[scorer], &[1.0], &[s("a"), s("b")]).is_err());
}

#[test]
fn augment_with_ensemble_of_identical_models() {
    let v = nmt_rerank::corpus::Vocabulary::from_tokens(["x", "y"]).unwrap();
    let scorer = NeuralScorer::init(ScorerConfig::new(3, 3, 3, v.clone(), v, 4).unwrap());
    let list = NBestList::new(0, vec![hyp("x y", &[]), hyp("y", &[])]).unwrap();
    let single = augment(std::slice::from_ref(&list), std::slice::from_ref(&scorer), &[1.0], &[s("y x")]).unwrap();
    let pair = augment(&[list], &[scorer.clone(), scorer], &[0.5, 0.5], &[s("y x")]).unwrap();
    for (a, b) in single[0].hypotheses().iter().zip(pair[0].hypotheses()) {
        assert!((a.features[NMT_FEATURE] - b.features[NMT_FEATURE]).abs() < 1e-12);
    }
}

#[test]
fn mert_finds_the_positive_sign_regime() {
    // hypothesis "A" matches the reference and carries f = +1, "B" carries f = -1
    let lists = vec![
        NBestList::new(0, vec![hyp("the cat sat down today", &[("f", -1.0)]), hyp("a cat sat on the mat", &[("f", 1.0)])]).unwrap(),
        NBestList::new(1, vec![hyp("dogs run", &[("f", -1.0)]), hyp("the dog ran off very fast", &[("f", 1.0)])]).unwrap(),
    ];
    let refs = vec![s("a cat sat on the mat"), s("the dog ran off very fast")];
    // brute force over the two sign regimes
    let neg = reranked_bleu(&lists, &refs, &weights(&[("f", -1.0)]));
    let pos = reranked_bleu(&lists, &refs, &weights(&[("f", 1.0)]));
    assert!(pos > neg);
    let out = mert(&lists, &refs, &weights(&[("f", -1.0)]), &MertConfig::default()).unwrap();
    assert!(out.weights.get("f") > 0.0);
    assert_eq!(out.bleu, pos);
    assert_eq!(out.initial_bleu, neg);
}

#[test]
fn mert_keeps_an_optimal_init() {
    let lists = vec![
        NBestList::new(0, vec![hyp("x y z w", &[("f", 2.0)]), hyp("q", &[("f", 1.0)])]).unwrap(),
        NBestList::new(1, vec![hyp("y z w x", &[("f", 0.5)]), hyp("z", &[("f", 0.0)])]).unwrap(),
    ];
    let refs = vec![s("x y z w"), s("y z w x")];
    let init = weights(&[("f", 1.0)]);
    let out = mert(&lists, &refs, &init, &MertConfig::default()).unwrap();
    assert_eq!(rerank(&lists, &out.weights, usize::MAX), rerank(&lists, &init, usize::MAX));
    assert_eq!(out.bleu, 1.0);
}

#[test]
fn mert_matches_grid_oracle_on_random_toys() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut nontrivial = 0;
    for case in 0..400 {
        let (lists, refs) = toy_instance(&mut rng);
        let init = weights(&[("f", rng.random_range(-2.0..2.0))]);
        let initial = reranked_bleu(&lists, &refs, &init);
        let grid = (-500..=500)
            .map(|k| reranked_bleu(&lists, &refs, &weights(&[("f", k as f64 * 0.01)])))
            .fold(f64::MIN, f64::max);
        let config = MertConfig {
            seed: case,
            ..MertConfig::default()
        };
        let out = mert(&lists, &refs, &init, &config).unwrap();
        assert_eq!(out.bleu, reranked_bleu(&lists, &refs, &out.weights), "case {case}");
        assert!(out.bleu >= grid - 1e-9, "case {case}: {} < grid {grid}", out.bleu);
        assert!(out.bleu >= initial, "case {case}");
        if grid > initial {
            nontrivial += 1;
        }
    }
    assert!(nontrivial > 10, "too few instances needed tuning: {nontrivial}");
}

#[test]
fn mert_is_deterministic_and_non_worsening_with_many_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let words = ["a", "b", "c", "d", "e"];
    let mut lists = Vec::new();
    let mut refs = Vec::new();
    for id in 0..20 {
        let hyps = (0..8)
            .map(|_| {
                let text: Vec<String> = (0..rng.random_range(3..8)).map(|_| words[rng.random_range(0..5)].into()).collect();
                let feats = ["lm", "tm", "wp"].map(|n| (n.to_string(), rng.random_range(-5.0..0.0)));
                Hypothesis::new(Sentence::new(text).unwrap(), feats.into_iter().collect(), 0.0)
            })
            .collect();
        lists.push(NBestList::new(id, hyps).unwrap());
        refs.push(Sentence::new((0..6).map(|_| words[rng.random_range(0..5)].to_string())).unwrap());
    }
    let init = weights(&[("lm", 1.0), ("tm", 1.0), ("wp", 1.0)]);
    let a = mert(&lists, &refs, &init, &MertConfig::default()).unwrap();
    let b = mert(&lists, &refs, &init, &MertConfig::default()).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.log, b.log);
    assert!(a.bleu >= reranked_bleu(&lists, &refs, &init));
    assert!(a.log.windows(2).all(|w| w[1].bleu >= w[0].bleu));

    let only = MertConfig {
        tunable: Tunable::Only(vec!["tm".into()]),
        ..MertConfig::default()
    };
    let c = mert(&lists, &refs, &init, &only).unwrap();
    assert_eq!(c.weights.get("lm"), 1.0);
    assert_eq!(c.weights.get("wp"), 1.0);
}

#[test]
fn mert_rejects_empty_and_misaligned() {
    let empty: Vec<NBestList> = vec![];
    assert!(mert(&empty, &[], &WeightVector::new(), &MertConfig::default()).is_err());
    let lists = vec![NBestList::new(0, vec![hyp("a", &[("f", 1.0)])]).unwrap()];
    assert!(mert(&lists, &[], &WeightVector::new(), &MertConfig::default()).is_err());
}

fn brute_force_bleu(lists: &[NBestList], refs: &[Sentence], w: &WeightVector, n: usize) -> (f64, f64) {
    let mut total: BleuStats = BleuStats::default();
    let mut score = 0.0;
    for (l, r) in lists.iter().zip(refs) {
        let candidates = &l.hypotheses()[..n.min(l.len())];
        let best = candidates
            .iter()
            .map(|h| w.dot(&h.features))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        score += best.1;
        total += bleu_stats(&candidates[best.0].tokens, r);
    }
    (score / lists.len() as f64, corpus_bleu(&total))
}

#[test]
fn sweep_matches_brute_force_reselection() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let (lists, refs) = toy_instance(&mut rng);
        let w = weights(&[("f", 1.0)]);
        let points = sweep(&lists, &refs, &w, &[1, 2, 4]).unwrap();
        assert_eq!(points.iter().map(|p| p.n).collect::<Vec<_>>(), vec![1, 2, 4]);
        for p in &points {
            let (score, bleu) = brute_force_bleu(&lists, &refs, &w, p.n);
            assert!((p.bleu - bleu).abs() < 1e-12);
            assert!((p.model_score - score).abs() < 1e-12);
        }
        let baseline: Vec<Sentence> = lists.iter().map(|l| l.hypotheses()[0].tokens.clone()).collect();
        assert_eq!(points[0].bleu, corpus_bleu_of(&baseline, &refs));
        assert!(points.windows(2).all(|w| w[1].model_score >= w[0].model_score));
    }
}

proptest! {
    #[test]
    fn selection_is_scale_invariant(
        values in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..12),
        w1 in -3.0f64..3.0,
        w2 in -3.0f64..3.0,
        factor in 0.01f64..100.0,
        n in 1usize..15,
    ) {
        let hyps = values
            .iter()
            .enumerate()
            .map(|(k, (a, b))| hyp(&format!("h{k}"), &[("a", *a), ("b", *b)]))
            .collect();
        let list = NBestList::new(0, hyps).unwrap();
        let w = weights(&[("a", w1), ("b", w2)]);
        // scaling can reorder exact ties only through rounding; compare scores instead of ranks
        let k1 = select_index(&list, &w, n);
        let k2 = select_index(&list, &w.scaled(factor), n);
        let s1 = w.dot(&list.hypotheses()[k1].features);
        let s2 = w.dot(&list.hypotheses()[k2].features);
        prop_assert!((s1 - s2).abs() <= 1e-9 * s1.abs().max(1.0));
        prop_assert!(k1 < n.min(list.len()));
    }
}

