//! Helpers for driving the binary against files in a scratch directory.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nmt_rerank::corpus::{render_corpus, render_nbest, NBestList, Sentence};
use nmt_rerank::synthetic::{planted_nbest, reversal_pairs, reversal_tokens};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmt-rerank"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs and insists on success, returning stdout.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

pub fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// A small reversal task on disk: train.src/trg, dev.src/trg, test.src/ref
/// and test.nbest with the reference planted among perturbations.
pub fn toy_task(dir: &Path, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, dev, test) = (
        reversal_pairs(60, 6, 2..=5, &mut rng),
        reversal_pairs(10, 6, 2..=5, &mut rng),
        reversal_pairs(12, 6, 2..=5, &mut rng),
    );
    let side = |pairs: &[(Sentence, Sentence)], first: bool| {
        render_corpus(&pairs.iter().map(|(s, t)| if first { s.clone() } else { t.clone() }).collect::<Vec<_>>())
    };
    write(dir, "train.src", &side(&train, true));
    write(dir, "train.trg", &side(&train, false));
    write(dir, "dev.src", &side(&dev, true));
    write(dir, "dev.trg", &side(&dev, false));
    write(dir, "test.src", &side(&test, true));
    write(dir, "test.ref", &side(&test, false));
    let tokens = reversal_tokens(6);
    let lists: Vec<NBestList> = test
        .iter()
        .enumerate()
        .map(|(i, (_, t))| planted_nbest(i, t, 8, 4, &tokens, &mut rng))
        .collect();
    write(dir, "test.nbest", &render_nbest(&lists));
    write(dir, "base.weights", "base\t1.0\n");
}

pub const TRAIN_TOY: &[&str] = &[
    "train", "--src", "train.src", "--trg", "train.trg", "--dev-src", "dev.src", "--dev-trg", "dev.trg",
    "--embed", "6", "--hidden", "6", "--lr", "0.1", "--epochs", "2", "--vocab-min-count", "1",
];

/// Error-category counts from a manual study, as (category, improved, degraded).
pub const ERROR_COUNTS: &[(&str, usize, usize)] = &[
    ("Reordering", 55, 9),
    ("Deletion", 20, 10),
    ("Insertion", 19, 2),
    ("Substitution", 15, 11),
    ("Conjugation", 8, 1),
];

/// One annotation per sentence, improvements then degradations per category,
/// plus a few `equal` records that must not count.
pub fn error_annotations() -> String {
    let mut out = String::new();
    let mut id = 0;
    for &(cat, imp, deg) in ERROR_COUNTS {
        for (verdict, n) in [("improved", imp), ("degraded", deg), ("equal", 2)] {
            for _ in 0..n {
                out.push_str(&format!("{id}\t{verdict}\t{cat}\n"));
                id += 1;
            }
        }
    }
    out
}
