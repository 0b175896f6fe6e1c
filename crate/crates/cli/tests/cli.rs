//! End-to-end behaviour of the `nmt-rerank` binary.

mod common;

use common::{ok, read, run, error_annotations, toy_task, write, TRAIN_TOY};
use nmt_rerank::corpus::{parse_nbest, render_corpus};
use nmt_rerank::rerank::NMT_FEATURE;
use tempfile::tempdir;

fn trained(dir: &std::path::Path) {
    toy_task(dir, 3);
    let mut args = TRAIN_TOY.to_vec();
    args.extend(["--model", "m.bin"]);
    ok(dir, &args);
}

fn baseline_1best(dir: &std::path::Path) -> String {
    let lists = parse_nbest(read(dir, "test.nbest").as_bytes()).unwrap();
    render_corpus(&lists.iter().map(|l| l.hypotheses()[0].tokens.clone()).collect::<Vec<_>>())
}

#[test]
fn train_writes_model_and_epoch_log() {
    let dir = tempdir().unwrap();
    toy_task(dir.path(), 1);
    let mut args = TRAIN_TOY.to_vec();
    args.extend(["--model", "m.bin"]);
    let log = ok(dir.path(), &args);
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch\ttrain_ll\tdev_ll\tlr");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1\t"));
    assert!(std::fs::read(dir.path().join("m.bin")).unwrap().starts_with(b"NMTRSCOR"));
}

#[test]
fn missing_dev_file_exits_2_naming_the_flag() {
    let dir = tempdir().unwrap();
    toy_task(dir.path(), 1);
    std::fs::remove_file(dir.path().join("dev.src")).unwrap();
    let mut args = TRAIN_TOY.to_vec();
    args.extend(["--model", "m.bin"]);
    let out = run(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dev-src"));
    assert!(!dir.path().join("m.bin").exists());
}

#[test]
fn missing_flag_exits_2() {
    let dir = tempdir().unwrap();
    let out = run(dir.path(), &["train", "--src", "a", "--trg", "b", "--dev-src", "c", "--model", "m"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dev-trg"));
}

#[test]
fn rerank_with_n_1_is_the_baseline() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    write(d, "w", &format!("base\t0.0\n{NMT_FEATURE}\t1.0\n"));
    ok(d, &["rerank", "--nbest", "test.nbest", "--src", "test.src", "--model", "m.bin", "--weights", "w", "--n", "1", "--out", "out.txt"]);
    assert_eq!(read(d, "out.txt"), baseline_1best(d));
}

#[test]
fn rerank_with_zero_neural_weight_is_the_baseline() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    write(d, "w", &format!("base\t1.0\n{NMT_FEATURE}\t0.0\n"));
    ok(d, &[
        "rerank", "--nbest", "test.nbest", "--src", "test.src", "--model", "m.bin", "--weights", "w",
        "--out", "out.txt", "--dump-augmented", "aug.nbest",
    ]);
    assert_eq!(read(d, "out.txt"), baseline_1best(d));
    let aug = parse_nbest(read(d, "aug.nbest").as_bytes()).unwrap();
    assert!(aug.iter().flat_map(|l| l.hypotheses()).all(|h| h.features[NMT_FEATURE] <= 0.0));
}

#[test]
fn rerank_ensemble_of_a_model_with_itself() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    write(d, "w", &format!("base\t0.1\n{NMT_FEATURE}\t1.0\n"));
    let common = ["rerank", "--nbest", "test.nbest", "--src", "test.src", "--weights", "w", "--model", "m.bin"];
    let mut single = common.to_vec();
    single.extend(["--out", "one.txt"]);
    ok(d, &single);
    let mut double = common.to_vec();
    double.extend(["--model", "m.bin", "--ensemble-weights", "0.5,0.5", "--out", "two.txt"]);
    ok(d, &double);
    assert_eq!(read(d, "one.txt"), read(d, "two.txt"));

    let mut bad = common.to_vec();
    bad.extend(["--ensemble-weights", "0.5,0.5", "--out", "bad.txt"]);
    assert_eq!(run(d, &bad).status.code(), Some(2));
}

#[test]
fn rerank_reports_missing_ids() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    let nbest: String = read(d, "test.nbest").lines().filter(|l| !l.starts_with("3 |||")).map(|l| format!("{l}\n")).collect();
    write(d, "gap.nbest", &nbest);
    let out = run(d, &["rerank", "--nbest", "gap.nbest", "--src", "test.src", "--model", "m.bin", "--weights", "base.weights", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));
    assert!(!d.join("o").exists());
}

#[test]
fn mert_tunes_the_neural_weight() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    ok(d, &[
        "mert", "--nbest", "test.nbest", "--src", "test.src", "--refs", "test.ref", "--model", "m.bin",
        "--init-weights", "base.weights", "--tune-only", NMT_FEATURE, "--restarts", "2", "--iters", "5",
        "--out", "tuned.weights", "--log", "mert.log",
    ]);
    let w = read(d, "tuned.weights");
    assert!(w.contains("base\t1.0\n"), "{w}");
    assert!(w.contains(NMT_FEATURE));
    assert!(read(d, "mert.log").starts_with("iteration\tdirection\tgamma\tbleu\n"));
}

#[test]
fn mert_without_a_model_tunes_existing_features() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    toy_task(d, 4);
    ok(d, &[
        "mert", "--nbest", "test.nbest", "--src", "test.src", "--refs", "test.ref",
        "--init-weights", "base.weights", "--tune-all", "--out", "tuned.weights",
    ]);
    assert!(read(d, "tuned.weights").starts_with("base\t"));
    let both = run(d, &[
        "mert", "--nbest", "test.nbest", "--src", "test.src", "--refs", "test.ref",
        "--init-weights", "base.weights", "--tune-all", "--tune-only", "base", "--out", "x",
    ]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn evaluate_identity_corpus() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    toy_task(d, 2);
    ok(d, &["evaluate", "--hyp", "test.ref", "--ref", "test.ref", "--out", "r.tsv"]);
    assert_eq!(read(d, "r.tsv"), "metric\tvalue\nbleu\t1.0\nribes\t1.0\n");
}

#[test]
fn evaluate_with_baseline_adds_significance() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    toy_task(d, 2);
    write(d, "base.txt", &baseline_1best(d));
    ok(d, &[
        "evaluate", "--hyp", "test.ref", "--ref", "test.ref", "--baseline-hyp", "base.txt", "--metric", "bleu",
        "--bootstrap-samples", "200", "--out", "r.tsv",
    ]);
    let report = read(d, "r.tsv");
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "metric\tvalue\tp_value\tsignificant");
    assert!(lines[1].starts_with("bleu\t1.0\t"));
    assert!(lines[2].starts_with("bleu_baseline\t"));
    assert!(lines[2].ends_with("\t-\t-"));
}

#[test]
fn sweep_over_eight_sizes() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    write(d, "w", &format!("base\t0.5\n{NMT_FEATURE}\t1.0\n"));
    ok(d, &[
        "sweep", "--nbest", "test.nbest", "--src", "test.src", "--refs", "test.ref", "--model", "m.bin",
        "--weights", "w", "--max-n", "8", "--out", "s.tsv",
    ]);
    let tsv = read(d, "s.tsv");
    let rows: Vec<Vec<f64>> = tsv
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(tsv.lines().next(), Some("n\tmodel_score\tbleu"));
    assert_eq!(rows.len(), 8);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
    assert_eq!(rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), (1..=8).collect::<Vec<_>>());
}

#[test]
fn error_tally_counts_and_percentages() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write(d, "ann.tsv", &error_annotations());
    ok(d, &["error-tally", "--annotations", "ann.tsv", "--out", "t.tsv"]);
    assert_eq!(
        read(d, "t.tsv"),
        "category\timproved\tdegraded\tpercent_improved\n\
         Reordering\t55\t9\t86%\n\
         Deletion\t20\t10\t67%\n\
         Insertion\t19\t2\t90%\n\
         Substitution\t15\t11\t58%\n\
         Conjugation\t8\t1\t89%\n\
         Total\t117\t33\t78%\n"
    );
}

#[test]
fn human_score_of_balanced_judgments() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    write(d, "j.tsv", "0\twin\n1\tloss\n2\ttie\n3\ttie\n");
    ok(d, &["human-score", "--judgments", "j.tsv", "--out", "h.tsv"]);
    assert_eq!(read(d, "h.tsv"), "metric\tvalue\nhuman\t0.0\n");
    write(d, "bad.tsv", "0\twin\n1\tdraw\n");
    let out = run(d, &["human-score", "--judgments", "bad.tsv", "--out", "h2.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    trained(d);
    write(d, "w", &format!("base\t0.3\n{NMT_FEATURE}\t1.0\n"));
    for t in ["1", "3"] {
        ok(d, &[
            "--threads", t, "rerank", "--nbest", "test.nbest", "--src", "test.src", "--model", "m.bin",
            "--weights", "w", "--out", &format!("o{t}"),
        ]);
    }
    assert_eq!(read(d, "o1"), read(d, "o3"));
}
