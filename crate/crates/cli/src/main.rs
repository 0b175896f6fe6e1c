use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nmt_rerank::corpus::{
    read_annotations, read_corpus, read_judgments, read_nbest, read_weights, render_corpus,
    render_nbest, NBestList, Sentence, Vocabulary,
};
use nmt_rerank::metrics::{
    bootstrap_test, error_tally, human_score, render_reports, render_tally, CorpusMetric,
    EvalReport, Metric, RIBES_ALPHA, RIBES_BETA,
};
use nmt_rerank::neural::{
    render_epoch_log, train_with_progress, NeuralScorer, ScorerConfig, TrainConfig, DEFAULT_CLIP_NORM,
};
use nmt_rerank::rerank::{
    augment, check_ids, mert, render_mert_log, render_sweep, rerank, sweep, MertConfig, Tunable,
};

mod output;

use output::Outputs;

/// Neural reranking of n-best lists: train attentional scorers, augment and
/// rerank n-best lists, tune weights with MERT and evaluate the results.
#[derive(Parser, Debug)]
#[command(name = "nmt-rerank", version)]
struct Cli {
    /// Seed for every random choice (shuffling, initialization, MERT, bootstrap)
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads; defaults to one per core. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a scorer; the epoch log goes to stdout
    Train(TrainArgs),
    /// Add the neural feature and write the reranked 1-best corpus
    Rerank(RerankArgs),
    /// Tune feature weights on a dev set
    Mert(MertArgs),
    /// Score a corpus with BLEU and/or RIBES
    Evaluate(EvaluateArgs),
    /// Rerank with growing n-best prefixes
    Sweep(SweepArgs),
    /// Pairwise human score from win/loss/tie judgments
    HumanScore(HumanScoreArgs),
    /// Improvement/degradation counts per error category
    ErrorTally(ErrorTallyArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    trg: PathBuf,
    #[arg(long)]
    dev_src: PathBuf,
    #[arg(long)]
    dev_trg: PathBuf,
    /// Word embedding size
    #[arg(long, default_value_t = 64)]
    embed: usize,
    /// LSTM state size
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    /// Attention layer size; defaults to --hidden
    #[arg(long)]
    attention_hidden: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    /// Rescale per-sentence gradients whose L2 norm exceeds this; 0 disables
    #[arg(long, default_value_t = DEFAULT_CLIP_NORM)]
    clip_norm: f64,
    /// Words seen fewer times map to <unk>
    #[arg(long, default_value_t = 1)]
    vocab_min_count: usize,
    /// Where to write the trained model
    #[arg(long)]
    model: PathBuf,
}

/// Scorers and how to mix them.
#[derive(Args, Debug)]
struct ModelArgs {
    /// Trained scorer; repeat for an ensemble
    #[arg(long = "model")]
    models: Vec<PathBuf>,
    /// Comma-separated mixture weights, one per model; uniform by default
    #[arg(long, value_delimiter = ',')]
    ensemble_weights: Vec<f64>,
}

#[derive(Args, Debug)]
struct RerankArgs {
    #[arg(long)]
    nbest: PathBuf,
    #[arg(long)]
    src: PathBuf,
    #[command(flatten)]
    models: ModelArgs,
    /// Feature weights, one `name<TAB>value` per line
    #[arg(long)]
    weights: PathBuf,
    /// Only consider the first N hypotheses of each list
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the n-best lists with the neural feature added
    #[arg(long)]
    dump_augmented: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("tuning").args(["tune_all", "tune_only"])))]
struct MertArgs {
    #[arg(long)]
    nbest: PathBuf,
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    refs: PathBuf,
    #[command(flatten)]
    models: ModelArgs,
    /// Starting weights; features missing here start at 0
    #[arg(long)]
    init_weights: PathBuf,
    /// Tune every feature (the default)
    #[arg(long)]
    tune_all: bool,
    /// Tune only this feature; repeatable
    #[arg(long, value_name = "NAME")]
    tune_only: Vec<String>,
    /// Random search directions per iteration
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    /// Tuned weights
    #[arg(long)]
    out: PathBuf,
    /// Per-direction search log; stderr when absent
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricChoice {
    Bleu,
    Ribes,
    Both,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Compare against this system with paired bootstrap resampling
    #[arg(long)]
    baseline_hyp: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricChoice::Both)]
    metric: MetricChoice,
    #[arg(long, default_value_t = 1000)]
    bootstrap_samples: usize,
    /// RIBES precision exponent
    #[arg(long, default_value_t = RIBES_ALPHA)]
    alpha: f64,
    /// RIBES brevity penalty exponent
    #[arg(long, default_value_t = RIBES_BETA)]
    beta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    nbest: PathBuf,
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    refs: PathBuf,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long)]
    weights: PathBuf,
    /// Largest prefix size; every size from 1 is reported unless --sizes is given
    #[arg(long, default_value_t = 1000)]
    max_n: usize,
    /// Explicit comma-separated sizes, ascending
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct HumanScoreArgs {
    #[arg(long)]
    judgments: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ErrorTallyArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Bad invocation rather than a failed run; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn input<'a>(flag: &str, path: &'a Path) -> Result<&'a Path> {
    if !path.is_file() {
        return Err(UsageError(format!("--{flag}: no such file: {}", path.display())).into());
    }
    Ok(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start worker threads")?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Train(a) => cmd_train(a, seed),
        Command::Rerank(a) => cmd_rerank(a),
        Command::Mert(a) => cmd_mert(a, seed),
        Command::Evaluate(a) => cmd_evaluate(a, seed),
        Command::Sweep(a) => cmd_sweep(a),
        Command::HumanScore(a) => cmd_human_score(a),
        Command::ErrorTally(a) => cmd_error_tally(a),
    }
}

fn parallel_corpus(src_flag: &str, src: &Path, trg_flag: &str, trg: &Path) -> Result<Vec<(Sentence, Sentence)>> {
    let s = read_corpus(input(src_flag, src)?)?;
    let t = read_corpus(input(trg_flag, trg)?)?;
    if s.len() != t.len() {
        bail!("--{src_flag} has {} lines but --{trg_flag} has {}", s.len(), t.len());
    }
    Ok(s.into_iter().zip(t).collect())
}

fn cmd_train(a: TrainArgs, seed: u64) -> Result<()> {
    let train_pairs = parallel_corpus("src", &a.src, "trg", &a.trg)?;
    let dev_pairs = parallel_corpus("dev-src", &a.dev_src, "dev-trg", &a.dev_trg)?;
    let sources: Vec<Sentence> = train_pairs.iter().map(|(s, _)| s.clone()).collect();
    let targets: Vec<Sentence> = train_pairs.iter().map(|(_, t)| t.clone()).collect();
    let config = ScorerConfig::new(
        a.embed,
        a.hidden,
        a.attention_hidden.unwrap_or(a.hidden),
        Vocabulary::build(&sources, a.vocab_min_count)?,
        Vocabulary::build(&targets, a.vocab_min_count)?,
        seed,
    )?;
    eprintln!(
        "training on {} pairs, vocabularies {}/{}",
        train_pairs.len(),
        config.source_vocab().len(),
        config.target_vocab().len()
    );
    let outcome = train_with_progress(
        NeuralScorer::init(config),
        &train_pairs,
        &dev_pairs,
        &TrainConfig::new(a.lr, a.epochs, seed)?.with_clip_norm((a.clip_norm != 0.0).then_some(a.clip_norm))?,
        |e| eprintln!("epoch {}: train {:.4} dev {:.4} lr {}", e.epoch, e.train_ll, e.dev_ll, e.learning_rate),
    )?;
    eprintln!("keeping epoch {}", outcome.best_epoch);
    let mut out = Outputs::default();
    out.add(&a.model, outcome.scorer.to_bytes());
    out.commit()?;
    print!("{}", render_epoch_log(&outcome.log));
    Ok(())
}

impl ModelArgs {
    fn load(&self) -> Result<(Vec<NeuralScorer>, Vec<f64>)> {
        let scorers = self
            .models
            .iter()
            .map(|p| NeuralScorer::load(input("model", p)?).with_context(|| format!("loading {}", p.display())))
            .collect::<Result<Vec<_>>>()?;
        let weights = if self.ensemble_weights.is_empty() {
            vec![1.0 / scorers.len().max(1) as f64; scorers.len()]
        } else if self.ensemble_weights.len() != scorers.len() {
            return Err(UsageError(format!(
                "--ensemble-weights has {} values for {} models",
                self.ensemble_weights.len(),
                scorers.len()
            ))
            .into());
        } else {
            self.ensemble_weights.clone()
        };
        Ok((scorers, weights))
    }

    /// Lists with the neural feature added, or unchanged when no model is given.
    fn lists(&self, nbest: &Path, src: &Path) -> Result<Vec<NBestList>> {
        let lists = read_nbest(input("nbest", nbest)?)?;
        let sources = read_corpus(input("src", src)?)?;
        check_ids(&lists, sources.len())?;
        let (scorers, weights) = self.load()?;
        if scorers.is_empty() {
            return Ok(lists);
        }
        eprintln!("scoring {} lists with {} model(s)", lists.len(), scorers.len());
        Ok(augment(&lists, &scorers, &weights, &sources)?
            .into_iter()
            .map(|l| l.into_inner())
            .collect())
    }
}

fn cmd_rerank(a: RerankArgs) -> Result<()> {
    if a.models.models.is_empty() {
        return Err(UsageError("at least one --model is required".into()).into());
    }
    if a.n == Some(0) {
        return Err(UsageError("--n must be positive".into()).into());
    }
    let weights = read_weights(input("weights", &a.weights)?)?;
    let lists = a.models.lists(&a.nbest, &a.src)?;
    let best = rerank(&lists, &weights, a.n.unwrap_or(usize::MAX));
    let mut out = Outputs::default();
    out.add(&a.out, render_corpus(&best));
    if let Some(dump) = &a.dump_augmented {
        out.add(dump, render_nbest(&lists));
    }
    out.commit()
}

fn cmd_mert(a: MertArgs, seed: u64) -> Result<()> {
    let init = read_weights(input("init-weights", &a.init_weights)?)?;
    let refs = read_corpus(input("refs", &a.refs)?)?;
    let lists = a.models.lists(&a.nbest, &a.src)?;
    let config = MertConfig {
        restarts: a.restarts,
        iterations: a.iters,
        seed,
        tunable: if a.tune_only.is_empty() {
            Tunable::All
        } else {
            Tunable::Only(a.tune_only.clone())
        },
    };
    let result = mert(&lists, &refs, &init, &config)?;
    eprintln!("tuning BLEU {} -> {}", result.initial_bleu, result.bleu);
    let log = render_mert_log(&result.log);
    let mut out = Outputs::default();
    out.add(&a.out, result.weights.render());
    match &a.log {
        Some(path) => out.add(path, log),
        None => eprint!("{log}"),
    }
    out.commit()
}

fn cmd_evaluate(a: EvaluateArgs, seed: u64) -> Result<()> {
    let hyp = read_corpus(input("hyp", &a.hyp)?)?;
    let refs = read_corpus(input("ref", &a.reference)?)?;
    if hyp.len() != refs.len() {
        bail!("--hyp has {} lines but --ref has {}", hyp.len(), refs.len());
    }
    let baseline = match &a.baseline_hyp {
        Some(p) => {
            let b = read_corpus(input("baseline-hyp", p)?)?;
            if b.len() != refs.len() {
                bail!("--baseline-hyp has {} lines but --ref has {}", b.len(), refs.len());
            }
            Some(b)
        }
        None => None,
    };
    let mut metrics = Vec::new();
    if a.metric != MetricChoice::Ribes {
        metrics.push(Metric::Bleu);
    }
    if a.metric != MetricChoice::Bleu {
        metrics.push(Metric::Ribes {
            alpha: a.alpha,
            beta: a.beta,
        });
    }
    let mut reports = Vec::new();
    for m in &metrics {
        let significance = match &baseline {
            Some(b) => Some(bootstrap_test(&hyp, b, &refs, m, a.bootstrap_samples, seed)?),
            None => None,
        };
        reports.push(EvalReport {
            metric: m.name().to_string(),
            value: m.corpus_score(&hyp, &refs),
            per_sentence: None,
            significance,
        });
        if let Some(b) = &baseline {
            reports.push(EvalReport {
                metric: format!("{}_baseline", m.name()),
                value: m.corpus_score(b, &refs),
                per_sentence: None,
                significance: None,
            });
        }
    }
    for r in &reports {
        eprintln!("{} {}", r.metric, r.percent_display());
    }
    let mut out = Outputs::default();
    out.add(&a.out, render_reports(&reports));
    out.commit()
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let sizes: Vec<usize> = if a.sizes.is_empty() {
        if a.max_n == 0 {
            return Err(UsageError("--max-n must be positive".into()).into());
        }
        (1..=a.max_n).collect()
    } else {
        a.sizes.clone()
    };
    let weights = read_weights(input("weights", &a.weights)?)?;
    let refs = read_corpus(input("refs", &a.refs)?)?;
    let lists = a.models.lists(&a.nbest, &a.src)?;
    let points = sweep(&lists, &refs, &weights, &sizes)?;
    let mut out = Outputs::default();
    out.add(&a.out, render_sweep(&points));
    out.commit()
}

fn cmd_human_score(a: HumanScoreArgs) -> Result<()> {
    let judgments = read_judgments(input("judgments", &a.judgments)?)?;
    let score = human_score(&judgments)?;
    let report = EvalReport {
        metric: "human".into(),
        value: score,
        per_sentence: None,
        significance: None,
    };
    let mut out = Outputs::default();
    out.add(&a.out, render_reports(&[report]));
    out.commit()
}

fn cmd_error_tally(a: ErrorTallyArgs) -> Result<()> {
    let annotations = read_annotations(input("annotations", &a.annotations)?)?;
    let mut out = Outputs::default();
    out.add(&a.out, render_tally(&error_tally(&annotations)));
    out.commit()
}
