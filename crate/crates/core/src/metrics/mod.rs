//! Translation evaluation.

mod bleu;
mod bootstrap;
mod human;
mod ribes;

pub use bleu::{bleu_stats, corpus_bleu, corpus_bleu_of, sentence_bleu_plus1, BleuStats, MAX_ORDER};
pub use bootstrap::{bootstrap_test, resample_indices, BootstrapOutcome, CorpusMetric, Metric};
pub use human::{error_tally, human_score, render_tally, TallyRow};
pub use ribes::{corpus_ribes, ribes, ribes_alignment, RIBES_ALPHA, RIBES_BETA};

use crate::fmt::real;

/// Significance threshold used for verdicts.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// A corpus-level metric value with optional significance against a baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub metric: String,
    pub value: f64,
    pub per_sentence: Option<Vec<f64>>,
    pub significance: Option<BootstrapOutcome>,
}

impl EvalReport {
    /// Value as a percentage rounded to one decimal, e.g. `38.2`.
    pub fn percent_display(&self) -> String {
        format!("{:.1}", 100.0 * self.value)
    }
}

/// TSV with a `metric<TAB>value` header, extended with `p_value` and
/// `significant` columns when any report carries a significance result.
pub fn render_reports(reports: &[EvalReport]) -> String {
    let with_sig = reports.iter().any(|r| r.significance.is_some());
    let mut out = String::from(if with_sig {
        "metric\tvalue\tp_value\tsignificant\n"
    } else {
        "metric\tvalue\n"
    });
    for r in reports {
        out.push_str(&r.metric);
        out.push('\t');
        out.push_str(&real(r.value));
        if with_sig {
            match &r.significance {
                Some(s) => out.push_str(&format!("\t{}\t{}", real(s.p_value), s.significant)),
                None => out.push_str("\t-\t-"),
            }
        }
        out.push('\n');
    }
    out
}
