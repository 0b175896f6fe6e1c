use crate::corpus::{AnnotationRecord, Outcome, PairwiseJudgment, Verdict};
use crate::error::{Error, Result};

/// Pairwise score in `[-100, 100]`: `100 * (wins - losses) / judgments`.
pub fn human_score(judgments: &[PairwiseJudgment]) -> Result<f64> {
    if judgments.is_empty() {
        return Err(Error::EmptyInput("no judgments".into()));
    }
    let count = |o: Outcome| judgments.iter().filter(|j| j.outcome == o).count() as f64;
    Ok(100.0 * (count(Outcome::Win) - count(Outcome::Loss)) / judgments.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TallyRow {
    pub category: String,
    pub improved: usize,
    pub degraded: usize,
}

impl TallyRow {
    /// Rounded share of improvements among changed sentences; `None` when
    /// nothing changed.
    pub fn percent_improved(&self) -> Option<u32> {
        let changed = self.improved + self.degraded;
        (changed > 0).then(|| (100.0 * self.improved as f64 / changed as f64).round() as u32)
    }
}

/// Per-category improved/degraded counts in order of first appearance, plus a
/// final `Total` row. `equal` verdicts only register the category.
pub fn error_tally(annotations: &[AnnotationRecord]) -> Vec<TallyRow> {
    let mut rows: Vec<TallyRow> = Vec::new();
    for a in annotations {
        let idx = match rows.iter().position(|r| r.category == a.category) {
            Some(i) => i,
            None => {
                rows.push(TallyRow {
                    category: a.category.clone(),
                    improved: 0,
                    degraded: 0,
                });
                rows.len() - 1
            }
        };
        match a.verdict {
            Verdict::Improved => rows[idx].improved += 1,
            Verdict::Degraded => rows[idx].degraded += 1,
            Verdict::Equal => {}
        }
    }
    let total = TallyRow {
        category: "Total".into(),
        improved: rows.iter().map(|r| r.improved).sum(),
        degraded: rows.iter().map(|r| r.degraded).sum(),
    };
    rows.push(total);
    rows
}

/// `category<TAB>improved<TAB>degraded<TAB>percent_improved`, percent as `86%` or `-`.
pub fn render_tally(rows: &[TallyRow]) -> String {
    let mut out = String::from("category\timproved\tdegraded\tpercent_improved\n");
    for r in rows {
        let pct = r
            .percent_improved()
            .map_or_else(|| "-".to_string(), |p| format!("{p}%"));
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.category, r.improved, r.degraded, pct));
    }
    out
}
