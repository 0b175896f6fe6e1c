use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Improved,
    Degraded,
    Equal,
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "improved" => Ok(Verdict::Improved),
            "degraded" => Ok(Verdict::Degraded),
            "equal" => Ok(Verdict::Equal),
            other => Err(format!("unknown verdict {other:?}")),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Improved => "improved",
            Verdict::Degraded => "degraded",
            Verdict::Equal => "equal",
        })
    }
}

/// A manual comparison of baseline and reranked output for one sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub sentence_id: usize,
    pub verdict: Verdict,
    pub category: String,
}

/// Outcome of the system against the baseline on one sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Win,
    Loss,
    Tie,
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "win" => Ok(Outcome::Win),
            "loss" => Ok(Outcome::Loss),
            "tie" => Ok(Outcome::Tie),
            other => Err(format!("unknown outcome {other:?}")),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Win => "win",
            Outcome::Loss => "loss",
            Outcome::Tie => "tie",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseJudgment {
    pub sentence_id: usize,
    pub outcome: Outcome,
}

pub type Judgment = PairwiseJudgment;

fn tab_fields(bytes: &[u8], arity: usize) -> Result<Vec<(usize, Vec<&str>)>> {
    let mut rows = Vec::new();
    for (i, text) in super::utf8_lines(bytes)?.into_iter().enumerate() {
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.splitn(arity, '\t').map(str::trim).collect();
        if fields.len() != arity || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::parse(i + 1, format!("expected {arity} tab-separated fields")));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

fn sentence_id(field: &str, line: usize) -> Result<usize> {
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid sentence id {field:?}")))
}

/// `sentence_id<TAB>verdict<TAB>category` lines.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    parse_annotations(&super::read_bytes(path.as_ref())?)
}

pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<AnnotationRecord>> {
    tab_fields(bytes, 3)?
        .into_iter()
        .map(|(line, f)| {
            Ok(AnnotationRecord {
                sentence_id: sentence_id(f[0], line)?,
                verdict: f[1].parse().map_err(|m| Error::parse(line, m))?,
                category: f[2].to_owned(),
            })
        })
        .collect()
}

pub fn render_annotations(records: &[AnnotationRecord]) -> String {
    records
        .iter()
        .map(|r| format!("{}\t{}\t{}\n", r.sentence_id, r.verdict, r.category))
        .collect()
}

/// `sentence_id<TAB>outcome` lines, outcome one of `win`, `loss`, `tie`.
pub fn read_judgments(path: impl AsRef<Path>) -> Result<Vec<PairwiseJudgment>> {
    parse_judgments(&super::read_bytes(path.as_ref())?)
}

pub fn parse_judgments(bytes: &[u8]) -> Result<Vec<PairwiseJudgment>> {
    tab_fields(bytes, 2)?
        .into_iter()
        .map(|(line, f)| {
            Ok(PairwiseJudgment {
                sentence_id: sentence_id(f[0], line)?,
                outcome: f[1].parse().map_err(|m| Error::parse(line, m))?,
            })
        })
        .collect()
}

pub fn render_judgments(judgments: &[PairwiseJudgment]) -> String {
    judgments
        .iter()
        .map(|j| format!("{}\t{}\n", j.sentence_id, j.outcome))
        .collect()
}
