use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::Sentence;
use crate::error::{Error, Result};
use crate::fmt::real;

/// One n-best entry: its tokens, named features, and the baseline's total score.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub tokens: Sentence,
    pub features: BTreeMap<String, f64>,
    pub base_score: f64,
}

impl Hypothesis {
    pub fn new(tokens: Sentence, features: BTreeMap<String, f64>, base_score: f64) -> Self {
        Hypothesis {
            tokens,
            features,
            base_score,
        }
    }

    /// Value of a feature, 0 when absent.
    pub fn feature(&self, name: &str) -> f64 {
        self.features.get(name).copied().unwrap_or(0.0)
    }
}

/// Hypotheses for one source sentence, in baseline rank order, unique by tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct NBestList {
    sentence_id: usize,
    hypotheses: Vec<Hypothesis>,
}

impl NBestList {
    /// Drops later duplicates of a token sequence. Fails on an empty list.
    pub fn new(sentence_id: usize, hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let mut seen = HashSet::new();
        let hypotheses: Vec<Hypothesis> = hypotheses
            .into_iter()
            .filter(|h| seen.insert(h.tokens.clone()))
            .collect();
        if hypotheses.is_empty() {
            return Err(Error::EmptyInput(format!(
                "n-best list for sentence {sentence_id}"
            )));
        }
        Ok(NBestList {
            sentence_id,
            hypotheses,
        })
    }

    pub fn sentence_id(&self) -> usize {
        self.sentence_id
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub(crate) fn hypotheses_mut(&mut self) -> &mut [Hypothesis] {
        &mut self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The baseline's `m`-best (the first `m` entries).
    pub fn truncated(&self, m: usize) -> NBestList {
        NBestList {
            sentence_id: self.sentence_id,
            hypotheses: self.hypotheses[..m.clamp(1, self.len())].to_vec(),
        }
    }
}

impl AsRef<NBestList> for NBestList {
    fn as_ref(&self) -> &NBestList {
        self
    }
}

fn parse_features(field: &str, line: usize) -> Result<BTreeMap<String, f64>> {
    let mut groups: Vec<(&str, Vec<f64>)> = Vec::new();
    for item in field.split_whitespace() {
        if let Some(name) = item.strip_suffix('=') {
            if name.is_empty() {
                return Err(Error::parse(line, "empty feature name"));
            }
            groups.push((name, Vec::new()));
        } else {
            let value: f64 = item
                .parse()
                .map_err(|_| Error::parse(line, format!("non-numeric feature value {item:?}")))?;
            if !value.is_finite() {
                return Err(Error::parse(line, format!("non-finite feature value {item:?}")));
            }
            match groups.last_mut() {
                Some((_, values)) => values.push(value),
                None => return Err(Error::parse(line, "feature value before any name")),
            }
        }
    }
    let mut features = BTreeMap::new();
    for (name, values) in groups {
        let expanded: Vec<(String, f64)> = match values.len() {
            0 => return Err(Error::parse(line, format!("feature {name:?} has no values"))),
            1 => vec![(name.to_owned(), values[0])],
            _ => values
                .iter()
                .enumerate()
                .map(|(k, &v)| (format!("{name}_{k}"), v))
                .collect(),
        };
        for (name, v) in expanded {
            if features.insert(name.clone(), v).is_some() {
                return Err(Error::parse(line, format!("duplicate feature {name:?}")));
            }
        }
    }
    Ok(features)
}

/// Parses `id ||| tokens ||| name= v1 v2 ... ||| total` lines. Ids must be
/// non-decreasing; lines sharing an id form one list.
pub fn parse_nbest(bytes: &[u8]) -> Result<Vec<NBestList>> {
    let mut lists: Vec<(usize, Vec<Hypothesis>)> = Vec::new();
    for (i, text) in super::utf8_lines(bytes)?.into_iter().enumerate() {
        let line = i + 1;
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split("|||").map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line,
                format!("expected 4 '|||'-separated fields, found {}", fields.len()),
            ));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid sentence id {:?}", fields[0])))?;
        let tokens = Sentence::parse(fields[1]);
        let features = parse_features(fields[2], line)?;
        let base_score: f64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid total score {:?}", fields[3])))?;
        if !base_score.is_finite() {
            return Err(Error::parse(line, "non-finite total score"));
        }
        let hyp = Hypothesis::new(tokens, features, base_score);
        match lists.last_mut() {
            Some((last, hyps)) if *last == id => hyps.push(hyp),
            Some((last, _)) if *last > id => {
                return Err(Error::parse(
                    line,
                    format!("sentence id {id} follows {last}; ids must be non-decreasing"),
                ))
            }
            _ => lists.push((id, vec![hyp])),
        }
    }
    lists
        .into_iter()
        .map(|(id, hyps)| NBestList::new(id, hyps))
        .collect()
}

pub fn read_nbest(path: impl AsRef<Path>) -> Result<Vec<NBestList>> {
    parse_nbest(&super::read_bytes(path.as_ref())?)
}

/// Renders lists with one feature per name, names in lexicographic order.
pub fn render_nbest<L: AsRef<NBestList>>(lists: &[L]) -> String {
    let mut out = String::new();
    for list in lists {
        let list = list.as_ref();
        for h in list.hypotheses() {
            let features: Vec<String> = h
                .features
                .iter()
                .map(|(name, v)| format!("{name}= {}", real(*v)))
                .collect();
            out.push_str(&format!(
                "{} ||| {} ||| {} ||| {}\n",
                list.sentence_id(),
                h.tokens,
                features.join(" "),
                real(h.base_score)
            ));
        }
    }
    out
}
