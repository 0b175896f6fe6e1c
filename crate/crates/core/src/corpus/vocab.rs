use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::error::{Error, Result};

pub const UNKNOWN_ID: usize = 0;
pub const START_ID: usize = 1;
pub const END_ID: usize = 2;

const RESERVED: [&str; 3] = ["<unk>", "<s>", "</s>"];

/// Token/id mapping with three reserved ids (unknown, start, end).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    token_of: Vec<String>,
    id_of: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from a list of regular tokens, assigning ids in order
    /// after the reserved ones.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut token_of: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut id_of: HashMap<String, usize> = token_of
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        for t in tokens {
            let t = t.into();
            if id_of.contains_key(&t) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
            id_of.insert(t.clone(), token_of.len());
            token_of.push(t);
        }
        Ok(Vocabulary { token_of, id_of })
    }

    /// Tokens occurring at least `min_count` times get ids, ordered by
    /// descending frequency and then lexicographically.
    pub fn build(corpus: &[Sentence], min_count: usize) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be at least 1".into()));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in corpus {
            for t in s.iter() {
                if !RESERVED.contains(&t.as_str()) {
                    *counts.entry(t).or_default() += 1;
                }
            }
        }
        let mut kept: Vec<(&str, usize)> =
            counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Self::from_tokens(kept.into_iter().map(|(t, _)| t))
    }

    /// Id of `token`, or [`UNKNOWN_ID`] when out of vocabulary.
    pub fn id(&self, token: &str) -> usize {
        self.id_of.get(token).copied().unwrap_or(UNKNOWN_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.token_of.get(id).map(String::as_str)
    }

    pub fn ids(&self, sentence: &Sentence) -> Vec<usize> {
        sentence.iter().map(|t| self.id(t)).collect()
    }

    /// Total number of ids, reserved ones included.
    pub fn len(&self) -> usize {
        self.token_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_of.len() == RESERVED.len()
    }

    /// Regular tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.token_of[RESERVED.len()..]
    }
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(repr: VocabularyRepr) -> Result<Self> {
        Vocabulary::from_tokens(repr.tokens)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens().to_vec(),
        }
    }
}
