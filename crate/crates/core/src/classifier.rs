//! Ontology-based sentence classifier.
//!
//! A sentence is tokenized, its tokens matched against the ontology
//! individuals, and the memberships of every matched individual are
//! unioned. A sentence with no match is non-toxic. There is no notion of
//! context: a lexicon form under negation still fires.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ontology::{BaseClass, ClassSet, Ontology};
use crate::textproc::{match_phrases, tokenize, MatchSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub labels: ClassSet,
    pub matches: Vec<MatchSpan>,
    pub collapsed: Option<BaseClass>,
}

/// Order in which [`collapse`] picks a single label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Priority([BaseClass; 4]);

impl Default for Priority {
    fn default() -> Self {
        Priority([
            BaseClass::Toxic,
            BaseClass::MedicalTerminology,
            BaseClass::MinorityGroup,
            BaseClass::NonToxic,
        ])
    }
}

impl Priority {
    /// Fails unless `order` is a permutation of the four base classes.
    pub fn new(order: [BaseClass; 4]) -> Result<Self> {
        let set: ClassSet = order.iter().copied().collect();
        if set.len() != 4 {
            return Err(Error::InvalidPriority(format!(
                "{order:?} is not a permutation of the base classes"
            )));
        }
        Ok(Priority(order))
    }

    pub fn order(&self) -> &[BaseClass; 4] {
        &self.0
    }
}

/// Parses a comma-separated list of category tokens, e.g.
/// `toxic,minority,medical,nontoxic`.
impl FromStr for Priority {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let classes = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                BaseClass::from_token(t)
                    .or_else(|| BaseClass::from_name(t))
                    .ok_or_else(|| Error::InvalidPriority(format!("unknown class `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let order: [BaseClass; 4] = classes
            .try_into()
            .map_err(|v: Vec<_>| Error::InvalidPriority(format!("expected 4 classes, got {}", v.len())))?;
        Priority::new(order)
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tokens: Vec<&str> = self.0.iter().map(|c| c.token()).collect();
        f.write_str(&tokens.join(","))
    }
}

pub fn classify(sentence: &str, onto: &Ontology) -> Classification {
    let tokens = tokenize(sentence);
    let matches = match_phrases(&tokens, onto);
    let mut labels = matches
        .iter()
        .filter_map(|m| onto.memberships(&m.matched_form))
        .fold(ClassSet::EMPTY, ClassSet::union);
    if labels.is_empty() {
        labels.insert(BaseClass::NonToxic);
    }
    Classification {
        labels,
        matches,
        collapsed: None,
    }
}

/// Highest-priority class present in the labels.
pub fn collapse(c: &Classification, priority: &Priority) -> BaseClass {
    priority
        .0
        .iter()
        .copied()
        .find(|class| c.labels.contains(*class))
        .unwrap_or(BaseClass::NonToxic)
}

impl Classification {
    pub fn collapsed_with(mut self, priority: &Priority) -> Self {
        self.collapsed = Some(collapse(&self, priority));
        self
    }

    pub fn to_record(&self, text: &str) -> ClassificationRecord {
        ClassificationRecord {
            text: text.to_string(),
            labels: self.labels.iter().collect(),
            collapsed: self.collapsed,
            matches: self.matches.clone(),
        }
    }
}

/// Classifies every sentence, optionally collapsing each result. Runs in
/// parallel; output order matches input order.
pub fn classify_batch<S>(sentences: &[S], onto: &Ontology, priority: Option<&Priority>) -> Vec<Classification>
where
    S: AsRef<str> + Sync,
{
    sentences
        .par_iter()
        .map(|s| {
            let c = classify(s.as_ref(), onto);
            match priority {
                Some(p) => c.collapsed_with(p),
                None => c,
            }
        })
        .collect()
}

/// JSON shape of a classification result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationRecord {
    pub text: String,
    pub labels: Vec<BaseClass>,
    pub collapsed: Option<BaseClass>,
    pub matches: Vec<MatchSpan>,
}
