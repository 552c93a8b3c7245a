//! Sentence corpora: JSONL I/O, automatic pre-annotation, stratified
//! splitting and distribution statistics.
//!
//! Each corpus line is `{"text": str, "label": str?, "source": str?}` with
//! labels drawn from the lexicon category tokens.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify, collapse, Priority};
use crate::error::{Error, Result};
use crate::evaluation::{label_distribution, LabelShare};
use crate::ontology::{BaseClass, Ontology};
use crate::textproc::{identify_language, Language};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<BaseClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl AnnotatedSentence {
    pub fn new(text: impl Into<String>, label: Option<BaseClass>) -> Self {
        AnnotatedSentence {
            text: text.into(),
            label,
            source: None,
        }
    }
}

pub fn load_corpus<R: BufRead>(input: R) -> Result<Vec<AnnotatedSentence>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sentence: AnnotatedSentence =
            serde_json::from_str(&line).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        if sentence.text.trim().is_empty() {
            return Err(Error::parse(idx + 1, "empty sentence text"));
        }
        out.push(sentence);
    }
    Ok(out)
}

pub fn write_corpus<W: Write>(corpus: &[AnnotatedSentence], mut out: W) -> Result<()> {
    for sentence in corpus {
        serde_json::to_writer(&mut out, sentence)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotationSummary {
    pub total: usize,
    /// Sentences whose label is anything but NonToxic.
    pub non_nontoxic: usize,
    pub by_label: BTreeMap<String, usize>,
}

impl AnnotationSummary {
    fn from_labels(labels: impl Iterator<Item = BaseClass>) -> Self {
        let mut by_label: BTreeMap<String, usize> =
            BaseClass::ALL.iter().map(|c| (c.token().to_string(), 0)).collect();
        let mut total = 0;
        let mut non_nontoxic = 0;
        for label in labels {
            total += 1;
            if label != BaseClass::NonToxic {
                non_nontoxic += 1;
            }
            *by_label.get_mut(label.token()).unwrap() += 1;
        }
        AnnotationSummary {
            total,
            non_nontoxic,
            by_label,
        }
    }
}

/// Labels every sentence with the collapsed classifier output, replacing any
/// existing label.
pub fn auto_annotate(
    corpus: &[AnnotatedSentence],
    onto: &Ontology,
    priority: &Priority,
) -> (Vec<AnnotatedSentence>, AnnotationSummary) {
    let annotated: Vec<AnnotatedSentence> = corpus
        .par_iter()
        .map(|s| {
            let label = collapse(&classify(&s.text, onto), priority);
            AnnotatedSentence {
                label: Some(label),
                ..s.clone()
            }
        })
        .collect();
    let summary = AnnotationSummary::from_labels(annotated.iter().filter_map(|s| s.label));
    (annotated, summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<AnnotatedSentence>,
    pub test: Vec<AnnotatedSentence>,
    /// Labels present in the corpus but rounded out of the test set.
    pub warnings: Vec<String>,
}

/// Per label, `round(count × test_fraction)` sentences go to the test set,
/// chosen by a seeded shuffle of that label's stratum. Both halves keep the
/// corpus order.
pub fn stratified_split(corpus: &[AnnotatedSentence], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let mut strata: [Vec<usize>; 4] = Default::default();
    for (i, s) in corpus.iter().enumerate() {
        let label = s.label.ok_or(Error::Unlabeled { index: i })?;
        strata[label.index()].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; corpus.len()];
    let mut warnings = Vec::new();
    for (class, stratum) in BaseClass::ALL.iter().zip(strata.iter_mut()) {
        if stratum.is_empty() {
            continue;
        }
        let take = (stratum.len() as f64 * test_fraction).round() as usize;
        if take == 0 {
            warnings.push(format!(
                "label `{}` ({} sentences) has no test items at fraction {test_fraction}",
                class.token(),
                stratum.len()
            ));
        }
        stratum.shuffle(&mut rng);
        for &i in &stratum[..take] {
            in_test[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (s, to_test) in corpus.iter().zip(in_test) {
        if to_test {
            test.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    Ok(Split {
        train,
        test,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageShare {
    pub language: Language,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total: usize,
    pub unlabeled: usize,
    /// Distribution over the labeled sentences.
    pub labels: Vec<LabelShare>,
    /// Languages that occur at least once, fractions of `total`.
    pub languages: Vec<LanguageShare>,
}

pub fn corpus_stats(corpus: &[AnnotatedSentence]) -> CorpusStats {
    let labels: Vec<BaseClass> = corpus.iter().filter_map(|s| s.label).collect();
    let mut langs: BTreeMap<Language, usize> = BTreeMap::new();
    for s in corpus {
        *langs.entry(identify_language(&s.text)).or_default() += 1;
    }
    CorpusStats {
        total: corpus.len(),
        unlabeled: corpus.len() - labels.len(),
        labels: label_distribution(&labels),
        languages: langs
            .into_iter()
            .map(|(language, count)| LanguageShare {
                language,
                count,
                fraction: count as f64 / corpus.len() as f64,
            })
            .collect(),
    }
}
