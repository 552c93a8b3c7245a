//! Annotated lexicon files.
//!
//! The on-disk format is a UTF-8 TSV with one `form<TAB>category,...` entry
//! per line. Lines starting with `#` and blank lines are skipped; LF and CRLF
//! endings are both accepted.
//!
//! Category tokens are `toxic`, `medical`, `nontoxic` and `minority`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::ontology::{BaseClass, ClassSet, Ontology};
use crate::textproc::normalize_form;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub surface_form: String,
    pub categories: ClassSet,
    /// 1-based line of the first occurrence.
    pub source_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadedLexicon {
    pub entries: Vec<LexiconEntry>,
    pub warnings: Vec<Diagnostic>,
}

fn parse_categories(field: &str, line: usize) -> Result<ClassSet> {
    let mut set = ClassSet::EMPTY;
    for token in field.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let class = BaseClass::from_token(token)
            .ok_or_else(|| Error::parse(line, format!("unknown category `{token}`")))?;
        set.insert(class);
    }
    if set.is_empty() {
        return Err(Error::parse(line, "empty category list"));
    }
    Ok(set)
}

/// Reads a lexicon TSV. Duplicate normalized forms are merged by union and
/// reported as warnings; entries keep first-occurrence order.
pub fn load_lexicon<R: BufRead>(input: R) -> Result<LoadedLexicon> {
    let mut loaded = LoadedLexicon::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                lineno,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        let form = normalize_form(fields[0]);
        if form.is_empty() {
            return Err(Error::parse(lineno, "surface form is empty after normalization"));
        }
        let categories = parse_categories(fields[1], lineno)?;
        match seen.get(&form) {
            Some(&at) => {
                let entry = &mut loaded.entries[at];
                entry.categories = entry.categories.union(categories);
                loaded.warnings.push(Diagnostic {
                    line: lineno,
                    message: format!(
                        "duplicate form `{form}` (first seen on line {}), categories merged",
                        entry.source_line
                    ),
                });
            }
            None => {
                seen.insert(form.clone(), loaded.entries.len());
                loaded.entries.push(LexiconEntry {
                    surface_form: form,
                    categories,
                    source_line: lineno,
                });
            }
        }
    }
    Ok(loaded)
}

pub fn load_lexicon_str(input: &str) -> Result<LoadedLexicon> {
    load_lexicon(input.as_bytes())
}

/// Writes entries in the TSV format accepted by [`load_lexicon`].
pub fn write_lexicon<W: Write>(entries: &[LexiconEntry], mut out: W) -> Result<()> {
    for entry in entries {
        let cats: Vec<&str> = entry.categories.iter().map(BaseClass::token).collect();
        writeln!(out, "{}\t{}", entry.surface_form, cats.join(","))?;
    }
    Ok(())
}

pub fn build_ontology(entries: impl IntoIterator<Item = LexiconEntry>) -> Ontology {
    Ontology::from_individuals(entries.into_iter().map(|e| (e.surface_form, e.categories)))
}
