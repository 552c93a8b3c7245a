//! Ontology-based toxic language detection for Bulgarian text.
//!
//! The crate is organised around an [`Ontology`]: a population of lexicon
//! individuals (normalized words and phrases) annotated with one or more of
//! four base classes, plus derived classes written as boolean class
//! expressions. On top of it sit the sentence [`classifier`], the context
//! filters in [`policy`], corpus tooling in [`corpus`] and the metrics in
//! [`evaluation`].
//!
//! ```
//! use toxicbg::{classifier, lexicon, BaseClass};
//!
//! let entries = lexicon::load_lexicon("печка\ttoxic,nontoxic\n".as_bytes()).unwrap();
//! let onto = lexicon::build_ontology(entries.entries);
//! let result = classifier::classify("Купих нова печка.", &onto);
//! assert!(result.labels.contains(BaseClass::Toxic));
//! assert!(result.labels.contains(BaseClass::NonToxic));
//! ```

pub mod classifier;
pub mod cli;
pub mod corpus;
mod error;
pub mod evaluation;
pub mod lexicon;
pub mod ontology;
pub mod policy;
pub mod textproc;

pub use error::{Error, Result};
pub use ontology::{BaseClass, ClassExpr, ClassSet, DerivedClass, Ontology};
