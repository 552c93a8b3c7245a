//! Class universe, class expressions and the individual population.
//!
//! The four base classes are atoms of a propositional algebra, so every
//! derived class (and every context policy) is decided by evaluating a
//! boolean expression over an individual's membership set. There are only
//! sixteen membership sets, which makes the whole algebra exhaustively
//! checkable.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc;

/// One of the four annotation categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseClass {
    Toxic,
    MedicalTerminology,
    NonToxic,
    MinorityGroup,
}

impl BaseClass {
    /// Canonical order, also the row/column order of every 4×4 matrix.
    pub const ALL: [BaseClass; 4] = [
        BaseClass::Toxic,
        BaseClass::MedicalTerminology,
        BaseClass::NonToxic,
        BaseClass::MinorityGroup,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Lowercase token used in lexicon, corpus and classification files.
    pub fn token(self) -> &'static str {
        match self {
            BaseClass::Toxic => "toxic",
            BaseClass::MedicalTerminology => "medical",
            BaseClass::NonToxic => "nontoxic",
            BaseClass::MinorityGroup => "minority",
        }
    }

    /// Class identifier used in ontology exports and policy expressions.
    pub fn name(self) -> &'static str {
        match self {
            BaseClass::Toxic => "Toxic",
            BaseClass::MedicalTerminology => "MedicalTerminology",
            BaseClass::NonToxic => "NonToxic",
            BaseClass::MinorityGroup => "MinorityGroup",
        }
    }

    pub fn from_token(token: &str) -> Option<BaseClass> {
        BaseClass::ALL.into_iter().find(|c| c.token() == token)
    }

    /// Case-insensitive lookup of a class identifier.
    pub fn from_name(name: &str) -> Option<BaseClass> {
        BaseClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for BaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for BaseClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for BaseClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let token = String::deserialize(d)?;
        BaseClass::from_token(&token)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown label `{token}`")))
    }
}

/// A set of base classes packed into the low four bits of a byte.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ClassSet(u8);

impl ClassSet {
    pub const EMPTY: ClassSet = ClassSet(0);

    pub fn from_bits(bits: u8) -> ClassSet {
        ClassSet(bits & 0b1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// All sixteen membership sets, in bit order.
    pub fn all_combinations() -> impl Iterator<Item = ClassSet> {
        (0u8..16).map(ClassSet)
    }

    pub fn insert(&mut self, class: BaseClass) {
        self.0 |= 1 << class.index();
    }

    pub fn contains(self, class: BaseClass) -> bool {
        self.0 & (1 << class.index()) != 0
    }

    pub fn union(self, other: ClassSet) -> ClassSet {
        ClassSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = BaseClass> {
        BaseClass::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<BaseClass> for ClassSet {
    fn from_iter<I: IntoIterator<Item = BaseClass>>(iter: I) -> Self {
        let mut set = ClassSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Debug for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ClassSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ClassSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Vec::<BaseClass>::deserialize(d)?.into_iter().collect())
    }
}

/// Boolean class expression over the base classes.
///
/// `And` and `Or` always carry at least two children; use [`ClassExpr::and`]
/// and [`ClassExpr::or`] to build them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassExpr {
    Base(BaseClass),
    And(Vec<ClassExpr>),
    Or(Vec<ClassExpr>),
    Not(Box<ClassExpr>),
}

impl ClassExpr {
    /// Conjunction. Nested conjunctions are flattened and a single operand is
    /// returned unchanged.
    ///
    /// Panics on an empty operand list.
    pub fn and(children: impl IntoIterator<Item = ClassExpr>) -> ClassExpr {
        Self::nary(children, true)
    }

    /// Disjunction, same normalisation as [`ClassExpr::and`].
    pub fn or(children: impl IntoIterator<Item = ClassExpr>) -> ClassExpr {
        Self::nary(children, false)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: ClassExpr) -> ClassExpr {
        ClassExpr::Not(Box::new(child))
    }

    fn nary(children: impl IntoIterator<Item = ClassExpr>, conjunction: bool) -> ClassExpr {
        let mut flat = Vec::new();
        for child in children {
            match child {
                ClassExpr::And(inner) if conjunction => flat.extend(inner),
                ClassExpr::Or(inner) if !conjunction => flat.extend(inner),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "class expression needs at least one operand");
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if conjunction {
            ClassExpr::And(flat)
        } else {
            ClassExpr::Or(flat)
        }
    }

    pub fn eval(&self, memberships: ClassSet) -> bool {
        match self {
            ClassExpr::Base(c) => memberships.contains(*c),
            ClassExpr::And(children) => children.iter().all(|e| e.eval(memberships)),
            ClassExpr::Or(children) => children.iter().any(|e| e.eval(memberships)),
            ClassExpr::Not(child) => !child.eval(memberships),
        }
    }

    /// Truth table over all sixteen membership sets, bit `i` set iff the
    /// expression holds for `ClassSet::from_bits(i)`.
    pub fn truth_table(&self) -> u16 {
        ClassSet::all_combinations()
            .filter(|m| self.eval(*m))
            .fold(0u16, |acc, m| acc | (1 << m.bits()))
    }

    /// Both expressions denote the same class.
    pub fn equivalent(&self, other: &ClassExpr) -> bool {
        self.truth_table() == other.truth_table()
    }

    fn precedence(&self) -> u8 {
        match self {
            ClassExpr::Or(_) => 0,
            ClassExpr::And(_) => 1,
            ClassExpr::Not(_) | ClassExpr::Base(_) => 2,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_precedence: u8) -> fmt::Result {
        let parens = self.precedence() < min_precedence;
        if parens {
            f.write_str("(")?;
        }
        match self {
            ClassExpr::Base(c) => f.write_str(c.name())?,
            ClassExpr::Not(child) => {
                f.write_str("NOT ")?;
                child.fmt_at(f, 2)?;
            }
            ClassExpr::And(children) | ClassExpr::Or(children) => {
                let (sep, level) = if matches!(self, ClassExpr::And(_)) {
                    (" AND ", 2)
                } else {
                    (" OR ", 1)
                };
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    child.fmt_at(f, level)?;
                }
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Renders in the policy expression grammar, e.g. `Toxic AND NOT NonToxic`.
impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl From<BaseClass> for ClassExpr {
    fn from(c: BaseClass) -> Self {
        ClassExpr::Base(c)
    }
}

pub const AMBIGUOUS: &str = "Ambiguous";
pub const FAMILY_FRIENDLY_BLOCKED: &str = "FamilyFriendlyContentBlocked";
pub const FORUM_BLOCKED: &str = "ForumContentBlocked";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedClass {
    pub name: String,
    pub definition: ClassExpr,
}

impl DerivedClass {
    pub fn new(name: impl Into<String>, definition: ClassExpr) -> Self {
        DerivedClass {
            name: name.into(),
            definition,
        }
    }

    /// Words holding both a toxic and a non-toxic meaning.
    pub fn ambiguous() -> Self {
        use BaseClass::*;
        DerivedClass::new(AMBIGUOUS, ClassExpr::and([Toxic.into(), NonToxic.into()]))
    }

    /// Everything but words with at least one strictly non-toxic meaning.
    pub fn family_friendly_blocked() -> Self {
        use BaseClass::*;
        DerivedClass::new(
            FAMILY_FRIENDLY_BLOCKED,
            ClassExpr::and([
                ClassExpr::or([Toxic.into(), MedicalTerminology.into(), MinorityGroup.into()]),
                ClassExpr::not(NonToxic.into()),
            ]),
        )
    }

    /// Strictly toxic words: toxic and a member of no other class.
    pub fn forum_blocked() -> Self {
        use BaseClass::*;
        DerivedClass::new(
            FORUM_BLOCKED,
            ClassExpr::and([
                Toxic.into(),
                ClassExpr::not(NonToxic.into()),
                ClassExpr::not(MedicalTerminology.into()),
                ClassExpr::not(MinorityGroup.into()),
            ]),
        )
    }

    pub fn builtins() -> Vec<DerivedClass> {
        vec![
            DerivedClass::ambiguous(),
            DerivedClass::family_friendly_blocked(),
            DerivedClass::forum_blocked(),
        ]
    }

    pub fn is_builtin_name(name: &str) -> bool {
        [AMBIGUOUS, FAMILY_FRIENDLY_BLOCKED, FORUM_BLOCKED].contains(&name)
    }
}

/// Per-class individual count with its share of the population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassCount {
    pub class: BaseClass,
    pub count: usize,
    /// Percentage of all individuals, 0 for an empty ontology.
    pub percent: f64,
}

/// Individuals (normalized surface forms with their memberships) plus the
/// derived classes defined over them. Immutable once built.
#[derive(Debug, Clone)]
pub struct Ontology {
    individuals: HashMap<String, ClassSet>,
    derived: Vec<DerivedClass>,
    max_phrase_tokens: usize,
}

impl Default for Ontology {
    fn default() -> Self {
        Ontology {
            individuals: HashMap::new(),
            derived: DerivedClass::builtins(),
            max_phrase_tokens: 0,
        }
    }
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the population from `(form, memberships)` pairs. Forms are
    /// normalized; repeated forms merge by union. Forms that normalize to
    /// nothing and empty membership sets are skipped.
    pub fn from_individuals<S: AsRef<str>>(items: impl IntoIterator<Item = (S, ClassSet)>) -> Self {
        let mut onto = Ontology::default();
        for (form, classes) in items {
            let form = textproc::normalize_form(form.as_ref());
            if form.is_empty() || classes.is_empty() {
                continue;
            }
            let tokens = form.split(' ').count();
            onto.max_phrase_tokens = onto.max_phrase_tokens.max(tokens);
            let slot = onto.individuals.entry(form).or_default();
            *slot = slot.union(classes);
        }
        onto
    }

    /// Registers a user-defined derived class. Names must be unique and may
    /// not shadow a built-in.
    pub fn with_derived(mut self, class: DerivedClass) -> Result<Self> {
        if self.derived.iter().any(|d| d.name == class.name) {
            return Err(Error::DuplicateDerived(class.name));
        }
        self.derived.push(class);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Memberships of an already-normalized form.
    pub fn memberships(&self, form: &str) -> Option<ClassSet> {
        self.individuals.get(form).copied()
    }

    pub fn individuals(&self) -> impl Iterator<Item = (&str, ClassSet)> {
        self.individuals.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Token count of the longest individual.
    pub fn max_phrase_tokens(&self) -> usize {
        self.max_phrase_tokens
    }

    pub fn derived(&self) -> &[DerivedClass] {
        &self.derived
    }

    pub fn derived_class(&self, name: &str) -> Result<&DerivedClass> {
        self.derived
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::NotFound(name.to_string()))
    }

    /// Individuals belonging to the named derived class.
    pub fn derived_members(&self, name: &str) -> Result<BTreeSet<String>> {
        let class = self.derived_class(name)?;
        Ok(self.members_of(&class.definition))
    }

    pub fn members_of(&self, expr: &ClassExpr) -> BTreeSet<String> {
        self.individuals
            .iter()
            .filter(|(_, m)| expr.eval(**m))
            .map(|(form, _)| form.clone())
            .collect()
    }

    /// `matrix[i][j]` counts individuals in both class `i` and class `j`,
    /// indexed in [`BaseClass::ALL`] order.
    pub fn cooccurrence_matrix(&self) -> [[usize; 4]; 4] {
        let mut matrix = [[0usize; 4]; 4];
        for classes in self.individuals.values() {
            for a in classes.iter() {
                for b in classes.iter() {
                    matrix[a.index()][b.index()] += 1;
                }
            }
        }
        matrix
    }

    pub fn class_counts(&self) -> Vec<ClassCount> {
        let total = self.len();
        let matrix = self.cooccurrence_matrix();
        BaseClass::ALL
            .into_iter()
            .map(|class| {
                let count = matrix[class.index()][class.index()];
                let percent = if total == 0 {
                    0.0
                } else {
                    100.0 * count as f64 / total as f64
                };
                ClassCount {
                    class,
                    count,
                    percent,
                }
            })
            .collect()
    }

    /// Forms lacking a Toxic membership. The published lexicon annotates
    /// every word as potentially toxic, so any hit here is a data issue
    /// worth reporting rather than an error.
    pub fn non_toxic_only(&self) -> Vec<String> {
        let mut forms: Vec<String> = self
            .individuals
            .iter()
            .filter(|(_, m)| !m.contains(BaseClass::Toxic))
            .map(|(f, _)| f.clone())
            .collect();
        forms.sort();
        forms
    }

    pub fn to_export(&self) -> OntologyExport {
        let mut individuals: Vec<IndividualRecord> = self
            .individuals
            .iter()
            .map(|(form, classes)| IndividualRecord {
                form: form.clone(),
                classes: classes.iter().map(|c| c.name().to_string()).collect(),
            })
            .collect();
        individuals.sort_by(|a, b| a.form.cmp(&b.form));
        OntologyExport {
            individuals,
            derived: self
                .derived
                .iter()
                .map(|d| DerivedRecord {
                    name: d.name.clone(),
                    expr: d.definition.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_export()).expect("ontology export is serializable")
    }

    /// Rebuilds an ontology from its JSON export. Built-in derived classes
    /// in the export are checked against their definitions and otherwise
    /// skipped.
    pub fn from_json(json: &str) -> Result<Self> {
        let export: OntologyExport = serde_json::from_str(json)?;
        let mut individuals = Vec::with_capacity(export.individuals.len());
        for record in export.individuals {
            let classes = record
                .classes
                .iter()
                .map(|name| BaseClass::from_name(name).ok_or_else(|| Error::UnknownClass(name.clone())))
                .collect::<Result<ClassSet>>()?;
            individuals.push((record.form, classes));
        }
        let mut onto = Ontology::from_individuals(individuals);
        for record in export.derived {
            let expr = crate::policy::parse_policy_expr(&record.expr)?;
            if DerivedClass::is_builtin_name(&record.name) {
                let builtin = onto.derived_class(&record.name)?;
                if !builtin.definition.equivalent(&expr) {
                    return Err(Error::DuplicateDerived(record.name));
                }
                continue;
            }
            onto = onto.with_derived(DerivedClass::new(record.name, expr))?;
        }
        Ok(onto)
    }
}

impl FromStr for Ontology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ontology::from_json(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyExport {
    pub individuals: Vec<IndividualRecord>,
    pub derived: Vec<DerivedRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualRecord {
    pub form: String,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedRecord {
    pub name: String,
    pub expr: String,
}

/// Free-function form of [`ClassExpr::eval`].
pub fn eval_expr(expr: &ClassExpr, memberships: ClassSet) -> bool {
    expr.eval(memberships)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BaseClass::*;

    fn set(classes: &[BaseClass]) -> ClassSet {
        classes.iter().copied().collect()
    }

    fn fixture() -> Ontology {
        Ontology::from_individuals([
            ("печка", set(&[Toxic, NonToxic])),
            ("седалище", set(&[NonToxic, MedicalTerminology])),
            ("badword", set(&[Toxic])),
            ("medword", set(&[Toxic, MedicalTerminology])),
            ("slurword", set(&[Toxic, MinorityGroup])),
        ])
    }

    #[test]
    fn builtin_examples() {
        let ambiguous = DerivedClass::ambiguous().definition;
        let forum = DerivedClass::forum_blocked().definition;
        let family = DerivedClass::family_friendly_blocked().definition;
        assert!(ambiguous.eval(set(&[Toxic, NonToxic])));
        assert!(forum.eval(set(&[Toxic])));
        assert!(!forum.eval(set(&[Toxic, MedicalTerminology])));
        assert!(!family.eval(set(&[Toxic, NonToxic])));
    }

    #[test]
    fn forum_blocked_implies_family_blocked() {
        let forum = DerivedClass::forum_blocked().definition;
        let family = DerivedClass::family_friendly_blocked().definition;
        for m in ClassSet::all_combinations() {
            assert!(!forum.eval(m) || family.eval(m), "{m:?}");
        }
    }

    #[test]
    fn ambiguous_is_toxic_and_nontoxic() {
        let ambiguous = DerivedClass::ambiguous().definition;
        for m in ClassSet::all_combinations() {
            assert_eq!(ambiguous.eval(m), m.contains(Toxic) && m.contains(NonToxic));
        }
    }

    #[test]
    fn de_morgan() {
        for a in BaseClass::ALL {
            for b in BaseClass::ALL {
                let lhs = ClassExpr::not(ClassExpr::and([a.into(), b.into()]));
                let rhs = ClassExpr::or([ClassExpr::not(a.into()), ClassExpr::not(b.into())]);
                for m in ClassSet::all_combinations() {
                    assert_eq!(lhs.eval(m), rhs.eval(m));
                }
            }
        }
    }

    #[test]
    fn derived_members_on_fixture() {
        let onto = fixture();
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(onto.derived_members(FORUM_BLOCKED).unwrap(), names(&["badword"]));
        assert_eq!(
            onto.derived_members(FAMILY_FRIENDLY_BLOCKED).unwrap(),
            names(&["badword", "medword", "slurword"])
        );
        assert_eq!(onto.derived_members(AMBIGUOUS).unwrap(), names(&["печка"]));
        assert!(matches!(onto.derived_members("Nope"), Err(Error::NotFound(_))));
    }

    #[test]
    fn empty_ontology() {
        let onto = Ontology::new();
        for d in DerivedClass::builtins() {
            assert!(onto.derived_members(&d.name).unwrap().is_empty());
        }
        assert_eq!(onto.cooccurrence_matrix(), [[0; 4]; 4]);
        assert!(onto.class_counts().iter().all(|c| c.count == 0 && c.percent == 0.0));
    }

    #[test]
    fn fixture_cooccurrence() {
        // Hand count over the five fixture entries.
        assert_eq!(
            fixture().cooccurrence_matrix(),
            [[4, 1, 1, 1], [1, 2, 1, 0], [1, 1, 2, 0], [1, 0, 0, 1]]
        );
        let counts: Vec<_> = fixture().class_counts().iter().map(|c| (c.count, c.percent)).collect();
        assert_eq!(counts, vec![(4, 80.0), (2, 40.0), (2, 40.0), (1, 20.0)]);
    }

    #[test]
    fn builtin_names_cannot_be_shadowed() {
        let err = fixture()
            .with_derived(DerivedClass::new(AMBIGUOUS, Toxic.into()))
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateDerived(_)));
        let onto = fixture()
            .with_derived(DerivedClass::new("MedicalOnly", MedicalTerminology.into()))
            .unwrap();
        assert_eq!(onto.derived_members("MedicalOnly").unwrap().len(), 2);
    }

    #[test]
    fn display_uses_policy_grammar() {
        assert_eq!(
            DerivedClass::family_friendly_blocked().definition.to_string(),
            "(Toxic OR MedicalTerminology OR MinorityGroup) AND NOT NonToxic"
        );
        assert_eq!(
            ClassExpr::not(ClassExpr::or([Toxic.into(), NonToxic.into()])).to_string(),
            "NOT (Toxic OR NonToxic)"
        );
    }

    #[test]
    fn json_export_round_trip() {
        let onto = fixture()
            .with_derived(DerivedClass::new("MedicalOnly", MedicalTerminology.into()))
            .unwrap();
        let json = onto.to_json();
        assert!(json.contains("\"MedicalTerminology\""));
        let back = Ontology::from_json(&json).unwrap();
        assert_eq!(back.to_export(), onto.to_export());
    }

    #[test]
    fn non_toxic_individuals_are_allowed_but_reported() {
        assert_eq!(fixture().non_toxic_only(), vec!["седалище".to_string()]);
        let onto = Ontology::from_individuals([("badword", set(&[Toxic])), ("стол", set(&[NonToxic]))]);
        assert_eq!(onto.non_toxic_only(), vec!["стол".to_string()]);
    }
}
