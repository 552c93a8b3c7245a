//! Context filters.
//!
//! A context policy names a class expression describing the words it
//! blocks. A sentence is blocked when any matched lexicon form satisfies
//! that expression. Two contexts are built in:
//!
//! * `forum` blocks only strictly toxic words. Note that toxic words which
//!   are also minority-group terms are *not* blocked here.
//! * `family-friendly` blocks every lexicon word except those with at
//!   least one strictly non-toxic meaning.
//!
//! Custom policies use a small expression language:
//!
//! ```text
//! expr   := term ('OR' term)*
//! term   := factor ('AND' factor)*
//! factor := 'NOT' factor | '(' expr ')' | class-name
//! ```
//!
//! Keywords and class names (`Toxic`, `MedicalTerminology`, `NonToxic`,
//! `MinorityGroup`) are case-insensitive.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{BaseClass, ClassExpr, DerivedClass, Ontology};
use crate::textproc::{match_phrases, tokenize};

pub const FORUM: &str = "forum";
pub const FAMILY_FRIENDLY: &str = "family-friendly";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextPolicy {
    pub name: String,
    pub blocked_expr: ClassExpr,
}

impl ContextPolicy {
    pub fn new(name: impl Into<String>, blocked_expr: ClassExpr) -> Self {
        ContextPolicy {
            name: name.into(),
            blocked_expr,
        }
    }

    pub fn forum() -> Self {
        ContextPolicy::new(FORUM, DerivedClass::forum_blocked().definition)
    }

    pub fn family_friendly() -> Self {
        ContextPolicy::new(FAMILY_FRIENDLY, DerivedClass::family_friendly_blocked().definition)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            FORUM => Some(Self::forum()),
            FAMILY_FRIENDLY => Some(Self::family_friendly()),
            _ => None,
        }
    }

    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self> {
        Ok(ContextPolicy::new(name, parse_policy_expr(source)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterDecision {
    pub blocked: bool,
    pub triggering_forms: Vec<String>,
}

/// Blocks the sentence iff at least one matched form satisfies the policy.
pub fn filter_text(sentence: &str, policy: &ContextPolicy, onto: &Ontology) -> FilterDecision {
    let tokens = tokenize(sentence);
    let triggering_forms: Vec<String> = match_phrases(&tokens, onto)
        .into_iter()
        .filter(|m| {
            onto.memberships(&m.matched_form)
                .is_some_and(|classes| policy.blocked_expr.eval(classes))
        })
        .map(|m| m.matched_form)
        .collect();
    FilterDecision {
        blocked: !triggering_forms.is_empty(),
        triggering_forms,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PolicyRecord {
    name: String,
    expr: String,
}

/// Reads a JSON array of `{"name": ..., "expr": ...}` objects. Names must be
/// unique and may not reuse a built-in context name.
pub fn load_policies<R: Read>(input: R) -> Result<Vec<ContextPolicy>> {
    let records: Vec<PolicyRecord> = serde_json::from_reader(input)?;
    let mut policies: Vec<ContextPolicy> = Vec::with_capacity(records.len());
    for record in records {
        if ContextPolicy::builtin(&record.name).is_some() {
            return Err(Error::BuiltinPolicy(record.name));
        }
        if policies.iter().any(|p| p.name == record.name) {
            return Err(Error::DuplicateDerived(record.name));
        }
        policies.push(ContextPolicy::parse(record.name, &record.expr)?);
    }
    Ok(policies)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    And,
    Or,
    Not,
    Open,
    Close,
    Ident(String),
}

/// Tokens paired with their char offset in the source.
fn lex(source: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::Open));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::Close));
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.to_ascii_uppercase().as_str() {
                "AND" => Tok::And,
                "OR" => Tok::Or,
                "NOT" => Tok::Not,
                _ => Tok::Ident(word),
            };
            out.push((start, tok));
        } else {
            return Err(Error::Syntax {
                position: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<ClassExpr> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(ClassExpr::or(terms))
    }

    fn term(&mut self) -> Result<ClassExpr> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(ClassExpr::and(factors))
    }

    fn factor(&mut self) -> Result<ClassExpr> {
        let Some((at, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error("unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Tok::Not => Ok(ClassExpr::not(self.factor()?)),
            Tok::Open => {
                let inner = match self.expr() {
                    Ok(e) => e,
                    Err(Error::Syntax { position, .. }) if position == self.end => {
                        return Err(Error::Syntax {
                            position: at,
                            message: "unclosed `(`".into(),
                        });
                    }
                    Err(e) => return Err(e),
                };
                if self.peek() != Some(&Tok::Close) {
                    return Err(Error::Syntax {
                        position: at,
                        message: "unclosed `(`".into(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Ident(name) => BaseClass::from_name(&name)
                .map(ClassExpr::Base)
                .ok_or(Error::UnknownClass(name)),
            other => {
                self.pos -= 1;
                Err(self.error(format!("expected a class name, `NOT` or `(`, found {other:?}")))
            }
        }
    }
}

/// Parses a policy expression. `NOT` binds tighter than `AND`, which binds
/// tighter than `OR`. Error positions are char offsets into `source`.
pub fn parse_policy_expr(source: &str) -> Result<ClassExpr> {
    let mut parser = Parser {
        tokens: lex(source)?,
        pos: 0,
        end: source.chars().count(),
    };
    let expr = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}
