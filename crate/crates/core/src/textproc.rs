//! Normalization, tokenization, phrase matching and script-based language
//! identification.

use serde::Serialize;

use crate::ontology::Ontology;

/// Lowercases and keeps only letters (any script) and decimal digits.
pub fn normalize(word: &str) -> String {
    word.chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic() || c.is_ascii_digit())
        .collect()
}

/// Normalizes a possibly multi-word surface form token by token and joins
/// the surviving tokens with single spaces.
pub fn normalize_form(form: &str) -> String {
    let mut out = String::with_capacity(form.len());
    for raw in form.split_whitespace() {
        let token = normalize(raw);
        if token.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&token);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Char offsets of the raw whitespace-delimited token, end exclusive.
    pub char_start: usize,
    pub char_end: usize,
}

/// Splits on Unicode whitespace and normalizes each piece, dropping pieces
/// that normalize to nothing.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let mut raw = String::new();
    let flush = |raw: &mut String, start: usize, end: usize, tokens: &mut Vec<Token>| {
        let text = normalize(raw);
        raw.clear();
        if !text.is_empty() {
            tokens.push(Token {
                text,
                char_start: start,
                char_end: end,
            });
        }
    };
    let mut len = 0;
    for (i, c) in sentence.chars().enumerate() {
        len = i + 1;
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                flush(&mut raw, s, i, &mut tokens);
            }
        } else {
            start.get_or_insert(i);
            raw.push(c);
        }
    }
    if let Some(s) = start {
        flush(&mut raw, s, len, &mut tokens);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchSpan {
    pub token_start: usize,
    pub token_end: usize,
    #[serde(rename = "form")]
    pub matched_form: String,
}

/// Greedy left-to-right longest match of token n-grams against the
/// ontology individuals. Matches never overlap.
pub fn match_phrases(tokens: &[Token], onto: &Ontology) -> Vec<MatchSpan> {
    let max_len = onto.max_phrase_tokens();
    let mut spans = Vec::new();
    let mut key = String::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = max_len.min(tokens.len() - i);
        let mut found = None;
        for n in (1..=longest).rev() {
            key.clear();
            for (k, token) in tokens[i..i + n].iter().enumerate() {
                if k > 0 {
                    key.push(' ');
                }
                key.push_str(&token.text);
            }
            if onto.memberships(&key).is_some() {
                found = Some(n);
                break;
            }
        }
        match found {
            Some(n) => {
                spans.push(MatchSpan {
                    token_start: i,
                    token_end: i + n,
                    matched_form: key.clone(),
                });
                i += n;
            }
            None => i += 1,
        }
    }
    spans
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Bg,
    Ru,
    En,
    Other,
    Unknown,
}

impl Language {
    pub fn tag(self) -> &'static str {
        match self {
            Language::Bg => "bg",
            Language::Ru => "ru",
            Language::En => "en",
            Language::Other => "other",
            Language::Unknown => "unknown",
        }
    }
}

fn is_latin(c: char) -> bool {
    matches!(c, 'a'..='z' | 'A'..='Z' | '\u{00C0}'..='\u{024F}' | '\u{1E00}'..='\u{1EFF}')
}

fn is_cyrillic(c: char) -> bool {
    matches!(c, '\u{0400}'..='\u{052F}' | '\u{1C80}'..='\u{1C8F}' | '\u{2DE0}'..='\u{2DFF}' | '\u{A640}'..='\u{A69F}')
}

/// Script-majority heuristic. "Majority" is more than half of the letters;
/// Cyrillic text with any of ы, э, ё counts as Russian.
pub fn identify_language(text: &str) -> Language {
    let (mut letters, mut latin, mut cyrillic) = (0usize, 0usize, 0usize);
    let mut russian_marker = false;
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        letters += 1;
        if is_latin(c) {
            latin += 1;
        } else if is_cyrillic(c) {
            cyrillic += 1;
            russian_marker |= matches!(c, 'ы' | 'э' | 'ё' | 'Ы' | 'Э' | 'Ё');
        }
    }
    if letters == 0 {
        Language::Unknown
    } else if 2 * latin > letters {
        Language::En
    } else if 2 * cyrillic > letters {
        if russian_marker {
            Language::Ru
        } else {
            Language::Bg
        }
    } else {
        Language::Other
    }
}
