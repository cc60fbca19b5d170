//! Low-level token handling shared by the rewriting stages.
//!
//! Sentences are stored as whitespace-normalised text. Rewriting operators
//! work on a finer "lexical" token stream where leading and trailing
//! punctuation is split off each whitespace token, so that moving or deleting
//! a word never drags a comma or full stop along with it.

/// Placeholder inserted for a missing fragment component.
pub const MASK: &str = "[MASK]";

/// Collapse every whitespace run to a single space and trim the ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace-delimited tokens together with their byte offsets.
pub fn whitespace_spans(s: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                spans.push((st, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        spans.push((st, s.len()));
    }
    spans
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Split a whitespace token into `(leading punctuation, core, trailing punctuation)`.
///
/// The core keeps interior punctuation such as the dots of `KEYMGR.CTRL.STATUS`,
/// hyphens and slashes. The mask placeholder is kept whole.
pub fn split_core(token: &str) -> (&str, &str, &str) {
    if let Some(pos) = token.find(MASK) {
        let lead = &token[..pos];
        let rest = &token[pos + MASK.len()..];
        if lead.chars().all(|c| !is_word_char(c)) && rest.chars().all(|c| !is_word_char(c)) {
            return (lead, MASK, rest);
        }
    }
    let start = token.find(is_word_char);
    let Some(start) = start else {
        return (token, "", "");
    };
    let end = token
        .char_indices()
        .rev()
        .find(|(_, c)| is_word_char(*c))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(token.len());
    (&token[..start], &token[start..end], &token[end..])
}

/// The word core of a whitespace token (see [`split_core`]).
pub fn core(token: &str) -> &str {
    split_core(token).1
}

/// A token in the lexical stream: either a word core or a single punctuation mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexToken {
    pub text: String,
    pub punct: bool,
    /// Whether the token was preceded by whitespace in its source.
    pub space_before: bool,
}

impl LexToken {
    pub fn word(text: impl Into<String>) -> Self {
        LexToken {
            text: text.into(),
            punct: false,
            space_before: true,
        }
    }
}

/// Break a sentence into lexical tokens.
pub fn lex(s: &str) -> Vec<LexToken> {
    let mut out = Vec::new();
    for (st, en) in whitespace_spans(s) {
        let tok = &s[st..en];
        let (lead, core, trail) = split_core(tok);
        let mut first = true;
        for c in lead.chars() {
            out.push(LexToken {
                text: c.to_string(),
                punct: true,
                space_before: first,
            });
            first = false;
        }
        if !core.is_empty() {
            out.push(LexToken {
                text: core.to_string(),
                punct: false,
                space_before: first,
            });
            first = false;
        }
        for c in trail.chars() {
            out.push(LexToken {
                text: c.to_string(),
                punct: true,
                space_before: first,
            });
            first = false;
        }
    }
    if let Some(t) = out.first_mut() {
        t.space_before = false;
    }
    out
}

/// Inverse of [`lex`] up to whitespace normalisation.
pub fn unlex(tokens: &[LexToken]) -> String {
    let mut s = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && t.space_before {
            s.push(' ');
        }
        s.push_str(&t.text);
    }
    s
}

/// Register-like identifiers: dotted paths, snake_case signal names and
/// ALL-CAPS block names.
pub fn is_register_like(word: &str) -> bool {
    if word.is_empty() || word == MASK {
        return false;
    }
    let dotted = is_dotted_identifier(word);
    let underscored = word.contains('_') && word.chars().any(|c| c.is_alphabetic());
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    let all_caps = letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase());
    dotted || underscored || all_caps
}

/// `CFG.endian_swap`, `KEYMGR.CTRL.STATUS`; not `e.g` or `0.5`.
pub fn is_dotted_identifier(word: &str) -> bool {
    let segments: Vec<&str> = word.split('.').collect();
    segments.len() >= 2
        && segments.iter().all(|s| !s.is_empty() && s.chars().all(is_word_char))
        && segments
            .iter()
            .any(|s| s.chars().count() >= 2 && s.chars().any(|c| c.is_alphabetic()))
}

/// `true` when the first character is uppercase and every other letter is lowercase.
pub fn is_titlecase(word: &str) -> bool {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_uppercase() => chars.all(|c| !c.is_alphabetic() || c.is_lowercase()),
        _ => false,
    }
}

pub fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub fn decapitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Copy the capitalisation of `model`'s first letter onto `word`.
pub fn match_case(model: &str, word: &str) -> String {
    if model.chars().next().is_some_and(|c| c.is_uppercase()) {
        capitalize(word)
    } else {
        word.to_string()
    }
}
