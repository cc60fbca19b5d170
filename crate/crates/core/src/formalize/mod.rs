//! Sentence formalization: split a sentence into fragments at commas and
//! conjunctions, find fragments lacking a subject noun or a verb, insert
//! `[MASK]` placeholders for the missing roles, fill them and rejoin.

mod filler;
mod table;
mod variant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentenceRecord;
use crate::lexicon::{Lexicon, PosTag};
use crate::text::{self, MASK};

pub use filler::{AdapterFiller, MaskFiller, RulesFiller};
pub use table::{export_modification_examples, ModificationExamples};
pub use variant::{build_variant, DatasetVariant, UnknownVariant, VariantOptions};

#[derive(Debug, Error)]
pub enum FormalizeError {
    #[error("fragment {0:?} has no mask to fill")]
    NoMask(String),
    #[error("filler returned {got} fill(s) for {expected} mask(s)")]
    FillCount { expected: usize, got: usize },
    #[error("filler produced an unusable fill {0:?}")]
    BadFill(String),
    #[error(transparent)]
    Adapter(#[from] crate::adapter::AdapterError),
}

/// A contiguous run of a sentence's whitespace tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    /// Fragment text without the comma or sentence terminal that closes it.
    pub text: String,
    pub leading_conjunction: Option<String>,
    /// Missing roles, a subset of `[NOUN, VERB]` in that order.
    pub missing: Vec<PosTag>,
    /// Token range `[start, end)` in the parent sentence.
    pub span: (usize, usize),
    /// Text between this fragment and the next one (or the sentence end).
    pub separator: String,
}

impl Fragment {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Reassemble fragment texts with their separators.
pub fn join(fragments: &[Fragment]) -> String {
    fragments.iter().map(|f| format!("{}{}", f.text, f.separator)).collect()
}

fn is_closing_punct(c: char) -> bool {
    matches!(c, ',' | '.' | ';' | ':' | '!' | '?')
}

/// Split a sentence at commas and at conjunction tokens. Runs of adjacent
/// conjunctions ("until after") stay in one fragment.
pub fn split_fragments(sentence: &SentenceRecord, lexicon: &Lexicon) -> Vec<Fragment> {
    split_text(&sentence.text, lexicon)
}

pub fn split_text(s: &str, lexicon: &Lexicon) -> Vec<Fragment> {
    let spans = text::whitespace_spans(s);
    if spans.is_empty() {
        return Vec::new();
    }
    let words: Vec<&str> = spans.iter().map(|&(a, b)| &s[a..b]).collect();
    let is_conj = |w: &str| {
        let (lead, core, _) = text::split_core(w);
        lead.is_empty() && lexicon.is_conjunction(core)
    };
    let ends_comma = |w: &str| text::split_core(w).2.contains(',');

    let mut starts = vec![0];
    for i in 1..words.len() {
        let after_comma = ends_comma(words[i - 1]);
        let conj_run = is_conj(words[i]) && !(is_conj(words[i - 1]) && !after_comma);
        if after_comma || conj_run {
            starts.push(i);
        }
    }

    let mut out = Vec::with_capacity(starts.len());
    for (k, &st) in starts.iter().enumerate() {
        let en = starts.get(k + 1).copied().unwrap_or(words.len());
        let byte_start = spans[st].0;
        let last_tok = words[en - 1];
        let (lead, core, trail) = text::split_core(last_tok);
        // strip the closing punctuation run, but only when it ends the token
        let keep = trail.trim_end_matches(is_closing_punct);
        let strip = if core.is_empty() && lead.is_empty() {
            0
        } else {
            trail.len() - keep.len()
        };
        let byte_end = spans[en - 1].1 - strip;
        let next_start = starts.get(k + 1).map(|&n| spans[n].0).unwrap_or(s.len());
        let frag_text = &s[byte_start..byte_end];
        let leading_conjunction = is_conj(words[st]).then(|| text::core(words[st]).to_string());
        out.push(Fragment {
            text: frag_text.to_string(),
            leading_conjunction,
            missing: analyze_completeness(frag_text, lexicon),
            span: (st, en),
            separator: s[byte_end..next_start].to_string(),
        });
    }
    out
}

/// Missing roles of a fragment tagged in isolation. Numbers are not nouns.
pub fn analyze_completeness(fragment: &str, lexicon: &Lexicon) -> Vec<PosTag> {
    let toks: Vec<&str> = fragment.split_whitespace().collect();
    let tags = lexicon.tag_pos(&toks);
    let mut missing = Vec::new();
    if !tags.contains(&PosTag::Noun) {
        missing.push(PosTag::Noun);
    }
    if !tags.contains(&PosTag::Verb) {
        missing.push(PosTag::Verb);
    }
    missing
}

/// A fragment with one `[MASK]` token per missing role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedFragment {
    pub tokens: Vec<String>,
    /// Role of each mask, in token order.
    pub roles: Vec<PosTag>,
    /// Whether the fragment opens its sentence (fills are capitalised).
    pub sentence_initial: bool,
}

impl MaskedFragment {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn mask_positions(&self) -> Vec<usize> {
        (0..self.tokens.len()).filter(|&i| self.tokens[i] == MASK).collect()
    }
}

/// Place a subject mask after the leading conjunction run (or at the start)
/// and a verb mask after the subject.
pub fn insert_masks(fragment: &Fragment, lexicon: &Lexicon) -> MaskedFragment {
    let mut tokens: Vec<String> = fragment.text.split_whitespace().map(str::to_string).collect();
    let sentence_initial = fragment.span.0 == 0;
    let needs_noun = fragment.missing.contains(&PosTag::Noun);
    let needs_verb = fragment.missing.contains(&PosTag::Verb);
    let lead = tokens
        .iter()
        .take_while(|t| {
            let (l, c, _) = text::split_core(t);
            l.is_empty() && lexicon.is_conjunction(c)
        })
        .count();
    let mut roles = Vec::new();
    if needs_noun {
        tokens.insert(lead, MASK.to_string());
        roles.push(PosTag::Noun);
        if needs_verb {
            tokens.insert(lead + 1, MASK.to_string());
            roles.push(PosTag::Verb);
        }
    } else if needs_verb {
        let tags = lexicon.tag_pos(&tokens);
        let first = tags.iter().position(|&t| t == PosTag::Noun).unwrap_or(lead);
        let run_end = (first..tags.len())
            .find(|&i| tags[i] != PosTag::Noun || ends_with_punct(&tokens[i]))
            .map(|i| if tags[i] == PosTag::Noun { i + 1 } else { i })
            .unwrap_or(tags.len());
        tokens.insert(run_end.max(lead), MASK.to_string());
        roles.push(PosTag::Verb);
    }
    MaskedFragment {
        tokens,
        roles,
        sentence_initial,
    }
}

fn ends_with_punct(tok: &str) -> bool {
    !text::split_core(tok).2.is_empty()
}

/// Replace every mask using `filler`.
pub fn fill_masks(
    masked: &MaskedFragment,
    filler: &dyn MaskFiller,
    lexicon: &Lexicon,
) -> Result<String, FormalizeError> {
    if masked.roles.is_empty() {
        return Err(FormalizeError::NoMask(masked.text()));
    }
    filler.fill(masked, lexicon)
}

/// Split, mask and fill every incomplete fragment, then rejoin. Sentences
/// whose fragments are all complete come back unchanged.
pub fn formalize_sentence(
    sentence: &SentenceRecord,
    filler: &dyn MaskFiller,
    lexicon: &Lexicon,
) -> Result<SentenceRecord, FormalizeError> {
    let mut fragments = split_fragments(sentence, lexicon);
    if fragments.iter().all(Fragment::is_complete) {
        return Ok(sentence.clone());
    }
    for frag in fragments.iter_mut().filter(|f| !f.is_complete()) {
        let masked = insert_masks(frag, lexicon);
        frag.text = fill_masks(&masked, filler, lexicon)?;
        frag.missing = analyze_completeness(&frag.text, lexicon);
    }
    Ok(sentence.with_text(sentence.id.clone(), &join(&fragments)))
}
