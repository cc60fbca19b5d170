use serde::{Deserialize, Serialize};

use super::{join, split_fragments, Fragment};
use crate::corpus::SentenceRecord;
use crate::lexicon::{inflect, is_auxiliary, Lexicon, PosTag};
use crate::text::{self, LexToken};

/// Alternative rewrites kept for comparison with fragment insertion. They are
/// not used by the formalization pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModificationExamples {
    pub original: String,
    pub verb_swap: String,
    pub noun_swap: String,
    pub fragment_delete: String,
    pub fragment_add: String,
}

const ADDED_SUBJECT: &str = "system sampling";

fn tagged(text: &str, lexicon: &Lexicon) -> (Vec<LexToken>, Vec<PosTag>) {
    let toks = text::lex(text);
    let words: Vec<&str> = toks.iter().filter(|t| !t.punct).map(|t| t.text.as_str()).collect();
    let mut tags = lexicon.tag_pos(&words).into_iter();
    let tags = toks
        .iter()
        .map(|t| {
            if t.punct {
                PosTag::Other
            } else {
                tags.next().unwrap_or(PosTag::Other)
            }
        })
        .collect();
    (toks, tags)
}

/// Every main verb replaced by its top-ranked synonym, same inflection.
fn verb_swap(text: &str, lexicon: &Lexicon) -> String {
    let (mut toks, tags) = tagged(text, lexicon);
    for (tok, tag) in toks.iter_mut().zip(tags) {
        if tok.punct || tag != PosTag::Verb || is_auxiliary(&tok.text) {
            continue;
        }
        if let Some((lemma, form)) = lexicon.tagger().verb_lemma(&tok.text) {
            if let Some(top) = lexicon.synonyms(&lemma, PosTag::Verb).first() {
                tok.text = text::match_case(&tok.text, &inflect(top, form));
            }
        }
    }
    text::unlex(&toks)
}

/// Register paths become "register", other design identifiers "condition".
fn noun_swap(text: &str, lexicon: &Lexicon) -> String {
    let (mut toks, tags) = tagged(text, lexicon);
    for (tok, tag) in toks.iter_mut().zip(tags) {
        if tok.punct || tag != PosTag::Noun || !text::is_register_like(&tok.text) {
            continue;
        }
        let generic = if text::is_dotted_identifier(&tok.text) || tok.text.contains('_') {
            "register"
        } else {
            "condition"
        };
        tok.text = generic.to_string();
    }
    text::unlex(&toks)
}

/// Fragments without a subject but with a verb ("begins again").
fn dangling(f: &Fragment) -> bool {
    f.missing == [PosTag::Noun]
}

fn fragment_delete(fragments: &[Fragment]) -> Option<String> {
    let kept: Vec<&Fragment> = fragments.iter().filter(|f| !dangling(f)).collect();
    if kept.is_empty() || kept.len() == fragments.len() {
        return None;
    }
    let closing = fragments.last().map(|f| f.separator.as_str()).unwrap_or_default();
    let mut out = String::new();
    for (i, f) in kept.iter().enumerate() {
        out.push_str(&f.text);
        out.push_str(if i + 1 == kept.len() { closing } else { &f.separator });
    }
    Some(out)
}

fn fragment_add(fragments: &[Fragment], lexicon: &Lexicon) -> String {
    let mut out = fragments.to_vec();
    for f in out.iter_mut().filter(|f| dangling(f)) {
        let mut words: Vec<String> = f.text.split_whitespace().map(str::to_string).collect();
        let lead = words.iter().take_while(|w| lexicon.is_conjunction(w)).count();
        let subject = if f.span.0 == 0 && lead == 0 {
            if let Some(w) = words.first_mut() {
                if text::is_titlecase(w) {
                    *w = text::decapitalize(w);
                }
            }
            text::capitalize(ADDED_SUBJECT)
        } else {
            ADDED_SUBJECT.to_string()
        };
        words.insert(lead, subject);
        f.text = words.join(" ");
    }
    join(&out)
}

pub fn export_modification_examples(sentence: &SentenceRecord, lexicon: &Lexicon) -> ModificationExamples {
    let fragments = split_fragments(sentence, lexicon);
    ModificationExamples {
        original: sentence.text.clone(),
        verb_swap: verb_swap(&sentence.text, lexicon),
        noun_swap: noun_swap(&sentence.text, lexicon),
        fragment_delete: fragment_delete(&fragments).unwrap_or_else(|| sentence.text.clone()),
        fragment_add: fragment_add(&fragments, lexicon),
    }
}
