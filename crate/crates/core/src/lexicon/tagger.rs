use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::morph::{self, VerbForm};
use super::ConjunctionSet;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Det,
    Conj,
    Num,
    Other,
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Det => "DET",
            PosTag::Conj => "CONJ",
            PosTag::Num => "NUM",
            PosTag::Other => "OTHER",
        };
        f.write_str(s)
    }
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "no", "each", "every", "all", "both", "either",
    "neither", "its", "their", "our", "your", "his", "her", "my", "another", "several", "many", "few", "much", "more",
    "most",
];

const PRONOUNS: &[&str] = &["it", "they", "them", "we", "you", "he", "she", "i", "one"];

const COORDINATORS: &[&str] = &["and", "or", "but", "nor"];

/// Auxiliaries, copulas and modals. Tagged VERB, but never rewritten by the
/// augmentation operators.
pub const AUXILIARIES: &[&str] = &[
    "be", "is", "are", "was", "were", "been", "being", "am", "has", "have", "had", "having", "do", "does", "did",
    "can", "could", "shall", "should", "will", "would", "may", "might", "must",
];

const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "by", "for", "with", "without", "within", "of", "from", "into", "onto", "through", "via", "per",
    "over", "under", "between", "across", "during", "against", "about", "than", "as", "out", "off", "up", "down",
    "which", "who", "whom", "whose", "where", "what", "how", "there", "here", "so",
];

const CLOSED_ADVERBS: &[&str] = &[
    "not",
    "yet",
    "still",
    "already",
    "again",
    "also",
    "only",
    "then",
    "very",
    "just",
    "even",
    "instead",
    "however",
    "therefore",
    "thus",
    "otherwise",
    "now",
    "soon",
    "often",
    "always",
    "never",
    "once",
    "twice",
];

/// Two-stage rule tagger: closed-class lookup, then open-class lexicons with
/// suffix and context fallbacks.
#[derive(Debug, Clone)]
pub struct Tagger {
    conjunctions: ConjunctionSet,
    verbs: HashSet<String>,
    adjectives: HashSet<String>,
    adverbs: HashSet<String>,
    nouns: HashSet<String>,
}

impl Tagger {
    pub fn new(
        conjunctions: ConjunctionSet,
        verbs: impl IntoIterator<Item = String>,
        adjectives: impl IntoIterator<Item = String>,
        adverbs: impl IntoIterator<Item = String>,
        nouns: impl IntoIterator<Item = String>,
    ) -> Self {
        Tagger {
            conjunctions,
            verbs: verbs.into_iter().collect(),
            adjectives: adjectives.into_iter().collect(),
            adverbs: adverbs.into_iter().collect(),
            nouns: nouns.into_iter().collect(),
        }
    }

    pub fn conjunctions(&self) -> &ConjunctionSet {
        &self.conjunctions
    }

    pub fn is_verb_lemma(&self, w: &str) -> bool {
        self.verbs.contains(w)
    }

    /// Lemma and form of an open-class verb, if the word inflects a known stem.
    pub fn verb_lemma(&self, word: &str) -> Option<(String, VerbForm)> {
        let lower = word.to_lowercase();
        morph::lemmatize(&lower, |w| self.verbs.contains(w))
    }

    /// Tag a token sequence. Tokens may carry surrounding punctuation; only
    /// their word cores are inspected.
    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<PosTag> {
        let mut tags: Vec<PosTag> = Vec::with_capacity(tokens.len());
        for tok in tokens {
            let prev = tags.last().copied();
            tags.push(self.tag_one(text::core(tok.as_ref()), prev));
        }
        tags
    }

    fn tag_one(&self, word: &str, prev: Option<PosTag>) -> PosTag {
        if word.is_empty() || word == text::MASK {
            return PosTag::Other;
        }
        if is_numeric(word) {
            return PosTag::Num;
        }
        if text::is_dotted_identifier(word) {
            return PosTag::Noun;
        }
        let lower = word.to_lowercase();
        let w = lower.as_str();
        if DETERMINERS.contains(&w) {
            return PosTag::Det;
        }
        if self.conjunctions.contains(w) || COORDINATORS.contains(&w) {
            return PosTag::Conj;
        }
        if PRONOUNS.contains(&w) {
            return PosTag::Noun;
        }
        if AUXILIARIES.contains(&w) {
            return PosTag::Verb;
        }
        if PREPOSITIONS.contains(&w) {
            return PosTag::Other;
        }
        if CLOSED_ADVERBS.contains(&w) {
            return PosTag::Adv;
        }
        if text::is_register_like(word) {
            return PosTag::Noun;
        }
        if self.adjectives.contains(w) {
            return PosTag::Adj;
        }
        if self.adverbs.contains(w) {
            return PosTag::Adv;
        }
        if self.nouns.contains(w) {
            return PosTag::Noun;
        }
        if let Some((_, form)) = morph::lemmatize(w, |s| self.verbs.contains(s)) {
            // Verb stems after a determiner or adjective read as nouns
            // ("the reset", "some hang") or participial adjectives.
            return match (prev, form) {
                (Some(PosTag::Det | PosTag::Adj), VerbForm::Past) => PosTag::Adj,
                (Some(PosTag::Det | PosTag::Adj), _) => PosTag::Noun,
                _ => PosTag::Verb,
            };
        }
        if w.len() > 3 && w.ends_with("ly") {
            return PosTag::Adv;
        }
        if w.chars().any(|c| c.is_alphabetic()) {
            PosTag::Noun
        } else {
            PosTag::Other
        }
    }
}

pub fn is_auxiliary(word: &str) -> bool {
    AUXILIARIES.contains(&word.to_lowercase().as_str())
}

const MODALS: &[&str] = &[
    "can", "could", "shall", "should", "will", "would", "may", "might", "must", "do", "does", "did",
];

/// Modals and do-support take a bare infinitive.
pub fn is_modal(word: &str) -> bool {
    MODALS.contains(&word.to_lowercase().as_str())
}

/// Decimal, hex and sized Verilog literals.
pub fn is_numeric(word: &str) -> bool {
    let w = word.to_ascii_lowercase();
    if let Some(hex) = w.strip_prefix("0x") {
        return !hex.is_empty() && hex.chars().all(|c| c.is_ascii_hexdigit() || c == '_');
    }
    if let Some((width, rest)) = w.split_once('\'') {
        let mut rest = rest.chars();
        let base_ok = matches!(rest.next(), Some('b' | 'd' | 'h' | 'o'));
        let digits: String = rest.collect();
        return width.chars().all(|c| c.is_ascii_digit())
            && base_ok
            && !digits.is_empty()
            && digits
                .chars()
                .all(|c| c.is_ascii_hexdigit() || matches!(c, '_' | 'x' | 'z'));
    }
    !w.is_empty()
        && w.chars().next().is_some_and(|c| c.is_ascii_digit())
        && w.split('.')
            .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use PosTag::*;

    fn tag(s: &str) -> Vec<PosTag> {
        let lex = Lexicon::default();
        let toks: Vec<&str> = s.split_whitespace().collect();
        lex.tag_pos(&toks)
    }

    #[test]
    fn register_names_and_literals() {
        assert_eq!(tag("KEYMGR.CTRL.STATUS stays"), vec![Noun, Verb]);
        assert_eq!(tag("the"), vec![Det]);
        assert_eq!(tag("immediately"), vec![Adv]);
        assert_eq!(tag("0 0x1F 1'b0 3.5"), vec![Num, Num, Num, Num]);
    }

    #[test]
    fn fragment_tags_match_completeness_rules() {
        assert_eq!(tag("When resetting"), vec![Conj, Verb]);
        assert_eq!(tag("if 0"), vec![Conj, Num]);
        assert_eq!(tag("allow requests"), vec![Verb, Verb]);
        assert_eq!(tag("module allows requests"), vec![Noun, Verb, Verb]);
        assert_eq!(
            tag("If some hang condition were to occur"),
            vec![Conj, Det, Noun, Noun, Verb, Conj, Verb]
        );
    }

    #[test]
    fn unknown_words_fall_back() {
        assert_eq!(tag("frobnicate"), vec![Noun]);
        assert_eq!(tag("quietly"), vec![Adv]);
        assert_eq!(tag("--"), vec![Other]);
    }

    #[test]
    fn numeric_literals() {
        assert!(is_numeric("42"));
        assert!(is_numeric("8'hFF"));
        assert!(!is_numeric("0x"));
        assert!(!is_numeric("32-bit"));
        assert!(!is_numeric("1."));
    }
}
