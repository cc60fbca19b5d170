//! Linguistic resources: POS tagger, synonym lexicon, adverb list and the
//! conjunction inventory used for fragmentation.
//!
//! All resources are plain text so a WordNet export or a project-specific
//! word list can be dropped in. The defaults are compiled into the crate.

mod morph;
mod tagger;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use morph::{inflect, VerbForm};
pub use tagger::{is_auxiliary, is_modal, is_numeric, PosTag, Tagger};

const DEFAULT_CONJUNCTIONS: &str = include_str!("../../data/conjunctions.txt");
const DEFAULT_ADVERBS: &str = include_str!("../../data/adverbs.txt");
const DEFAULT_SYNONYMS: &str = include_str!("../../data/synonyms.tsv");
const DEFAULT_VERBS: &str = include_str!("../../data/verbs.txt");
const DEFAULT_ADJECTIVES: &str = include_str!("../../data/adjectives.txt");
const DEFAULT_NOUNS: &str = include_str!("../../data/nouns.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("invalid lexicon: {0}")]
    Invalid(String),
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty, non-comment lines, trimmed and lowercased.
fn word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Ordered conjunction/subordinator inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjunctionSet {
    words: Vec<String>,
    lookup: HashSet<String>,
}

impl ConjunctionSet {
    pub const REQUIRED: [&'static str; 3] = ["when", "if", "to"];

    pub fn new<I, S>(words: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ordered = Vec::new();
        let mut lookup = HashSet::new();
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if w.is_empty() {
                continue;
            }
            if lookup.insert(w.clone()) {
                ordered.push(w);
            }
        }
        if ordered.is_empty() {
            return Err(LexiconError::Invalid("conjunction set is empty".into()));
        }
        for req in Self::REQUIRED {
            if !lookup.contains(req) {
                return Err(LexiconError::Invalid(format!("conjunction set must contain {req:?}")));
            }
        }
        Ok(ConjunctionSet { words: ordered, lookup })
    }

    pub fn from_file(path: &Path) -> Result<Self, LexiconError> {
        Self::new(word_list(&read(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup.contains(&token.to_lowercase())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

impl Default for ConjunctionSet {
    fn default() -> Self {
        Self::new(word_list(DEFAULT_CONJUNCTIONS)).expect("bundled conjunction list is valid")
    }
}

/// Lemma to ranked synonyms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<String, Vec<String>>,
    pub source: String,
}

impl SynonymLexicon {
    /// Parse `lemma<TAB>rank<TAB>synonym` lines.
    pub fn parse_tsv(text: &str, source: &str) -> Result<Self, LexiconError> {
        let mut ranked: BTreeMap<String, Vec<(u32, usize, String)>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: String| LexiconError::Parse {
                source_name: source.to_string(),
                line: line_no,
                message,
            };
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 tab-separated columns, found {}", cols.len())));
            }
            let lemma = cols[0];
            if lemma.is_empty() || lemma != lemma.to_lowercase() {
                return Err(err(format!("lemma {lemma:?} must be lowercase")));
            }
            let rank: u32 = cols[1]
                .parse()
                .map_err(|_| err(format!("rank {:?} is not an integer", cols[1])))?;
            let syn = cols[2].to_lowercase();
            if syn.is_empty() {
                return Err(err("empty synonym".into()));
            }
            ranked.entry(lemma.to_string()).or_default().push((rank, line_no, syn));
        }
        let mut entries = BTreeMap::new();
        for (lemma, mut syns) in ranked {
            syns.sort();
            if syns[0].2 == lemma {
                return Err(LexiconError::Parse {
                    source_name: source.to_string(),
                    line: syns[0].1,
                    message: format!("{lemma:?} is its own first-ranked synonym"),
                });
            }
            let mut list: Vec<String> = Vec::new();
            for (_, _, s) in syns {
                if s != lemma && !list.contains(&s) {
                    list.push(s);
                }
            }
            entries.insert(lemma, list);
        }
        Ok(SynonymLexicon {
            entries,
            source: source.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, LexiconError> {
        Self::parse_tsv(&read(path)?, &path.display().to_string())
    }

    pub fn lookup(&self, lemma: &str) -> &[String] {
        self.entries.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// File locations for a custom lexicon. Unset entries use the bundled defaults.
#[derive(Debug, Clone, Default)]
pub struct LexiconPaths {
    pub synonyms: Option<PathBuf>,
    pub adverbs: Option<PathBuf>,
    pub conjunctions: Option<PathBuf>,
}

/// Everything the rewriting stages need, immutable after construction.
#[derive(Debug, Clone)]
pub struct Lexicon {
    tagger: Tagger,
    synonyms: SynonymLexicon,
    adverbs: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let synonyms = SynonymLexicon::parse_tsv(DEFAULT_SYNONYMS, "bundled:synonyms.tsv")
            .expect("bundled synonym lexicon is valid");
        Self::build(ConjunctionSet::default(), synonyms, word_list(DEFAULT_ADVERBS))
    }
}

impl Lexicon {
    pub fn build(conjunctions: ConjunctionSet, synonyms: SynonymLexicon, adverbs: Vec<String>) -> Self {
        let tagger = Tagger::new(
            conjunctions,
            word_list(DEFAULT_VERBS),
            word_list(DEFAULT_ADJECTIVES),
            adverbs.iter().cloned(),
            word_list(DEFAULT_NOUNS),
        );
        Lexicon {
            tagger,
            synonyms,
            adverbs,
        }
    }

    pub fn load(paths: &LexiconPaths) -> Result<Self, LexiconError> {
        let conjunctions = match &paths.conjunctions {
            Some(p) => ConjunctionSet::from_file(p)?,
            None => ConjunctionSet::default(),
        };
        Self::load_with_conjunctions(paths, conjunctions)
    }

    pub fn load_with_conjunctions(paths: &LexiconPaths, conjunctions: ConjunctionSet) -> Result<Self, LexiconError> {
        let synonyms = match &paths.synonyms {
            Some(p) => SynonymLexicon::from_file(p)?,
            None => SynonymLexicon::parse_tsv(DEFAULT_SYNONYMS, "bundled:synonyms.tsv")?,
        };
        let adverbs = match &paths.adverbs {
            Some(p) => word_list(&read(p)?),
            None => word_list(DEFAULT_ADVERBS),
        };
        Ok(Self::build(conjunctions, synonyms, adverbs))
    }

    /// Same lexicon with a different adverb list.
    pub fn with_adverbs(mut self, adverbs: Vec<String>) -> Self {
        self = Self::build(self.tagger.conjunctions().clone(), self.synonyms, adverbs);
        self
    }

    pub fn tagger(&self) -> &Tagger {
        &self.tagger
    }

    pub fn conjunctions(&self) -> &ConjunctionSet {
        self.tagger.conjunctions()
    }

    pub fn adverbs(&self) -> &[String] {
        &self.adverbs
    }

    pub fn synonym_lexicon(&self) -> &SynonymLexicon {
        &self.synonyms
    }

    pub fn tag_pos<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<PosTag> {
        self.tagger.tag(tokens)
    }

    /// Ranked synonyms of a lowercase lemma. Copulas and auxiliaries have none.
    pub fn synonyms(&self, word: &str, pos: PosTag) -> Vec<String> {
        let word = word.to_lowercase();
        if pos == PosTag::Verb && is_auxiliary(&word) {
            return Vec::new();
        }
        self.synonyms
            .lookup(&word)
            .iter()
            .filter(|s| **s != word)
            .cloned()
            .collect()
    }

    pub fn is_conjunction(&self, token: &str) -> bool {
        self.conjunctions().contains(crate::text::core(token))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synonym_lookup() {
        let lex = Lexicon::default();
        assert_eq!(lex.synonyms("occur", PosTag::Verb)[0], "happen");
        assert!(lex.synonyms("is", PosTag::Verb).is_empty());
        assert!(lex.synonyms("are", PosTag::Verb).is_empty());
        assert!(lex.synonyms("zzzz", PosTag::Verb).is_empty());
        for (lemma, syns) in &lex.synonym_lexicon().entries {
            assert!(!syns.contains(lemma));
        }
    }

    #[test]
    fn conjunction_membership() {
        let lex = Lexicon::default();
        assert!(lex.is_conjunction("When"));
        assert!(!lex.is_conjunction("FIFO"));
        assert!(lex.is_conjunction("unless"));
        assert!(lex.is_conjunction("if,"));
    }

    #[test]
    fn conjunction_set_requires_core_members() {
        assert!(ConjunctionSet::new(["when", "if"]).is_err());
        assert!(ConjunctionSet::new(Vec::<String>::new()).is_err());
        let set = ConjunctionSet::new(["When", "IF", "to", "when"]).unwrap();
        assert_eq!(set.words(), ["when", "if", "to"]);
    }

    #[test]
    fn tsv_validation() {
        let err = SynonymLexicon::parse_tsv("read\t1\tread\n", "t").unwrap_err();
        assert!(err.to_string().contains("own first-ranked"));
        let err = SynonymLexicon::parse_tsv("read\tx\tscan\n", "t").unwrap_err();
        assert!(err.to_string().contains("t:1"));
        let err = SynonymLexicon::parse_tsv("Read\t1\tscan\n", "t").unwrap_err();
        assert!(err.to_string().contains("lowercase"));
        let lex = SynonymLexicon::parse_tsv("read\t2\tscan\nread\t1\tfetch\n", "t").unwrap();
        assert_eq!(lex.lookup("read"), ["fetch", "scan"]);
    }
}
