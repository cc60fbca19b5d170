//! Data augmentation for the language-model pre-training corpus.
//!
//! Four operators rewrite a sentence while keeping its operating entities
//! intact:
//!
//! * random swap (RS) moves a conjunction-led phrase to another clause boundary,
//! * random deletion (RD) removes one adjective, determiner or adverb,
//! * synonym replacement (SR) swaps one verb for its top-ranked synonym,
//! * random insertion (RI) places an adverb from the adverb list next to a verb.
//!
//! Register-like nouns (dotted paths, ALL-CAPS names, snake_case signals) are
//! never moved, removed or replaced. Each operator returns `None` when the
//! sentence offers nothing to rewrite.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{LabeledExample, RecordLine, SentenceRecord};
use crate::lexicon::{inflect, is_auxiliary, is_modal, Lexicon, PosTag, VerbForm};
use crate::rng::{self, Rng};
use crate::text::{self, LexToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AugOp {
    #[serde(rename = "RS")]
    RandomSwap,
    #[serde(rename = "RD")]
    RandomDeletion,
    #[serde(rename = "SR")]
    SynonymReplacement,
    #[serde(rename = "RI")]
    RandomInsertion,
}

impl AugOp {
    pub const ALL: [AugOp; 4] = [
        AugOp::RandomSwap,
        AugOp::RandomDeletion,
        AugOp::SynonymReplacement,
        AugOp::RandomInsertion,
    ];

    pub fn code(self) -> &'static str {
        match self {
            AugOp::RandomSwap => "RS",
            AugOp::RandomDeletion => "RD",
            AugOp::SynonymReplacement => "SR",
            AugOp::RandomInsertion => "RI",
        }
    }

    /// Apply this operator to one sentence.
    pub fn apply(self, sentence: &SentenceRecord, lexicon: &Lexicon, seed: u64) -> Option<AugmentedVariant> {
        match self {
            AugOp::RandomSwap => random_swap(sentence, lexicon, seed),
            AugOp::RandomDeletion => random_deletion(sentence, lexicon, seed),
            AugOp::SynonymReplacement => synonym_replacement(sentence, lexicon, seed),
            AugOp::RandomInsertion => random_insertion(sentence, lexicon, seed),
        }
    }
}

impl fmt::Display for AugOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error)]
#[error("unknown augmentation operator {0:?} (expected rs, rd, sr or ri)")]
pub struct UnknownOp(String);

impl FromStr for AugOp {
    type Err = UnknownOp;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RS" => Ok(AugOp::RandomSwap),
            "RD" => Ok(AugOp::RandomDeletion),
            "SR" => Ok(AugOp::SynonymReplacement),
            "RI" => Ok(AugOp::RandomInsertion),
            _ => Err(UnknownOp(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedVariant {
    pub origin_id: String,
    pub op: AugOp,
    pub text: String,
    pub seed: u64,
}

/// Lexical tokens of a sentence with a tag per token (punctuation is OTHER).
struct Tagged {
    toks: Vec<LexToken>,
    tags: Vec<PosTag>,
}

impl Tagged {
    fn new(text: &str, lexicon: &Lexicon) -> Self {
        let toks = text::lex(text);
        let words: Vec<&str> = toks.iter().filter(|t| !t.punct).map(|t| t.text.as_str()).collect();
        let mut word_tags = lexicon.tag_pos(&words).into_iter();
        let tags = toks
            .iter()
            .map(|t| {
                if t.punct {
                    PosTag::Other
                } else {
                    word_tags.next().unwrap_or(PosTag::Other)
                }
            })
            .collect();
        Tagged { toks, tags }
    }

    fn protected(&self, i: usize) -> bool {
        !self.toks[i].punct && self.tags[i] == PosTag::Noun && text::is_register_like(&self.toks[i].text)
    }

    fn is_clause_punct(&self, i: usize) -> bool {
        self.toks[i].punct && matches!(self.toks[i].text.as_str(), "," | ";" | ":" | "." | "!" | "?")
    }
}

fn variant(sentence: &SentenceRecord, op: AugOp, seed: u64, toks: &[LexToken]) -> Option<AugmentedVariant> {
    let text = text::unlex(toks);
    (text != sentence.text && !text.is_empty()).then(|| AugmentedVariant {
        origin_id: sentence.id.clone(),
        op,
        text,
        seed,
    })
}

/// Each operator draws from its own stream so one seed does not correlate
/// the choices of different operators.
fn op_rng(op: AugOp, seed: u64) -> Rng {
    rng::seeded(rng::derive_seed(seed, op.code()))
}

fn pick<T: Copy>(rng: &mut Rng, items: &[T]) -> Option<T> {
    (!items.is_empty()).then(|| items[rng.gen_range(0..items.len())])
}

/// Move one conjunction-led phrase to a different clause boundary.
pub fn random_swap(sentence: &SentenceRecord, lexicon: &Lexicon, seed: u64) -> Option<AugmentedVariant> {
    let t = Tagged::new(&sentence.text, lexicon);
    let n = t.toks.len();
    let is_conj = |i: usize| !t.toks[i].punct && lexicon.is_conjunction(&t.toks[i].text);
    let conj_count = (0..n).filter(|&i| is_conj(i)).count();
    if conj_count < 2 {
        return None;
    }
    let mut phrases = Vec::new();
    for i in (1..n).filter(|&i| is_conj(i)) {
        let end = (i + 1..n).find(|&j| is_conj(j) || t.is_clause_punct(j)).unwrap_or(n);
        let at_boundary = end == n || t.is_clause_punct(end);
        let movable = end - i >= 2 && at_boundary && !(i..end).any(|k| t.protected(k));
        if movable {
            phrases.push((i, end));
        }
    }
    let mut rng = op_rng(AugOp::RandomSwap, seed);
    let (start, end) = pick(&mut rng, &phrases)?;

    let mut rest: Vec<LexToken> = t.toks[..start].to_vec();
    rest.extend_from_slice(&t.toks[end..]);
    let mut moved: Vec<LexToken> = t.toks[start..end].to_vec();
    moved[0].space_before = true;
    let rest_tags: Vec<bool> = (0..n)
        .filter(|k| *k < start || *k >= end)
        .map(|k| t.is_clause_punct(k))
        .collect();
    let mut targets: Vec<usize> = (1..rest.len()).filter(|&p| rest_tags[p] && p != start).collect();
    if !rest.last().is_some_and(|tok| tok.punct) && rest.len() != start {
        targets.push(rest.len());
    }
    let target = pick(&mut rng, &targets)?;
    let mut out = rest[..target].to_vec();
    out.extend(moved);
    out.extend_from_slice(&rest[target..]);
    variant(sentence, AugOp::RandomSwap, seed, &out)
}

/// Remove one adjective, determiner or adverb.
pub fn random_deletion(sentence: &SentenceRecord, lexicon: &Lexicon, seed: u64) -> Option<AugmentedVariant> {
    let t = Tagged::new(&sentence.text, lexicon);
    let candidates: Vec<usize> = (0..t.toks.len())
        .filter(|&i| {
            !t.toks[i].punct
                && matches!(t.tags[i], PosTag::Adj | PosTag::Det | PosTag::Adv)
                && (i == 0 || t.toks[i].space_before)
                && !t.protected(i)
        })
        .collect();
    let mut rng = op_rng(AugOp::RandomDeletion, seed);
    let idx = pick(&mut rng, &candidates)?;
    let mut out = t.toks.clone();
    let removed = out.remove(idx);
    let orphan =
        |k: usize, o: &[LexToken]| o.get(k).is_some_and(|t| t.punct && t.text == ",") && (k == 0 || o[k - 1].punct);
    if orphan(idx, &out) {
        out.remove(idx);
    }
    if idx == 0 {
        if let Some(next) = out.first_mut() {
            next.space_before = false;
            if !next.punct && removed.text.chars().next().is_some_and(char::is_uppercase) {
                next.text = text::capitalize(&next.text);
            }
        }
    }
    variant(sentence, AugOp::RandomDeletion, seed, &out)
}

/// Replace one verb with its top-ranked synonym, keeping its inflection.
pub fn synonym_replacement(sentence: &SentenceRecord, lexicon: &Lexicon, seed: u64) -> Option<AugmentedVariant> {
    let t = Tagged::new(&sentence.text, lexicon);
    let mut candidates = Vec::new();
    for i in 0..t.toks.len() {
        let tok = &t.toks[i];
        if tok.punct || t.tags[i] != PosTag::Verb || is_auxiliary(&tok.text) || t.protected(i) {
            continue;
        }
        let Some((lemma, mut form)) = lexicon.tagger().verb_lemma(&tok.text) else {
            continue;
        };
        // "be read", "is set": invariant past participles look like base forms
        let after_aux = (0..i)
            .rev()
            .find(|&k| !t.toks[k].punct)
            .is_some_and(|k| is_auxiliary(&t.toks[k].text) && !is_modal(&t.toks[k].text));
        if form == VerbForm::Base && after_aux {
            form = VerbForm::Past;
        }
        if let Some(top) = lexicon.synonyms(&lemma, PosTag::Verb).first() {
            let replacement = text::match_case(&tok.text, &inflect(top, form));
            if replacement != tok.text {
                candidates.push((i, replacement));
            }
        }
    }
    let mut rng = op_rng(AugOp::SynonymReplacement, seed);
    if candidates.is_empty() {
        return None;
    }
    let (idx, replacement) = candidates.swap_remove(rng.gen_range(0..candidates.len()));
    let mut out = t.toks.clone();
    out[idx].text = replacement;
    variant(sentence, AugOp::SynonymReplacement, seed, &out)
}

/// Insert an adverb immediately before or after a verb.
pub fn random_insertion(sentence: &SentenceRecord, lexicon: &Lexicon, seed: u64) -> Option<AugmentedVariant> {
    let adverbs = lexicon.adverbs();
    if adverbs.is_empty() {
        return None;
    }
    let t = Tagged::new(&sentence.text, lexicon);
    let verbs: Vec<usize> = (0..t.toks.len())
        .filter(|&i| !t.toks[i].punct && t.tags[i] == PosTag::Verb)
        .collect();
    let main: Vec<usize> = verbs
        .iter()
        .copied()
        .filter(|&i| !is_auxiliary(&t.toks[i].text))
        .collect();
    let pool = if main.is_empty() { &verbs } else { &main };
    let mut rng = op_rng(AugOp::RandomInsertion, seed);
    let verb = pick(&mut rng, pool)?;
    let after = rng.gen_bool(0.5);
    let adverb = &adverbs[rng.gen_range(0..adverbs.len())];

    let mut out = t.toks.clone();
    let pos = if after { verb + 1 } else { verb };
    let mut word = LexToken::word(adverb.clone());
    if pos == 0 {
        word.text = text::capitalize(&word.text);
        word.space_before = false;
        if let Some(first) = out.first_mut() {
            first.space_before = true;
            if text::is_titlecase(&first.text) && !text::is_register_like(&first.text) {
                first.text = text::decapitalize(&first.text);
            }
        }
    } else if let Some(next) = out.get(pos) {
        // keep attachments such as "(" with the word they opened
        if !next.space_before && !next.punct {
            return None;
        }
    }
    out.insert(pos, word);
    variant(sentence, AugOp::RandomInsertion, seed, &out)
}

/// A corpus line in augmented output: an original or a variant of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedRecord {
    pub record: SentenceRecord,
    pub origin: Option<(String, AugOp)>,
}

impl AugmentedRecord {
    pub fn to_line(&self) -> RecordLine {
        let mut line = RecordLine::from_record(&self.record);
        if let Some((origin, op)) = &self.origin {
            line.origin_id = Some(origin.clone());
            line.aug_op = Some(op.code().to_string());
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentReport {
    pub records: Vec<AugmentedRecord>,
    pub originals: usize,
    pub per_op: BTreeMap<AugOp, usize>,
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("no augmentation operators selected")]
    NoOps,
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
}

/// Seed for the `attempt`-th application of `op` to record `id`.
pub fn op_seed(seed: u64, id: &str, op: AugOp, attempt: usize) -> u64 {
    rng::derive_seed(seed, &format!("{id}\u{1f}{}\u{1f}{attempt}", op.code()))
}

fn variants_for(
    rec: &SentenceRecord,
    ops: &[AugOp],
    lexicon: &Lexicon,
    seed: u64,
    multiplicity: usize,
) -> Vec<AugmentedVariant> {
    let mut out = Vec::new();
    for &op in ops {
        let mut seen: Vec<String> = Vec::new();
        for attempt in 0..multiplicity {
            if let Some(v) = op.apply(rec, lexicon, op_seed(seed, &rec.id, op, attempt)) {
                if !seen.contains(&v.text) {
                    seen.push(v.text.clone());
                    out.push(v);
                }
            }
        }
    }
    out
}

fn variant_id(origin: &str, op: AugOp, n: usize) -> String {
    let code = op.code().to_ascii_lowercase();
    if n == 0 {
        format!("{origin}~{code}")
    } else {
        format!("{origin}~{code}{}", n + 1)
    }
}

/// Originals plus up to `multiplicity` distinct variants per (record, op).
/// Records are processed in parallel; the output order and content depend
/// only on the inputs and `seed`.
pub fn augment_corpus(
    records: &[SentenceRecord],
    ops: &[AugOp],
    lexicon: &Lexicon,
    seed: u64,
    multiplicity: usize,
) -> Result<AugmentReport, AugmentError> {
    if ops.is_empty() {
        return Err(AugmentError::NoOps);
    }
    if multiplicity == 0 {
        return Err(AugmentError::ZeroMultiplicity);
    }
    let mut ops = ops.to_vec();
    ops.sort();
    ops.dedup();
    let per_record: Vec<Vec<AugmentedVariant>> = records
        .par_iter()
        .map(|r| variants_for(r, &ops, lexicon, seed, multiplicity))
        .collect();

    let mut per_op: BTreeMap<AugOp, usize> = ops.iter().map(|op| (*op, 0)).collect();
    let mut out = Vec::with_capacity(records.len() * 2);
    for (rec, variants) in records.iter().zip(per_record) {
        out.push(AugmentedRecord {
            record: rec.clone(),
            origin: None,
        });
        let mut nth: BTreeMap<AugOp, usize> = BTreeMap::new();
        for v in variants {
            let n = nth.entry(v.op).or_default();
            let id = variant_id(&rec.id, v.op, *n);
            *n += 1;
            *per_op.entry(v.op).or_default() += 1;
            out.push(AugmentedRecord {
                record: rec.with_text(id, &v.text),
                origin: Some((rec.id.clone(), v.op)),
            });
        }
    }
    Ok(AugmentReport {
        records: out,
        originals: records.len(),
        per_op,
    })
}

/// Augment a labeled set; every variant inherits its origin's label.
pub fn augment_labeled(
    examples: &[LabeledExample],
    ops: &[AugOp],
    lexicon: &Lexicon,
    seed: u64,
    multiplicity: usize,
) -> Result<Vec<LabeledExample>, AugmentError> {
    let records: Vec<SentenceRecord> = examples.iter().map(|e| e.record.clone()).collect();
    let report = augment_corpus(&records, ops, lexicon, seed, multiplicity)?;
    let labels: std::collections::HashMap<&str, u8> =
        examples.iter().map(|e| (e.record.id.as_str(), e.label)).collect();
    Ok(report
        .records
        .into_iter()
        .map(|r| {
            let key = r.origin.as_ref().map(|(o, _)| o.as_str()).unwrap_or(&r.record.id);
            let label = labels[key];
            LabeledExample {
                record: r.record,
                label,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HANG: &str =
        "If some hang condition were to occur when in this mode, the main state machine debug register should be read.";

    fn rec(text: &str) -> SentenceRecord {
        SentenceRecord::new("t#1", "t", "", text)
    }

    #[test]
    fn swap_moves_trailing_conjunction_phrase() {
        let lex = Lexicon::default();
        let v = random_swap(&rec(HANG), &lex, 0).unwrap();
        assert_eq!(
            v.text,
            "If some hang condition were to occur, the main state machine debug register should be read when in this mode."
        );
        assert!(random_swap(&rec("The ADC is continually powered on."), &lex, 0).is_none());
    }

    #[test]
    fn deletion_requires_modifier() {
        let lex = Lexicon::default();
        assert!(random_deletion(&rec("Module asserts interrupt."), &lex, 0).is_none());
        let v = random_deletion(&rec("The FIFO drains."), &lex, 0).unwrap();
        assert_eq!(v.text, "FIFO drains.");
    }

    #[test]
    fn synonym_skips_copulas() {
        let lex = Lexicon::default();
        assert!(synonym_replacement(&rec("The value is zero."), &lex, 0).is_none());
        let v = synonym_replacement(&rec("The key stays in place."), &lex, 3).unwrap();
        assert_eq!(v.text, "The key remains in place.");
    }

    #[test]
    fn insertion_needs_adverbs() {
        let lex = Lexicon::default().with_adverbs(Vec::new());
        assert!(random_insertion(&rec(HANG), &lex, 0).is_none());
    }

    #[test]
    fn corpus_augmentation_counts() {
        let lex = Lexicon::default();
        let recs = vec![rec(HANG)];
        assert!(augment_corpus(&recs, &[], &lex, 0, 1).is_err());
        let r = augment_corpus(&recs, &AugOp::ALL, &lex, 5, 1).unwrap();
        assert_eq!(r.records.len(), 1 + r.per_op.values().sum::<usize>());
        assert_eq!(r.records[1].record.id, "t#1~rs");
    }

    #[test]
    fn op_names_parse() {
        assert_eq!("ri".parse::<AugOp>().unwrap(), AugOp::RandomInsertion);
        assert!("xx".parse::<AugOp>().is_err());
    }
}
