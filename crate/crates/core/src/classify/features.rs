use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ClassifyError;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercased word tokens. A `.` between two word characters stays inside
/// the token, so `keymgr.ctrl.status` is one feature.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let inner_dot = c == '.' && !cur.is_empty() && chars.get(i + 1).copied().is_some_and(is_word_char);
        if is_word_char(c) || inner_dot {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Sorted term list with a reverse index. Serialized as the plain term list.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Vocabulary {
    pub fn from_terms<I: IntoIterator<Item = String>>(terms: I) -> Self {
        let set: BTreeSet<String> = terms.into_iter().collect();
        let terms: Vec<String> = set.into_iter().collect();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, index }
    }

    /// Every token seen in `texts`.
    pub fn build<S: AsRef<str>>(texts: &[S]) -> Self {
        Self::from_terms(texts.iter().flat_map(|t| tokenize(t.as_ref())))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<String>::deserialize(d)?;
        let n = terms.len();
        let v = Vocabulary::from_terms(terms);
        if v.len() != n {
            return Err(serde::de::Error::custom("vocabulary contains duplicate terms"));
        }
        Ok(v)
    }
}

/// Sparse vector, entries sorted by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }

    pub fn cosine(&self, other: &FeatureVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut dot = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    dot += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        let norm = self.l2_norm() * other.l2_norm();
        if norm == 0.0 {
            0.0
        } else {
            (dot / norm).clamp(-1.0, 1.0)
        }
    }
}

fn counts(text: &str, vocab: &Vocabulary) -> Vec<(usize, f64)> {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for tok in tokenize(text) {
        if let Some(i) = vocab.get(&tok) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
    entries.sort_by_key(|&(i, _)| i);
    entries
}

/// Raw in-vocabulary token counts.
pub fn featurize_bow(text: &str, vocab: &Vocabulary) -> FeatureVector {
    FeatureVector {
        entries: counts(text, vocab),
    }
}

/// Vocabulary and smoothed idf, `ln((1 + N) / (1 + df)) + 1`.
pub fn fit_tfidf<S: AsRef<str>>(corpus: &[S]) -> Result<(Vocabulary, Vec<f64>), ClassifyError> {
    if corpus.is_empty() {
        return Err(ClassifyError::EmptyCorpus);
    }
    let vocab = Vocabulary::build(corpus);
    let mut df = vec![0usize; vocab.len()];
    for doc in corpus {
        let seen: BTreeSet<usize> = tokenize(doc.as_ref()).iter().filter_map(|t| vocab.get(t)).collect();
        for i in seen {
            df[i] += 1;
        }
    }
    let n = corpus.len() as f64;
    let idf = df
        .into_iter()
        .map(|d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    Ok((vocab, idf))
}

/// `tf * idf`, L2-normalised (empty when no token is in the vocabulary).
pub fn featurize_tfidf(text: &str, vocab: &Vocabulary, idf: &[f64]) -> FeatureVector {
    let mut entries = counts(text, vocab);
    for (i, v) in entries.iter_mut() {
        *v *= idf[*i];
    }
    let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in entries.iter_mut() {
            *v /= norm;
        }
    }
    FeatureVector { entries }
}
