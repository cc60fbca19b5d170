//! End-to-end property extraction over unseen documents, and coverage of the
//! extracted properties by design-verification (DV) test descriptions.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{featurize_tfidf, fit_tfidf, ClassifyError, FeatureVector, Scorer, Vocabulary};
use crate::corpus::{SentenceRecord, DEFAULT_MIN_WORDS};

pub const DEFAULT_SIM_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("similarity threshold {0} must lie in (0, 1]")]
    Threshold(f64),
    #[error("scoring failed after {completed} sentence(s): {source}")]
    Partial {
        completed: usize,
        #[source]
        source: ClassifyError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub sentence: SentenceRecord,
    pub score: f64,
    pub covered_by_dv: Option<bool>,
    pub matched_dv_id: Option<String>,
    /// Best DV similarity, set by coverage analysis.
    pub similarity: Option<f64>,
}

/// One line of a properties file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyLine {
    pub id: String,
    pub doc: String,
    pub text: String,
    pub score: f64,
    pub covered_by_dv: Option<bool>,
    pub matched_dv_id: Option<String>,
}

impl From<&PropertyRecord> for PropertyLine {
    fn from(p: &PropertyRecord) -> Self {
        PropertyLine {
            id: p.sentence.id.clone(),
            doc: p.sentence.doc.clone(),
            text: p.sentence.text.clone(),
            score: p.score,
            covered_by_dv: p.covered_by_dv,
            matched_dv_id: p.matched_dv_id.clone(),
        }
    }
}

impl PropertyLine {
    pub fn into_record(self) -> PropertyRecord {
        PropertyRecord {
            sentence: SentenceRecord::new(self.id, self.doc, "", &self.text),
            score: self.score,
            covered_by_dv: self.covered_by_dv,
            matched_dv_id: self.matched_dv_id,
            similarity: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    pub min_words: usize,
    pub threshold: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            min_words: DEFAULT_MIN_WORDS,
            threshold: crate::classify::DEFAULT_THRESHOLD,
        }
    }
}

/// Per-document counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSummary {
    pub doc: String,
    /// Sentences in the document.
    pub sentences: usize,
    /// Sentences long enough to be scored.
    pub processed: usize,
    /// Sentences scored above the threshold.
    pub extracted: usize,
    /// Distinct extracted sentence texts.
    pub properties: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub properties: Vec<PropertyRecord>,
    pub summaries: Vec<DocSummary>,
    /// Set when scoring stopped early; the results cover the sentences
    /// scored before the failure.
    pub failure: Option<String>,
}

fn doc_order(records: &[SentenceRecord]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    records
        .iter()
        .filter(|r| seen.insert(r.doc.clone()))
        .map(|r| r.doc.clone())
        .collect()
}

/// Filter short sentences, score the rest and keep those above the
/// threshold. A scoring failure returns the completed prefix with
/// `failure` set.
pub fn extract_properties(scorer: &dyn Scorer, records: &[SentenceRecord], opts: ExtractOptions) -> Extraction {
    let eligible: Vec<usize> = (0..records.len())
        .filter(|&i| records[i].word_count >= opts.min_words)
        .collect();
    let results: Vec<Result<f64, ClassifyError>> =
        eligible.par_iter().map(|&i| scorer.score(&records[i].text)).collect();
    let mut failure = None;
    let mut properties = Vec::new();
    let mut processed: HashMap<&str, usize> = HashMap::new();
    let mut stop = records.len();
    for (k, (&i, res)) in eligible.iter().zip(results).enumerate() {
        let rec = &records[i];
        match res {
            Ok(score) => {
                *processed.entry(rec.doc.as_str()).or_default() += 1;
                if score > opts.threshold {
                    properties.push(PropertyRecord {
                        sentence: rec.clone(),
                        score,
                        covered_by_dv: None,
                        matched_dv_id: None,
                        similarity: None,
                    });
                }
            }
            Err(e) => {
                failure = Some(
                    ExtractError::Partial {
                        completed: k,
                        source: e,
                    }
                    .to_string(),
                );
                stop = i;
                break;
            }
        }
    }
    let included = &records[..stop];
    let summaries = doc_order(records)
        .into_iter()
        .filter(|d| included.iter().any(|r| &r.doc == d))
        .map(|doc| {
            let props: Vec<&PropertyRecord> = properties.iter().filter(|p| p.sentence.doc == doc).collect();
            let distinct: BTreeSet<&str> = props.iter().map(|p| p.sentence.text.as_str()).collect();
            DocSummary {
                sentences: included.iter().filter(|r| r.doc == doc).count(),
                processed: processed.get(doc.as_str()).copied().unwrap_or(0),
                extracted: props.len(),
                properties: distinct.len(),
                doc,
            }
        })
        .collect();
    Extraction {
        properties,
        summaries,
        failure,
    }
}

/// TF-IDF space fitted on a fixed corpus, for cosine comparisons.
#[derive(Debug, Clone)]
pub struct SimilarityModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
}

impl SimilarityModel {
    /// Fit on `corpus`; an empty corpus gives a model where every similarity is 0.
    pub fn fit<S: AsRef<str>>(corpus: &[S]) -> Self {
        match fit_tfidf(corpus) {
            Ok((vocab, idf)) => SimilarityModel { vocab, idf },
            Err(_) => SimilarityModel {
                vocab: Vocabulary::default(),
                idf: Vec::new(),
            },
        }
    }

    pub fn vector(&self, text: &str) -> FeatureVector {
        featurize_tfidf(text, &self.vocab, &self.idf)
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        self.vector(a).cosine(&self.vector(b)).clamp(0.0, 1.0)
    }
}

/// Cosine similarity of the two sentences' TF-IDF vectors, fitted on the pair.
pub fn similarity(a: &str, b: &str) -> f64 {
    SimilarityModel::fit(&[a, b]).similarity(a, b)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCounts {
    pub processed: usize,
    pub extracted: usize,
    pub properties: usize,
    pub covered: usize,
    pub not_covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocCoverage {
    pub doc: String,
    #[serde(flatten)]
    pub counts: CoverageCounts,
}

/// Per-document and total counts in the shape
/// processed / extracted / properties / covered / not covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub sim_threshold: f64,
    pub dv_sentences: usize,
    pub documents: Vec<DocCoverage>,
    pub total: CoverageCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Mark each property covered iff its best similarity against the DV
/// sentences reaches `sim_threshold`. Counts of covered/not covered are over
/// distinct property texts; a text counts as covered if any copy is.
pub fn dv_coverage(
    properties: &mut [PropertyRecord],
    summaries: &[DocSummary],
    dv: &[SentenceRecord],
    sim_threshold: f64,
) -> Result<CoverageReport, ExtractError> {
    if !(sim_threshold > 0.0 && sim_threshold <= 1.0) {
        return Err(ExtractError::Threshold(sim_threshold));
    }
    let mut warnings = Vec::new();
    if dv.is_empty() {
        let w = "DV set is empty; every property is reported as not covered".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }
    let corpus: Vec<&str> = properties
        .iter()
        .map(|p| p.sentence.text.as_str())
        .chain(dv.iter().map(|d| d.text.as_str()))
        .collect();
    let model = SimilarityModel::fit(&corpus);
    let dv_vecs: Vec<FeatureVector> = dv.iter().map(|d| model.vector(&d.text)).collect();
    properties.par_iter_mut().for_each(|p| {
        let v = model.vector(&p.sentence.text);
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in dv_vecs.iter().enumerate() {
            let s = v.cosine(d).clamp(0.0, 1.0);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (covered, id, sim) = match best {
            Some((i, s)) => (s >= sim_threshold, Some(dv[i].id.clone()), Some(s)),
            None => (false, None, None),
        };
        p.covered_by_dv = Some(covered);
        p.matched_dv_id = id;
        p.similarity = sim;
    });

    let mut docs: Vec<String> = summaries.iter().map(|s| s.doc.clone()).collect();
    for p in properties.iter() {
        if !docs.contains(&p.sentence.doc) {
            docs.push(p.sentence.doc.clone());
        }
    }
    let mut total = CoverageCounts::default();
    let documents: Vec<DocCoverage> = docs
        .into_iter()
        .map(|doc| {
            let summary = summaries.iter().find(|s| s.doc == doc);
            let mut texts: HashMap<&str, bool> = HashMap::new();
            let mut extracted = 0;
            for p in properties.iter().filter(|p| p.sentence.doc == doc) {
                extracted += 1;
                *texts.entry(p.sentence.text.as_str()).or_default() |= p.covered_by_dv == Some(true);
            }
            let covered = texts.values().filter(|&&c| c).count();
            let counts = CoverageCounts {
                processed: summary.map(|s| s.processed).unwrap_or(0),
                extracted,
                properties: texts.len(),
                covered,
                not_covered: texts.len() - covered,
            };
            total.processed += counts.processed;
            total.extracted += counts.extracted;
            total.properties += counts.properties;
            total.covered += counts.covered;
            total.not_covered += counts.not_covered;
            DocCoverage { doc, counts }
        })
        .collect();
    Ok(CoverageReport {
        sim_threshold,
        dv_sentences: dv.len(),
        documents,
        total,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct ByLength;
    impl Scorer for ByLength {
        fn score(&self, text: &str) -> Result<f64, ClassifyError> {
            Ok(if text.contains("must") { 0.9 } else { 0.1 })
        }
    }

    struct FailsOn(&'static str);
    impl Scorer for FailsOn {
        fn score(&self, text: &str) -> Result<f64, ClassifyError> {
            if text.contains(self.0) {
                Err(ClassifyError::EmptySet)
            } else {
                Ok(0.9)
            }
        }
    }

    fn rec(id: &str, doc: &str, text: &str) -> SentenceRecord {
        SentenceRecord::new(id, doc, "", text)
    }

    fn docs() -> Vec<SentenceRecord> {
        vec![
            rec(
                "a#1",
                "a",
                "The key register must be cleared when the life cycle state changes.",
            ),
            rec("a#2", "a", "Short sentence here."),
            rec(
                "a#3",
                "a",
                "The block diagram shows the datapath and the control state machines.",
            ),
            rec(
                "b#1",
                "b",
                "Debug access must be disabled in production life cycle states always.",
            ),
        ]
    }

    #[test]
    fn filter_then_score() {
        let out = extract_properties(&ByLength, &docs(), ExtractOptions::default());
        assert!(out.failure.is_none());
        let ids: Vec<&str> = out.properties.iter().map(|p| p.sentence.id.as_str()).collect();
        assert_eq!(ids, ["a#1", "b#1"]);
        assert_eq!(
            out.summaries[0],
            DocSummary {
                doc: "a".into(),
                sentences: 3,
                processed: 2,
                extracted: 1,
                properties: 1
            }
        );
        let empty = extract_properties(&ByLength, &[], ExtractOptions::default());
        assert!(empty.properties.is_empty() && empty.summaries.is_empty());
    }

    #[test]
    fn partial_results_on_failure() {
        let out = extract_properties(&FailsOn("block diagram"), &docs(), ExtractOptions::default());
        assert!(out.failure.as_deref().unwrap().contains("after 1 sentence"));
        assert_eq!(out.properties.len(), 1);
        assert_eq!(out.summaries.len(), 1);
        assert_eq!(out.summaries[0].sentences, 2);
    }

    #[test]
    fn similarity_values() {
        assert_abs_diff_eq!(similarity("read the key", "read the key"), 1.0, epsilon = 1e-12);
        assert_eq!(similarity("read the key", "clock gating logic"), 0.0);
        // "a b c d" vs "a b c e": shared terms have idf 1, the others ln(3/2)+1
        let r = 1.5f64.ln() + 1.0;
        let expected = 3.0 / (3.0 + r * r);
        assert_abs_diff_eq!(similarity("a1 b1 c1 d1", "a1 b1 c1 e1"), expected, epsilon = 1e-9);
    }

    #[test]
    fn coverage_accounting() {
        let mut out = extract_properties(&ByLength, &docs(), ExtractOptions::default());
        let dv = vec![rec(
            "dv#1",
            "dv",
            "The key register must be cleared when the life cycle state changes.",
        )];
        let report = dv_coverage(&mut out.properties, &out.summaries, &dv, 0.5).unwrap();
        assert_eq!(out.properties[0].covered_by_dv, Some(true));
        assert_eq!(out.properties[0].matched_dv_id.as_deref(), Some("dv#1"));
        assert_abs_diff_eq!(out.properties[0].similarity.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(report.total.covered + report.total.not_covered, report.total.properties);
        assert_eq!(report.total.covered, 1);
        let report = dv_coverage(&mut out.properties, &out.summaries, &[], 0.5).unwrap();
        assert_eq!(report.total.covered, 0);
        assert_eq!(report.warnings.len(), 1);
        assert!(dv_coverage(&mut out.properties, &out.summaries, &dv, 0.0).is_err());
    }
}
