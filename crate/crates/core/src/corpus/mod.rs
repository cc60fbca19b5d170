//! Documentation ingestion and corpus files.

mod io;
mod segment;
mod split;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_labeled, load_records, read_lines, save_labeled, save_records, write_lines, RecordLine};
pub use segment::{segment_bytes, segment_document, segment_sentences, strip_inline_markup, DocFormat, Segment};
pub use split::{split_dataset, SplitPair};

use crate::text::normalize_whitespace;

/// Sentences shorter than this carry too little about operation behaviour.
pub const DEFAULT_MIN_WORDS: usize = 10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// One segmented sentence with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub doc: String,
    pub section: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub word_count: usize,
}

impl SentenceRecord {
    /// Build a record from raw sentence text; whitespace is normalised and the
    /// token list derived from it.
    pub fn new(id: impl Into<String>, doc: impl Into<String>, section: impl Into<String>, text: &str) -> Self {
        let text = normalize_whitespace(text);
        let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        SentenceRecord {
            id: id.into(),
            doc: doc.into(),
            section: section.into(),
            word_count: tokens.len(),
            tokens,
            text,
        }
    }

    /// Same provenance, different text.
    pub fn with_text(&self, id: impl Into<String>, text: &str) -> Self {
        SentenceRecord::new(id, self.doc.clone(), self.section.clone(), text)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |m: String| Err(CorpusError::Validation(format!("record {:?}: {m}", self.id)));
        if self.id.is_empty() {
            return fail("empty id".into());
        }
        let words = self.text.split_whitespace().count();
        if self.word_count != words {
            return fail(format!("word_count {} but text has {words} words", self.word_count));
        }
        if self.tokens.join(" ") != normalize_whitespace(&self.text) {
            return fail("tokens do not re-join to the text".into());
        }
        Ok(())
    }
}

/// A sentence with a binary property label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub record: SentenceRecord,
    /// 1 = security-property sentence, 0 = other.
    pub label: u8,
}

impl LabeledExample {
    pub fn new(record: SentenceRecord, label: u8) -> Result<Self, CorpusError> {
        if label > 1 {
            return Err(CorpusError::Validation(format!(
                "record {:?}: label {label} is not 0 or 1",
                record.id
            )));
        }
        Ok(LabeledExample { record, label })
    }

    pub fn is_positive(&self) -> bool {
        self.label == 1
    }
}

/// Check every record invariant and id uniqueness.
pub fn validate_corpus(records: &[SentenceRecord]) -> Result<(), CorpusError> {
    let mut seen = HashSet::new();
    for r in records {
        r.validate()?;
        if !seen.insert(r.id.as_str()) {
            return Err(CorpusError::Validation(format!("duplicate id {:?}", r.id)));
        }
    }
    Ok(())
}

/// Keep records with at least `min_words` words, in order.
pub fn filter_short(records: &[SentenceRecord], min_words: usize) -> Vec<SentenceRecord> {
    records.iter().filter(|r| r.word_count >= min_words).cloned().collect()
}

/// Document name used in record ids: the file stem.
pub fn doc_name(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("doc").to_string()
}

/// Segment text that has already been read, assigning `<doc>#<n>` ids.
pub fn records_from_text(doc: &str, text: &str, format: DocFormat) -> Vec<SentenceRecord> {
    segment_document(text, format)
        .into_iter()
        .enumerate()
        .map(|(i, seg)| SentenceRecord::new(format!("{doc}#{}", i + 1), doc, seg.section, &seg.text))
        .collect()
}

pub fn ingest_document(path: &Path, format: DocFormat) -> Result<Vec<SentenceRecord>, CorpusError> {
    let raw = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = segment::decode(&raw)?;
    Ok(records_from_text(&doc_name(path), text, format))
}

/// Ingest several documents in parallel. Output follows sorted path order; a
/// `None` format is inferred per file from its extension.
pub fn ingest_documents(paths: &[PathBuf], format: Option<DocFormat>) -> Result<Vec<SentenceRecord>, CorpusError> {
    let mut sorted = paths.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut names = HashSet::new();
    for p in &sorted {
        if !names.insert(doc_name(p)) {
            return Err(CorpusError::Validation(format!(
                "two documents share the name {:?}",
                doc_name(p)
            )));
        }
    }
    let per_doc: Vec<Result<Vec<SentenceRecord>, CorpusError>> = sorted
        .par_iter()
        .map(|p| ingest_document(p, format.unwrap_or_else(|| DocFormat::from_path(p))))
        .collect();
    let mut out = Vec::new();
    for r in per_doc {
        out.extend(r?);
    }
    Ok(out)
}
