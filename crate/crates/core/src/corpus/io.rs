//! JSON Lines corpus files.
//!
//! One object per line:
//! `{"id", "doc", "section", "text", "tokens", "word_count"}` with an optional
//! `"label"` (labeled files) and `"origin_id"`/`"aug_op"` (augmented files).
//! On read, `doc`, `section`, `tokens` and `word_count` may be omitted and are
//! derived from the id and text.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, LabeledExample, SentenceRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub id: String,
    #[serde(default)]
    pub doc: Option<String>,
    #[serde(default)]
    pub section: Option<String>,
    pub text: String,
    #[serde(default)]
    pub tokens: Option<Vec<String>>,
    #[serde(default)]
    pub word_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aug_op: Option<String>,
}

impl RecordLine {
    pub fn from_record(r: &SentenceRecord) -> Self {
        RecordLine {
            id: r.id.clone(),
            doc: Some(r.doc.clone()),
            section: Some(r.section.clone()),
            text: r.text.clone(),
            tokens: Some(r.tokens.clone()),
            word_count: Some(r.word_count),
            label: None,
            origin_id: None,
            aug_op: None,
        }
    }

    pub fn from_example(e: &LabeledExample) -> Self {
        RecordLine {
            label: Some(i64::from(e.label)),
            ..Self::from_record(&e.record)
        }
    }

    /// Convert to a record, deriving omitted fields and checking the rest.
    pub fn to_record(&self, line: usize) -> Result<SentenceRecord, CorpusError> {
        let doc = self
            .doc
            .clone()
            .unwrap_or_else(|| self.id.split_once('#').map(|(d, _)| d.to_string()).unwrap_or_default());
        let derived = SentenceRecord::new(
            self.id.clone(),
            doc,
            self.section.clone().unwrap_or_default(),
            &self.text,
        );
        let invalid = |m: String| CorpusError::Parse { line, message: m };
        if self.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        if derived.text != self.text {
            return Err(invalid("text is not whitespace-normalised".into()));
        }
        if let Some(tokens) = &self.tokens {
            if *tokens != derived.tokens {
                return Err(invalid("tokens do not match text".into()));
            }
        }
        if let Some(wc) = self.word_count {
            if wc != derived.word_count {
                return Err(invalid(format!(
                    "word_count {wc} does not match text ({} words)",
                    derived.word_count
                )));
            }
        }
        Ok(derived)
    }
}

pub fn read_lines(path: &Path) -> Result<Vec<(usize, RecordLine)>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, parsed));
    }
    Ok(out)
}

pub fn write_lines<'a>(lines: impl IntoIterator<Item = &'a RecordLine>, path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for line in lines {
        let json = serde_json::to_string(line).expect("record lines always serialize");
        w.write_all(json.as_bytes()).map_err(io_err)?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn check_unique<'a>(ids: impl Iterator<Item = (usize, &'a str)>) -> Result<(), CorpusError> {
    let mut seen = HashSet::new();
    for (line, id) in ids {
        if !seen.insert(id) {
            return Err(CorpusError::Validation(format!("line {line}: duplicate id {id:?}")));
        }
    }
    Ok(())
}

/// Load an unlabeled corpus (labels, if present, are ignored).
pub fn load_records(path: &Path) -> Result<Vec<SentenceRecord>, CorpusError> {
    let lines = read_lines(path)?;
    check_unique(lines.iter().map(|(n, l)| (*n, l.id.as_str())))?;
    lines.iter().map(|(n, l)| l.to_record(*n)).collect()
}

pub fn load_labeled(path: &Path) -> Result<Vec<LabeledExample>, CorpusError> {
    let lines = read_lines(path)?;
    check_unique(lines.iter().map(|(n, l)| (*n, l.id.as_str())))?;
    lines
        .iter()
        .map(|(n, l)| {
            let record = l.to_record(*n)?;
            match l.label {
                Some(v @ (0 | 1)) => Ok(LabeledExample { record, label: v as u8 }),
                Some(v) => Err(CorpusError::Validation(format!("line {n}: label {v} is not 0 or 1"))),
                None => Err(CorpusError::Validation(format!("line {n}: missing label"))),
            }
        })
        .collect()
}

pub fn save_records(records: &[SentenceRecord], path: &Path) -> Result<(), CorpusError> {
    let lines: Vec<RecordLine> = records.iter().map(RecordLine::from_record).collect();
    write_lines(&lines, path)
}

pub fn save_labeled(examples: &[LabeledExample], path: &Path) -> Result<(), CorpusError> {
    let lines: Vec<RecordLine> = examples.iter().map(RecordLine::from_example).collect();
    write_lines(&lines, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn minimal_labeled_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "l.jsonl",
            "{\"id\":\"aes#2\",\"text\":\"The AES unit is stalled.\",\"label\":1}\n",
        );
        let ex = load_labeled(&p).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].label, 1);
        assert_eq!(ex[0].record.doc, "aes");
        assert_eq!(ex[0].record.word_count, 5);
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "bad.jsonl",
            "{\"id\":\"a\",\"text\":\"ok\",\"label\":0}\n{\"id\":\"b\"}\n",
        );
        match load_labeled(&p) {
            Err(CorpusError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(dir.path(), "lab.jsonl", "{\"id\":\"a\",\"text\":\"ok\",\"label\":3}\n");
        assert!(matches!(load_labeled(&p), Err(CorpusError::Validation(_))));
        let p = write(
            dir.path(),
            "dup.jsonl",
            "{\"id\":\"a\",\"text\":\"ok\",\"label\":0}\n{\"id\":\"a\",\"text\":\"no\",\"label\":1}\n",
        );
        assert!(matches!(load_labeled(&p), Err(CorpusError::Validation(_))));
        let p = write(
            dir.path(),
            "wc.jsonl",
            "{\"id\":\"a\",\"text\":\"two words\",\"word_count\":3,\"label\":0}\n",
        );
        assert!(matches!(load_labeled(&p), Err(CorpusError::Parse { line: 1, .. })));
    }

    #[test]
    fn save_load_is_identity_and_canonical() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "in.jsonl",
            "{\"label\":1,\"text\":\"Key  must be wiped.\",\"id\":\"k#1\"}\n"
                .replace("  ", " ")
                .as_str(),
        );
        let first = load_labeled(&p).unwrap();
        let out = dir.path().join("out.jsonl");
        save_labeled(&first, &out).unwrap();
        let second = load_labeled(&out).unwrap();
        assert_eq!(first, second);
        let out2 = dir.path().join("out2.jsonl");
        save_labeled(&second, &out2).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
        let body = std::fs::read_to_string(&out).unwrap();
        assert_eq!(
            body,
            "{\"id\":\"k#1\",\"doc\":\"k\",\"section\":\"\",\"text\":\"Key must be wiped.\",\"tokens\":[\"Key\",\"must\",\"be\",\"wiped.\"],\"word_count\":4,\"label\":1}\n"
        );
    }
}
