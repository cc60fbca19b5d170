//! Rule-based sentence segmentation for plain-text and markdown documentation.

use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;

use super::{CorpusError, DEFAULT_MIN_WORDS};
use crate::text::normalize_whitespace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocFormat {
    Plain,
    Markdown,
}

impl DocFormat {
    /// `.md`/`.markdown` files are markdown, everything else plain text.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "md" || ext == "markdown" => DocFormat::Markdown,
            _ => DocFormat::Plain,
        }
    }
}

impl FromStr for DocFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plain" | "text" | "txt" => Ok(DocFormat::Plain),
            "markdown" | "md" => Ok(DocFormat::Markdown),
            other => Err(CorpusError::Config(format!(
                "unknown document format {other:?} (expected plain or markdown)"
            ))),
        }
    }
}

/// A sentence with the heading path it appeared under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub section: String,
    pub text: String,
}

/// Abbreviations that never end a sentence (compared lowercase, without the final dot).
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "etc", "fig", "figs", "eq", "eqs", "vs", "cf", "approx", "no", "sec", "al", "ref", "resp", "incl",
    "max", "min", "mr", "dr",
];

const CLOSERS: &[char] = &[')', ']', '"', '\'', '\u{2019}', '\u{201d}'];

/// Decode and segment raw bytes.
pub fn segment_bytes(raw: &[u8], format: DocFormat) -> Result<Vec<String>, CorpusError> {
    let text = decode(raw)?;
    Ok(segment_sentences(text, format))
}

pub(crate) fn decode(raw: &[u8]) -> Result<&str, CorpusError> {
    let text = std::str::from_utf8(raw).map_err(|e| CorpusError::Decode {
        offset: e.valid_up_to(),
    })?;
    Ok(text.strip_prefix('\u{feff}').unwrap_or(text))
}

pub fn segment_sentences(raw_text: &str, format: DocFormat) -> Vec<String> {
    segment_document(raw_text, format).into_iter().map(|s| s.text).collect()
}

/// Segment a document, tracking the heading path for markdown input.
pub fn segment_document(raw_text: &str, format: DocFormat) -> Vec<Segment> {
    let blocks = match format {
        DocFormat::Plain => plain_blocks(raw_text),
        DocFormat::Markdown => markdown_blocks(raw_text),
    };
    let mut out = Vec::new();
    for block in blocks {
        let text = match format {
            DocFormat::Markdown => strip_inline_markup(&block.text),
            DocFormat::Plain => block.text.clone(),
        };
        let sentences = split_block(&normalize_whitespace(&text));
        if block.list_item {
            let keep = sentences.len() > 1
                || sentences
                    .iter()
                    .any(|s| ends_terminal(s) || s.split_whitespace().count() >= DEFAULT_MIN_WORDS);
            if !keep {
                continue;
            }
        }
        out.extend(sentences.into_iter().map(|text| Segment {
            section: block.section.clone(),
            text,
        }));
    }
    out
}

#[derive(Debug)]
struct Block {
    section: String,
    text: String,
    list_item: bool,
}

fn plain_blocks(text: &str) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut cur = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.trim().is_empty() {
                blocks.push(Block {
                    section: String::new(),
                    text: std::mem::take(&mut cur),
                    list_item: false,
                });
            }
            cur.clear();
        } else {
            cur.push_str(line);
            cur.push('\n');
        }
    }
    if !cur.trim().is_empty() {
        blocks.push(Block {
            section: String::new(),
            text: cur,
            list_item: false,
        });
    }
    blocks
}

static HEADING: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^ {0,3}(#{1,6})\s+(.*?)\s*#*\s*$").unwrap());
static LIST_ITEM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(?:[-*+]|\d+[.)])\s+(.*)$").unwrap());
static TABLE_SEP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*\|?\s*:?-{2,}").unwrap());
static SETEXT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(=+|-+)\s*$").unwrap());
static FENCE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(```|~~~)").unwrap());

struct MarkdownState {
    blocks: Vec<Block>,
    headings: Vec<(usize, String)>,
    lines: Vec<String>,
    list_item: bool,
}

impl MarkdownState {
    fn section(&self) -> String {
        self.headings
            .iter()
            .map(|(_, h)| h.as_str())
            .collect::<Vec<_>>()
            .join(" > ")
    }

    fn flush(&mut self) {
        if !self.lines.is_empty() {
            let text = self.lines.join("\n");
            if !text.trim().is_empty() {
                self.blocks.push(Block {
                    section: self.section(),
                    text,
                    list_item: self.list_item,
                });
            }
        }
        self.lines.clear();
        self.list_item = false;
    }

    fn heading(&mut self, level: usize, text: &str) {
        self.flush();
        let text = normalize_whitespace(&strip_inline_markup(text));
        self.headings.retain(|(l, _)| *l < level);
        if !text.is_empty() {
            self.headings.push((level, text));
        }
    }
}

fn markdown_blocks(text: &str) -> Vec<Block> {
    let mut st = MarkdownState {
        blocks: Vec::new(),
        headings: Vec::new(),
        lines: Vec::new(),
        list_item: false,
    };
    let mut fence: Option<String> = None;
    let mut in_comment = false;
    for line in text.lines() {
        if let Some(marker) = &fence {
            if line.trim_start().starts_with(marker.as_str()) {
                fence = None;
            }
            continue;
        }
        if in_comment {
            if line.contains("-->") {
                in_comment = false;
            }
            continue;
        }
        if let Some(c) = FENCE.captures(line) {
            st.flush();
            fence = Some(c[1].to_string());
            continue;
        }
        let trimmed = line.trim();
        if trimmed.starts_with("<!--") && !trimmed.contains("-->") {
            st.flush();
            in_comment = true;
            continue;
        }
        if trimmed.is_empty() {
            st.flush();
            continue;
        }
        if let Some(c) = HEADING.captures(line) {
            st.heading(c[1].len(), &c[2]);
            continue;
        }
        if SETEXT.is_match(line) {
            if st.lines.len() == 1 && !st.list_item {
                let level = if trimmed.starts_with('=') { 1 } else { 2 };
                let heading = st.lines.pop().unwrap_or_default();
                st.heading(level, &heading);
            } else {
                st.flush();
            }
            continue;
        }
        if trimmed.starts_with('|') || (trimmed.contains('|') && TABLE_SEP.is_match(trimmed)) {
            st.flush();
            continue;
        }
        if let Some(c) = LIST_ITEM.captures(line) {
            st.flush();
            st.list_item = true;
            st.lines.push(c[1].to_string());
            continue;
        }
        let content = trimmed.strip_prefix('>').map(str::trim).unwrap_or(trimmed);
        st.lines.push(content.to_string());
    }
    st.flush();
    st.blocks
}

static IMAGE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"!\[([^\]]*)\]\([^)]*\)").unwrap());
static LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\]]+)\](?:\([^)]*\)|\[[^\]]*\])").unwrap());
static CODE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"`+([^`]*)`+").unwrap());
static STRONG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\*\*([^*]+)\*\*|__([^_]+)__").unwrap());
static EMPH_STAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\*([^*\s][^*]*)\*").unwrap());
static EMPH_UNDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(^|[\s(])_([^_\s][^_]*)_([\s).,;:!?]|$)").unwrap());
static SHORTCODE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{\{[<%].*?[%>]\}\}").unwrap());
static HTML_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[A-Za-z][^>]*>").unwrap());
static HTML_COMMENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<!--.*?-->").unwrap());

/// Remove inline markdown while keeping the visible text.
pub fn strip_inline_markup(s: &str) -> String {
    let s = HTML_COMMENT.replace_all(s, "");
    let s = SHORTCODE.replace_all(&s, "");
    let s = IMAGE.replace_all(&s, "$1");
    let s = LINK.replace_all(&s, "$1");
    let s = CODE.replace_all(&s, "$1");
    let s = STRONG.replace_all(&s, "$1$2");
    let s = EMPH_STAR.replace_all(&s, "$1");
    let s = EMPH_UNDER.replace_all(&s, "$1$2$3");
    HTML_TAG.replace_all(&s, "").into_owned()
}

fn ends_terminal(s: &str) -> bool {
    s.trim_end_matches(CLOSERS).ends_with(['.', '!', '?', ':'])
}

/// Split a whitespace-normalised block into sentences.
fn split_block(block: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = block.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && (matches!(chars[j].1, '.' | '!' | '?') || CLOSERS.contains(&chars[j].1)) {
                j += 1;
            }
            let end_byte = if j < chars.len() { chars[j].0 } else { block.len() };
            let boundary = if j >= chars.len() {
                true
            } else if chars[j].1.is_whitespace() {
                let next = chars[j + 1..].iter().find(|(_, c)| !c.is_whitespace());
                next.is_some_and(|(_, c)| c.is_uppercase()) && !(c == '.' && protected_period(block, start, pos))
            } else {
                false
            };
            if boundary {
                push_sentence(&mut out, &block[start..end_byte]);
                start = end_byte;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    if start < block.len() {
        push_sentence(&mut out, &block[start..]);
    }
    out
}

/// Whether the period at byte `pos` belongs to an abbreviation.
fn protected_period(block: &str, sentence_start: usize, pos: usize) -> bool {
    let before = &block[sentence_start..pos];
    let word = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

fn push_sentence(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if s.chars().any(|c| c.is_alphanumeric()) {
        out.push(s.to_string());
    }
}
