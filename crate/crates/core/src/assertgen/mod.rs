//! Compile property sentences into SystemVerilog assertions: bind noun
//! phrases to RTL paths through a register map, map verb phrases to
//! operators through a verb table, and place conditional clauses on the left
//! of an implication.

mod sva;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::formalize::split_text;
use crate::lexicon::{is_numeric, Lexicon, PosTag};
use crate::text;

pub use sva::{validate_sva, validate_sva_file, SvaError};

#[derive(Debug, Error)]
pub enum AssertError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}: {message}")]
    Parse { source_name: String, message: String },
    #[error("{source_name}: entry {entry} ({key:?}): {message}")]
    Entry {
        source_name: String,
        entry: usize,
        key: String,
        message: String,
    },
    #[error("unmappable property: no noun phrase of {span:?} is in the register map")]
    Unmappable { span: String },
    #[error("no operator for predicate {span:?}")]
    NoOperator { span: String },
    #[error("template {template:?} refers to unmapped phrase {phrase:?}")]
    Template { template: String, phrase: String },
    #[error("generated assertion failed validation: {0}")]
    Invalid(String),
}

fn path_grammar() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_$]*(\.[A-Za-z_][A-Za-z0-9_$]*)*$").expect("valid regex"))
}

/// JSON object entries in file order, duplicates kept.
struct OrderedEntries(Vec<(String, String)>);

impl<'de> Deserialize<'de> for OrderedEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedEntries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of string to string")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(OrderedEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

fn normalize_phrase(p: &str) -> String {
    text::normalize_whitespace(&p.to_lowercase())
}

fn phrase_words(p: &str) -> Vec<String> {
    p.split_whitespace().map(|w| text::core(w).to_lowercase()).collect()
}

/// Noun phrase to RTL path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegisterMap {
    pub design: String,
    pub entries: BTreeMap<String, String>,
    /// Clock and reset names for this design, when not `clk`/`rst`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clock: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reset: Option<String>,
}

impl RegisterMap {
    pub fn from_json(text: &str, source_name: &str) -> Result<Self, AssertError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(default)]
            design: String,
            entries: OrderedEntries,
            clock: Option<String>,
            reset: Option<String>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| AssertError::Parse {
            source_name: source_name.into(),
            message: e.to_string(),
        })?;
        let entry_err = |entry: usize, key: &str, message: String| AssertError::Entry {
            source_name: source_name.into(),
            entry,
            key: key.into(),
            message,
        };
        if raw.entries.0.is_empty() {
            return Err(AssertError::Parse {
                source_name: source_name.into(),
                message: "register map has no entries".into(),
            });
        }
        let mut entries = BTreeMap::new();
        for (i, (phrase, path)) in raw.entries.0.iter().enumerate() {
            let key = normalize_phrase(phrase);
            if key.is_empty() {
                return Err(entry_err(i + 1, phrase, "empty phrase".into()));
            }
            if !path_grammar().is_match(path) {
                return Err(entry_err(i + 1, phrase, format!("malformed RTL path {path:?}")));
            }
            if entries.insert(key.clone(), path.clone()).is_some() {
                return Err(entry_err(i + 1, phrase, format!("duplicate phrase {key:?}")));
            }
        }
        for (name, v) in [("clock", &raw.clock), ("reset", &raw.reset)] {
            if let Some(v) = v {
                if !path_grammar().is_match(v) {
                    return Err(AssertError::Parse {
                        source_name: source_name.into(),
                        message: format!("malformed {name} name {v:?}"),
                    });
                }
            }
        }
        Ok(RegisterMap {
            design: raw.design,
            entries,
            clock: raw.clock,
            reset: raw.reset,
        })
    }

    pub fn lookup(&self, phrase: &str) -> Option<&str> {
        self.entries.get(&normalize_phrase(phrase)).map(String::as_str)
    }
}

pub fn load_register_map(path: &Path) -> Result<RegisterMap, AssertError> {
    RegisterMap::from_json(&read(path)?, &path.display().to_string())
}

fn read(path: &Path) -> Result<String, AssertError> {
    std::fs::read_to_string(path).map_err(|source| AssertError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Antecedent marker template.
pub const IMPLIES: &str = "|->";

const DEFAULT_VERBS: &[(&str, &str)] = &[
    ("if", IMPLIES),
    ("when", IMPLIES),
    ("whenever", IMPLIES),
    ("once", IMPLIES),
    ("upon", IMPLIES),
    ("while", IMPLIES),
    ("after", IMPLIES),
    ("is set to X", "== X"),
    ("are set to X", "== X"),
    ("is cleared", "== 0"),
    ("are cleared", "== 0"),
    ("is wiped", "== 0"),
    ("are wiped", "== 0"),
    ("is deasserted", "== 0"),
    ("is disabled", "== 0"),
    ("is set", "== 1"),
    ("are set", "== 1"),
    ("is asserted", "== 1"),
    ("is triggered", "== 1"),
    ("is enabled", "== 1"),
    ("is locked", "== 1"),
    ("stays", "$stable"),
    ("stay", "$stable"),
    ("remains", "$stable"),
    ("remain", "$stable"),
    ("has not yet been read", "$past"),
    ("has been", "$past"),
];

/// A verb-table template operand.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Operand {
    Capture,
    Number(String),
    Phrase(String),
    PastPhrase(String),
    PastCapture,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Template {
    Implies,
    Stable,
    Past,
    Compare(&'static str, Operand),
}

fn parse_template(t: &str) -> Option<Template> {
    let t = t.trim();
    match t {
        IMPLIES => return Some(Template::Implies),
        "$stable" => return Some(Template::Stable),
        "$past" => return Some(Template::Past),
        _ => {}
    }
    let (op, rest) = if let Some(r) = t.strip_prefix("==") {
        ("==", r.trim())
    } else {
        let r = t.strip_prefix("!=")?;
        ("!=", r.trim())
    };
    let braced = |s: &str| {
        s.strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .map(normalize_phrase)
            .filter(|p| !p.is_empty())
    };
    let operand = if rest == "X" {
        Operand::Capture
    } else if is_numeric(rest) {
        Operand::Number(rest.to_string())
    } else if let Some(inner) = rest.strip_prefix("$past(").and_then(|s| s.strip_suffix(')')) {
        if inner.trim() == "X" {
            Operand::PastCapture
        } else {
            Operand::PastPhrase(braced(inner.trim())?)
        }
    } else {
        Operand::Phrase(braced(rest)?)
    };
    Some(Template::Compare(op, operand))
}

/// Verb pattern to operator template. `X` in a pattern captures one
/// number or bound register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbOperatorTable {
    entries: BTreeMap<String, String>,
}

impl Default for VerbOperatorTable {
    fn default() -> Self {
        VerbOperatorTable {
            entries: DEFAULT_VERBS
                .iter()
                .map(|(p, t)| (p.to_string(), t.to_string()))
                .collect(),
        }
    }
}

fn normalize_pattern(p: &str) -> String {
    p.split_whitespace()
        .map(|w| if w == "X" { w.to_string() } else { w.to_lowercase() })
        .collect::<Vec<_>>()
        .join(" ")
}

impl VerbOperatorTable {
    pub fn from_json(text: &str, source_name: &str) -> Result<Self, AssertError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            entries: OrderedEntries,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| AssertError::Parse {
            source_name: source_name.into(),
            message: e.to_string(),
        })?;
        if raw.entries.0.is_empty() {
            return Err(AssertError::Parse {
                source_name: source_name.into(),
                message: "verb table has no entries".into(),
            });
        }
        let mut entries = BTreeMap::new();
        for (i, (pattern, template)) in raw.entries.0.iter().enumerate() {
            let err = |message: String| AssertError::Entry {
                source_name: source_name.into(),
                entry: i + 1,
                key: pattern.clone(),
                message,
            };
            let key = normalize_pattern(pattern);
            if key.is_empty() || key == "X" {
                return Err(err("pattern needs at least one word".into()));
            }
            let parsed = parse_template(template).ok_or_else(|| err(format!("unsupported template {template:?}")))?;
            let captures = key.split(' ').filter(|w| *w == "X").count();
            let uses_capture = matches!(parsed, Template::Compare(_, Operand::Capture | Operand::PastCapture));
            if uses_capture && captures != 1 {
                return Err(err("template uses X but the pattern has no single X".into()));
            }
            if parsed == Template::Implies && key.contains(' ') {
                return Err(err("implication markers must be single conjunctions".into()));
            }
            if entries.insert(key.clone(), template.trim().to_string()).is_some() {
                return Err(err(format!("duplicate pattern {key:?}")));
            }
        }
        Ok(VerbOperatorTable { entries })
    }

    /// Defaults overridden and extended by `other`.
    pub fn merged(mut self, other: &VerbOperatorTable) -> Self {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    fn is_antecedent_marker(&self, word: &str) -> bool {
        self.entries.get(&word.to_lowercase()).is_some_and(|t| t == IMPLIES)
    }

    /// Operator patterns, longest first.
    fn operator_patterns(&self) -> Vec<(Vec<&str>, Template, &str)> {
        let mut out: Vec<(Vec<&str>, Template, &str)> = self
            .entries
            .iter()
            .filter_map(|(p, t)| {
                let tpl = parse_template(t)?;
                (tpl != Template::Implies).then(|| (p.split(' ').collect(), tpl, t.as_str()))
            })
            .collect();
        out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

/// Load a verb table file and merge it over the defaults.
pub fn load_verb_table(path: &Path) -> Result<VerbOperatorTable, AssertError> {
    let file = VerbOperatorTable::from_json(&read(path)?, &path.display().to_string())?;
    Ok(VerbOperatorTable::default().merged(&file))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateConfig {
    pub clock: String,
    pub reset: String,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig {
            clock: "clk".into(),
            reset: "rst".into(),
        }
    }
}

impl TemplateConfig {
    pub fn for_design(map: &RegisterMap) -> Self {
        let d = TemplateConfig::default();
        TemplateConfig {
            clock: map.clock.clone().unwrap_or(d.clock),
            reset: map.reset.clone().unwrap_or(d.reset),
        }
    }
}

/// A register-map phrase found in a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NounBinding {
    /// Sentence text covered by the phrase.
    pub span: String,
    pub phrase: String,
    pub path: String,
    /// Whitespace-token range `[start, end)`.
    pub tokens: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BindResult {
    pub bindings: Vec<NounBinding>,
    /// Noun runs not covered by any binding.
    pub unbound: Vec<String>,
}

/// Longest-match, left-to-right binding of register-map phrases.
pub fn bind_nouns(sentence: &str, map: &RegisterMap, lexicon: &Lexicon) -> BindResult {
    let spans = text::whitespace_spans(sentence);
    let toks: Vec<&str> = spans.iter().map(|&(a, b)| &sentence[a..b]).collect();
    let words: Vec<String> = toks.iter().map(|t| text::core(t).to_lowercase()).collect();
    let phrases: Vec<(Vec<String>, &String, &String)> =
        map.entries.iter().map(|(p, path)| (phrase_words(p), p, path)).collect();
    let mut bindings = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let best = phrases
            .iter()
            .filter(|(pw, _, _)| !pw.is_empty() && i + pw.len() <= words.len() && words[i..i + pw.len()] == pw[..])
            .max_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| b.1.cmp(a.1)));
        match best {
            Some((pw, phrase, path)) => {
                let end = i + pw.len();
                let (_, c0, _) = text::split_core(toks[i]);
                let start_byte = spans[i].0 + toks[i].find(c0).unwrap_or(0);
                let last = toks[end - 1];
                let (_, c1, _) = text::split_core(last);
                let end_byte = spans[end - 1].0 + last.find(c1).unwrap_or(0) + c1.len();
                bindings.push(NounBinding {
                    span: sentence[start_byte..end_byte].to_string(),
                    phrase: (*phrase).clone(),
                    path: (*path).clone(),
                    tokens: (i, end),
                });
                i = end;
            }
            None => i += 1,
        }
    }
    let tags = lexicon.tag_pos(&toks);
    let covered = |k: usize| bindings.iter().any(|b| b.tokens.0 <= k && k < b.tokens.1);
    let mut unbound = Vec::new();
    let mut run: Vec<&str> = Vec::new();
    for k in 0..toks.len() {
        if tags[k] == PosTag::Noun && !covered(k) {
            run.push(text::core(toks[k]));
            if text::split_core(toks[k]).2.is_empty() {
                continue;
            }
        }
        if !run.is_empty() {
            unbound.push(run.join(" "));
            run.clear();
        }
    }
    if !run.is_empty() {
        unbound.push(run.join(" "));
    }
    BindResult { bindings, unbound }
}

/// A property sentence to compile, with an optional explicit error message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Read one property per non-blank JSONL line.
pub fn load_properties(path: &Path) -> Result<Vec<PropertySpec>, AssertError> {
    let text = read(path)?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let p: PropertySpec = serde_json::from_str(line).map_err(|e| AssertError::Parse {
            source_name: format!("{name}:{}", i + 1),
            message: e.to_string(),
        })?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathBinding {
    pub phrase: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assertion {
    pub property_id: String,
    pub source: String,
    /// Expression inside the clocked property.
    pub body: String,
    /// The full `assert property ...;` block.
    pub sva_text: String,
    pub bindings: Vec<PathBinding>,
    pub error_message: String,
}

impl Assertion {
    /// Source comment line followed by the assertion block.
    pub fn render(&self) -> String {
        format!("// {}: {}\n{}", self.property_id, self.source, self.sva_text)
    }
}

#[derive(Debug, Clone)]
struct Clause {
    /// Whitespace-token range in the sentence.
    tokens: (usize, usize),
    antecedent: bool,
}

/// Clauses from formalize's fragments: antecedent conjunctions open a
/// left-hand clause, other conjunction-led fragments continue the previous
/// clause, and "but" starts a new one.
fn clauses(sentence: &str, table: &VerbOperatorTable, lexicon: &Lexicon) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    for f in split_text(sentence, lexicon) {
        match &f.leading_conjunction {
            Some(c) if table.is_antecedent_marker(c) => out.push(Clause {
                tokens: f.span,
                antecedent: true,
            }),
            Some(_) if !out.is_empty() => {
                if let Some(last) = out.last_mut() {
                    last.tokens.1 = f.span.1;
                }
            }
            _ => out.push(Clause {
                tokens: f.span,
                antecedent: false,
            }),
        }
    }
    let toks: Vec<&str> = sentence.split_whitespace().collect();
    let mut split = Vec::new();
    for c in out {
        let mut start = c.tokens.0;
        let mut antecedent = c.antecedent;
        for (k, tok) in toks.iter().enumerate().take(c.tokens.1).skip(c.tokens.0 + 1) {
            if text::core(tok).eq_ignore_ascii_case("but") {
                split.push(Clause {
                    tokens: (start, k),
                    antecedent,
                });
                start = k;
                antecedent = false;
            }
        }
        split.push(Clause {
            tokens: (start, c.tokens.1),
            antecedent,
        });
    }
    split
}

#[derive(Debug, Clone, PartialEq)]
enum Item<'a> {
    Word(String),
    Bound(&'a NounBinding),
}

fn clause_items<'a>(toks: &[&str], clause: &Clause, bindings: &'a [NounBinding]) -> Vec<Item<'a>> {
    let mut items = Vec::new();
    let mut k = clause.tokens.0;
    while k < clause.tokens.1 {
        if let Some(b) = bindings.iter().find(|b| b.tokens.0 == k) {
            items.push(Item::Bound(b));
            k = b.tokens.1.max(k + 1);
        } else {
            items.push(Item::Word(text::core(toks[k]).to_lowercase()));
            k += 1;
        }
    }
    items
}

/// Bindings whose path prefixes another binding's path in the same clause.
fn is_scope(b: &NounBinding, items: &[Item]) -> bool {
    let prefix = format!("{}.", b.path);
    items
        .iter()
        .any(|it| matches!(it, Item::Bound(o) if o.path.starts_with(&prefix)))
}

struct Compiled {
    expr: String,
    used: Vec<PathBinding>,
}

fn resolve(phrase: &str, map: &RegisterMap, template: &str) -> Result<PathBinding, AssertError> {
    map.lookup(phrase)
        .map(|p| PathBinding {
            phrase: phrase.to_string(),
            path: p.to_string(),
        })
        .ok_or_else(|| AssertError::Template {
            template: template.to_string(),
            phrase: phrase.to_string(),
        })
}

fn bound_binding(b: &NounBinding) -> PathBinding {
    PathBinding {
        phrase: b.phrase.clone(),
        path: b.path.clone(),
    }
}

/// The first operator pattern in a clause applied to the clause's subject.
fn compile_operator(
    items: &[Item],
    patterns: &[(Vec<&str>, Template, &str)],
    map: &RegisterMap,
) -> Result<Option<Compiled>, AssertError> {
    for pos in 0..items.len() {
        for (pat, tpl, raw) in patterns {
            if pos + pat.len() > items.len() {
                continue;
            }
            let mut capture: Option<(usize, String, Option<PathBinding>)> = None;
            let matched = pat.iter().enumerate().all(|(k, w)| match (&items[pos + k], *w) {
                (Item::Bound(b), "X") => {
                    capture = Some((pos + k, b.path.clone(), Some(bound_binding(b))));
                    true
                }
                (Item::Word(word), "X") if is_numeric(word) => {
                    capture = Some((pos + k, word.clone(), None));
                    true
                }
                (Item::Word(word), w) => word == w,
                _ => false,
            });
            if !matched {
                continue;
            }
            let captured_at = capture.as_ref().map(|c| c.0);
            let subject = items[..pos]
                .iter()
                .rev()
                .chain(items[pos + pat.len()..].iter())
                .find_map(|it| match it {
                    Item::Bound(b) if !is_scope(b, items) => Some(*b),
                    _ => None,
                })
                .filter(|b| captured_at.is_none_or(|c| !matches!(&items[c], Item::Bound(x) if x == b)));
            let Some(subject) = subject else {
                continue;
            };
            let mut used = vec![bound_binding(subject)];
            let s = &subject.path;
            let expr = match tpl {
                Template::Implies => continue,
                Template::Stable => format!("$stable({s})"),
                Template::Past => format!("$past({s})"),
                Template::Compare(op, operand) => {
                    let rhs = match operand {
                        Operand::Number(n) => n.clone(),
                        Operand::Capture | Operand::PastCapture => {
                            let Some((_, value, binding)) = capture.clone() else {
                                continue;
                            };
                            used.extend(binding);
                            if *operand == Operand::PastCapture {
                                format!("$past({value})")
                            } else {
                                value
                            }
                        }
                        Operand::Phrase(p) => {
                            let b = resolve(p, map, raw)?;
                            let path = b.path.clone();
                            used.push(b);
                            path
                        }
                        Operand::PastPhrase(p) => {
                            let b = resolve(p, map, raw)?;
                            let path = format!("$past({})", b.path);
                            used.push(b);
                            path
                        }
                    };
                    format!("{s} {op} {rhs}")
                }
            };
            return Ok(Some(Compiled { expr, used }));
        }
    }
    Ok(None)
}

fn clause_text(toks: &[&str], c: &Clause) -> String {
    toks[c.tokens.0..c.tokens.1].join(" ")
}

/// Consequent text without its leading connective or closing punctuation.
fn synthesize_message(toks: &[&str], c: &Clause, lexicon: &Lexicon) -> String {
    let words = &toks[c.tokens.0..c.tokens.1];
    let skip = words
        .iter()
        .take_while(|w| {
            let core = text::core(w).to_lowercase();
            lexicon.is_conjunction(&core) || matches!(core.as_str(), "but" | "and" | "or" | "then")
        })
        .count();
    let msg = words[skip..].join(" ");
    msg.trim_end_matches([',', '.', ';', ':', '!', '?']).to_string()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Assertion block with the clock, reset and error-message layout.
pub fn render_sva(body: &str, message: &str, cfg: &TemplateConfig) -> String {
    format!(
        "assert property (\n  @(posedge {}) disable iff ({}) // Security Property\n    {}\n  )\n  else // Error Message\n    $error(\"%m {}\");\n",
        cfg.clock,
        cfg.reset,
        body,
        escape(message)
    )
}

pub fn generate_assertion(
    property: &PropertySpec,
    map: &RegisterMap,
    table: &VerbOperatorTable,
    cfg: &TemplateConfig,
    lexicon: &Lexicon,
) -> Result<Assertion, AssertError> {
    let sentence = text::normalize_whitespace(&property.text);
    let bound = bind_nouns(&sentence, map, lexicon);
    if bound.bindings.is_empty() {
        return Err(AssertError::Unmappable { span: sentence });
    }
    let toks: Vec<&str> = sentence.split_whitespace().collect();
    let patterns = table.operator_patterns();
    let clauses = clauses(&sentence, table, lexicon);

    let mut antecedents = Vec::new();
    let mut consequent: Option<(Compiled, &Clause)> = None;
    for c in &clauses {
        let items = clause_items(&toks, c, &bound.bindings);
        let op = compile_operator(&items, &patterns, map)?;
        if c.antecedent {
            let compiled = match op {
                Some(op) => Some(op),
                None => items.iter().find_map(|it| match it {
                    Item::Bound(b) if !is_scope(b, &items) => Some(Compiled {
                        expr: b.path.clone(),
                        used: vec![bound_binding(b)],
                    }),
                    _ => None,
                }),
            };
            antecedents.extend(compiled);
        } else if consequent.is_none() {
            if let Some(op) = op {
                consequent = Some((op, c));
            }
        }
    }
    let Some((cons, cons_clause)) = consequent else {
        let span = clauses
            .iter()
            .find(|c| !c.antecedent)
            .or(clauses.first())
            .map(|c| clause_text(&toks, c))
            .unwrap_or_default();
        return Err(AssertError::NoOperator { span });
    };

    let mut body = String::new();
    let mut bindings: Vec<PathBinding> = Vec::new();
    for a in antecedents.into_iter().chain(std::iter::once(cons)) {
        if !body.is_empty() {
            body.push_str(" |-> ");
        }
        body.push_str(&a.expr);
        for b in a.used {
            if !bindings.contains(&b) {
                bindings.push(b);
            }
        }
    }
    let message = property
        .message
        .clone()
        .unwrap_or_else(|| synthesize_message(&toks, cons_clause, lexicon));
    let sva_text = render_sva(&body, &message, cfg);
    validate_sva(&sva_text)
        .map_err(|errs| AssertError::Invalid(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))?;
    Ok(Assertion {
        property_id: property.id.clone(),
        source: sentence,
        body,
        sva_text,
        bindings,
        error_message: message,
    })
}

/// Compile every property; results are ordered by property id.
pub fn generate_all(
    properties: &[PropertySpec],
    map: &RegisterMap,
    table: &VerbOperatorTable,
    cfg: &TemplateConfig,
    lexicon: &Lexicon,
) -> Vec<(String, Result<Assertion, AssertError>)> {
    let mut out: Vec<(String, Result<Assertion, AssertError>)> = properties
        .par_iter()
        .map(|p| (p.id.clone(), generate_assertion(p, map, table, cfg, lexicon)))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    let mut seen = HashSet::new();
    out.retain(|(id, _)| seen.insert(id.clone()));
    out
}
