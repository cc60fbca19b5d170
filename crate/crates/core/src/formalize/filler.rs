use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use super::{analyze_completeness, FormalizeError, MaskedFragment};
use crate::adapter::{AdapterClient, Endpoint};
use crate::lexicon::{inflect, is_auxiliary, Lexicon, PosTag, VerbForm};
use crate::text::{self, MASK};

/// Source of replacement text for `[MASK]` placeholders.
pub trait MaskFiller: Send + Sync {
    /// The fragment text with every mask replaced.
    fn fill(&self, masked: &MaskedFragment, lexicon: &Lexicon) -> Result<String, FormalizeError>;
}

/// Deterministic dictionary filler.
///
/// - subject before a participle: `system is` (`When system is resetting`)
/// - subject before a verb mask: `value`; verb mask before a number: `is set`
/// - subject before a bare verb: `module`, with the verb put in third person
/// - any other verb mask: `is`; any other subject: `module`
#[derive(Debug, Clone, Copy, Default)]
pub struct RulesFiller;

impl MaskFiller for RulesFiller {
    fn fill(&self, masked: &MaskedFragment, lexicon: &Lexicon) -> Result<String, FormalizeError> {
        let mut toks = masked.tokens.clone();
        let tags = lexicon.tag_pos(&toks);
        let mut fills: Vec<(usize, String)> = Vec::new();
        for i in 0..toks.len() {
            if toks[i] != MASK {
                continue;
            }
            let next = (i + 1..toks.len()).find(|&j| toks[j] == MASK || tags[j] != PosTag::Adv);
            let role = if fills.len() < masked.roles.len() {
                masked.roles[fills.len()]
            } else {
                PosTag::Noun
            };
            let fill = match role {
                PosTag::Verb => match next {
                    Some(j) if tags[j] == PosTag::Num => "is set".to_string(),
                    _ => "is".to_string(),
                },
                _ => match next {
                    Some(j) if toks[j] == MASK => "value".to_string(),
                    Some(j) if tags[j] == PosTag::Verb && !is_auxiliary(text::core(&toks[j])) => {
                        match lexicon.tagger().verb_lemma(text::core(&toks[j])) {
                            Some((_, VerbForm::Gerund | VerbForm::Past)) => "system is".to_string(),
                            Some((lemma, VerbForm::Base)) => {
                                let (lead, core, trail) = text::split_core(&toks[j]);
                                let agreed = text::match_case(core, &inflect(&lemma, VerbForm::ThirdSingular));
                                toks[j] = format!("{lead}{agreed}{trail}");
                                "module".to_string()
                            }
                            _ => "module".to_string(),
                        }
                    }
                    _ => "module".to_string(),
                },
            };
            fills.push((i, fill));
        }
        Ok(substitute(&toks, &fills, masked.sentence_initial))
    }
}

/// Replace mask tokens by their fills; capitalise a sentence-initial fill and
/// lowercase the title-case word it displaces.
fn substitute(toks: &[String], fills: &[(usize, String)], sentence_initial: bool) -> String {
    let mut out: Vec<String> = toks.to_vec();
    for (i, fill) in fills {
        out[*i] = fill.clone();
    }
    if sentence_initial {
        if let Some((0, fill)) = fills.first() {
            out[0] = text::capitalize(fill);
            if let Some(j) = (1..toks.len()).find(|j| !fills.iter().any(|(k, _)| k == j)) {
                if text::is_titlecase(&out[j]) && !text::is_register_like(text::core(&out[j])) {
                    out[j] = text::decapitalize(&out[j]);
                }
            }
        }
    }
    out.join(" ")
}

/// Fills masks with the external model's top-ranked candidates. Any adapter
/// failure or unusable reply falls back to [`RulesFiller`] with a warning.
pub struct AdapterFiller {
    client: Option<AdapterClient>,
    fallbacks: AtomicUsize,
}

impl AdapterFiller {
    /// Connect to `endpoint`; an unreachable adapter is reported once and
    /// every fill then uses the rules.
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Self {
        let client = match AdapterClient::connect(endpoint, timeout) {
            Ok(c) => Some(c),
            Err(e) => {
                log::warn!("{e}; mask filling falls back to rules");
                None
            }
        };
        AdapterFiller {
            client,
            fallbacks: AtomicUsize::new(0),
        }
    }

    pub fn from_client(client: AdapterClient) -> Self {
        AdapterFiller {
            client: Some(client),
            fallbacks: AtomicUsize::new(0),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.client.is_some()
    }

    /// Number of fragments filled by the rules instead of the adapter.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    fn try_adapter(&self, masked: &MaskedFragment, lexicon: &Lexicon) -> Result<String, FormalizeError> {
        let client = self.client.as_ref().ok_or(crate::adapter::AdapterError::Closed)?;
        let candidates = client.fill_mask(&masked.text())?;
        let positions = masked.mask_positions();
        if candidates.len() != positions.len() {
            return Err(FormalizeError::FillCount {
                expected: positions.len(),
                got: candidates.len(),
            });
        }
        let mut fills = Vec::with_capacity(positions.len());
        for (pos, cands) in positions.iter().zip(candidates) {
            let top = cands.into_iter().next().unwrap_or_default();
            let top = text::normalize_whitespace(&top);
            let usable = !top.is_empty()
                && !top.contains(MASK)
                && !top.contains(',')
                && !top.split_whitespace().any(|w| lexicon.is_conjunction(w));
            if !usable {
                return Err(FormalizeError::BadFill(top));
            }
            fills.push((*pos, top));
        }
        let filled = substitute(&masked.tokens, &fills, masked.sentence_initial);
        if !analyze_completeness(&filled, lexicon).is_empty() {
            return Err(FormalizeError::BadFill(filled));
        }
        Ok(filled)
    }
}

impl MaskFiller for AdapterFiller {
    fn fill(&self, masked: &MaskedFragment, lexicon: &Lexicon) -> Result<String, FormalizeError> {
        match self.try_adapter(masked, lexicon) {
            Ok(s) => Ok(s),
            Err(e) => {
                if self.client.is_some() {
                    log::warn!("adapter fill failed for {:?}: {e}; using rules", masked.text());
                }
                self.fallbacks.fetch_add(1, Ordering::Relaxed);
                RulesFiller.fill(masked, lexicon)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::tests::mock_server;
    use crate::adapter::DEFAULT_TIMEOUT;
    use serde_json::{json, Value};

    fn masked(tokens: &[&str], roles: &[PosTag], initial: bool) -> MaskedFragment {
        MaskedFragment {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            roles: roles.to_vec(),
            sentence_initial: initial,
        }
    }

    #[test]
    fn rules_reproduce_figure_rows() {
        let lex = Lexicon::default();
        let f = |t: &[&str], r: &[PosTag], i| RulesFiller.fill(&masked(t, r, i), &lex).unwrap();
        assert_eq!(
            f(&["When", MASK, "resetting"], &[PosTag::Noun], true),
            "When system is resetting"
        );
        assert_eq!(
            f(&["if", MASK, MASK, "0"], &[PosTag::Noun, PosTag::Verb], false),
            "if value is set 0"
        );
        assert_eq!(
            f(&[MASK, "allow", "requests"], &[PosTag::Noun], false),
            "module allows requests"
        );
        assert_eq!(
            f(&[MASK, "Allow", "requests"], &[PosTag::Noun], true),
            "Module allows requests"
        );
        assert_eq!(f(&["the", "mode", MASK], &[PosTag::Verb], false), "the mode is");
    }

    fn reply(req: &Value) -> Option<Value> {
        let text = req["text"].as_str().unwrap_or_default();
        let n = text.matches(MASK).count();
        Some(if text.starts_with("When") {
            json!({"id": req["id"], "candidates": vec![vec!["core is"]; n]})
        } else if text.starts_with("if") {
            json!({"id": req["id"], "candidates": [["when"], ["is"]]})
        } else {
            json!({"id": req["id"], "error": "no idea"})
        })
    }

    #[test]
    fn adapter_top_candidate_and_fallbacks() {
        let lex = Lexicon::default();
        let ep: Endpoint = mock_server(reply).parse().unwrap();
        let filler = AdapterFiller::connect(&ep, DEFAULT_TIMEOUT);
        assert!(filler.is_connected());
        let m = masked(&["When", MASK, "resetting"], &[PosTag::Noun], false);
        assert_eq!(filler.fill(&m, &lex).unwrap(), "When core is resetting");
        assert_eq!(filler.fallback_count(), 0);
        // a conjunction fill would re-split the sentence
        let m = masked(&["if", MASK, MASK, "0"], &[PosTag::Noun, PosTag::Verb], false);
        assert_eq!(filler.fill(&m, &lex).unwrap(), "if value is set 0");
        let m = masked(&[MASK, "allow", "requests"], &[PosTag::Noun], false);
        assert_eq!(filler.fill(&m, &lex).unwrap(), "module allows requests");
        assert_eq!(filler.fallback_count(), 2);
    }

    #[test]
    fn unreachable_adapter_uses_rules() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let filler = AdapterFiller::connect(&Endpoint::Tcp(addr.to_string()), Duration::from_millis(200));
        assert!(!filler.is_connected());
        let m = masked(&["When", MASK, "resetting"], &[PosTag::Noun], false);
        assert_eq!(
            filler.fill(&m, &Lexicon::default()).unwrap(),
            "When system is resetting"
        );
        assert_eq!(filler.fallback_count(), 1);
    }
}
