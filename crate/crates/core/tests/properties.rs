use std::collections::BTreeMap;

use proptest::prelude::*;

use nspg_core::augment::{random_deletion, random_insertion, random_swap, synonym_replacement};
use nspg_core::classify::{evaluate, ClassifyError, Metrics, Scorer};
use nspg_core::corpus::{filter_short, LabeledExample, SentenceRecord};
use nspg_core::extract::{dv_coverage, extract_properties, ExtractOptions};
use nspg_core::formalize::{
    build_variant, formalize_sentence, join, split_fragments, DatasetVariant, RulesFiller, VariantOptions,
};
use nspg_core::text;
use nspg_core::Lexicon;

const WORDS: &str = "\
    the some a this module register FIFO CTRL.EN key value data requests unit AES mode state machine is are set \
    cleared read written when if to while before after until unless upon once whenever resetting occur allow \
    stays stalls remains immediately always must should be 0 1 in with no delay pass through host-side hang \
    condition debug main processor";

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(
        (
            prop::sample::select(WORDS.split_whitespace().collect::<Vec<_>>()),
            prop::bool::weighted(0.15),
        ),
        2..18,
    )
    .prop_map(|ws| {
        let n = ws.len();
        let mut out: Vec<String> = ws
            .into_iter()
            .enumerate()
            .map(|(i, (w, comma))| {
                if comma && i + 1 < n {
                    format!("{w},")
                } else {
                    w.to_string()
                }
            })
            .collect();
        out[0] = text::capitalize(&out[0]);
        let last = out.last_mut().expect("non-empty");
        last.push('.');
        out.join(" ")
    })
}

fn rec(i: usize, s: &str) -> SentenceRecord {
    SentenceRecord::new(format!("p#{i}"), "p", "", s)
}

fn cores(s: &str) -> Vec<String> {
    let mut v: Vec<String> = s.split_whitespace().map(|t| text::core(t).to_lowercase()).collect();
    v.retain(|w| !w.is_empty());
    v.sort();
    v
}

fn labeled() -> impl Strategy<Value = Vec<LabeledExample>> {
    prop::collection::vec((sentence(), 0u8..2), 0..12).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (s, l))| LabeledExample::new(rec(i, &s), l).unwrap())
            .collect()
    })
}

struct Fixed(BTreeMap<String, f64>);

impl Scorer for Fixed {
    fn score(&self, text: &str) -> Result<f64, ClassifyError> {
        Ok(self.0.get(text).copied().unwrap_or(0.0))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fragments_rejoin_to_the_sentence(s in sentence()) {
        let lex = Lexicon::default();
        let r = rec(0, &s);
        prop_assert_eq!(join(&split_fragments(&r, &lex)), r.text);
    }

    #[test]
    fn formalization_is_idempotent_and_complete(s in sentence()) {
        let lex = Lexicon::default();
        let once = formalize_sentence(&rec(0, &s), &RulesFiller, &lex).unwrap();
        let twice = formalize_sentence(&once, &RulesFiller, &lex).unwrap();
        prop_assert_eq!(&twice.text, &once.text);
        for f in split_fragments(&once, &lex) {
            prop_assert!(f.is_complete(), "{:?} in {:?} misses {:?}", f.text, once.text, f.missing);
        }
    }

    #[test]
    fn swap_preserves_the_token_multiset(s in sentence(), seed in any::<u64>()) {
        let lex = Lexicon::default();
        if let Some(v) = random_swap(&rec(0, &s), &lex, seed) {
            prop_assert_eq!(cores(&v.text), cores(&s));
        }
    }

    #[test]
    fn deletion_and_insertion_change_one_token(s in sentence(), seed in any::<u64>()) {
        let lex = Lexicon::default();
        let n = s.split_whitespace().count();
        if let Some(v) = random_deletion(&rec(0, &s), &lex, seed) {
            prop_assert_eq!(v.text.split_whitespace().count() + 1, n);
        }
        if let Some(v) = random_insertion(&rec(0, &s), &lex, seed) {
            prop_assert_eq!(v.text.split_whitespace().count(), n + 1);
        }
    }

    #[test]
    fn synonym_replacement_changes_one_token(s in sentence(), seed in any::<u64>()) {
        let lex = Lexicon::default();
        if let Some(v) = synonym_replacement(&rec(0, &s), &lex, seed) {
            let a: Vec<&str> = s.split_whitespace().collect();
            let b: Vec<&str> = v.text.split_whitespace().collect();
            prop_assert_eq!(a.len(), b.len());
            prop_assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 1);
        }
    }

    #[test]
    fn variant_size_laws(train in labeled(), test in labeled()) {
        let lex = Lexicon::default();
        let keep = VariantOptions { dedup: false };
        for v in DatasetVariant::ALL {
            let (tr, te) = build_variant(&train, &test, v, &RulesFiller, &lex, keep).unwrap();
            let expected = if matches!(v, DatasetVariant::Mot | DatasetVariant::Motmt) { 2 * train.len() } else { train.len() };
            prop_assert_eq!(tr.len(), expected);
            prop_assert_eq!(te.len(), test.len());
            let (tr, _) = build_variant(&train, &test, v, &RulesFiller, &lex, VariantOptions::default()).unwrap();
            prop_assert!(tr.len() >= train.len() && tr.len() <= expected);
        }
    }

    #[test]
    fn filtering_is_idempotent(ss in prop::collection::vec(sentence(), 0..20), min in 1usize..15) {
        let recs: Vec<SentenceRecord> = ss.iter().enumerate().map(|(i, s)| rec(i, s)).collect();
        let once = filter_short(&recs, min);
        prop_assert_eq!(filter_short(&once, min), once.clone());
        prop_assert!(once.iter().all(|r| r.word_count >= min));
    }

    #[test]
    fn coverage_accounting(
        ss in prop::collection::vec((sentence(), 0.0f64..1.0), 1..15),
        dv in prop::collection::vec(sentence(), 0..6),
        lo in 0.01f64..1.0,
        hi in 0.01f64..1.0,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let recs: Vec<SentenceRecord> = ss
            .iter()
            .enumerate()
            .map(|(i, (s, _))| SentenceRecord::new(format!("d{}#{i}", i % 3), format!("d{}", i % 3), "", s))
            .collect();
        let scorer = Fixed(ss.iter().map(|(s, p)| (text::normalize_whitespace(s), *p)).collect());
        let dv: Vec<SentenceRecord> = dv.iter().enumerate().map(|(i, s)| rec(i, s)).collect();
        let ex = extract_properties(&scorer, &recs, ExtractOptions { min_words: 1, threshold: 0.5 });
        let mut props = ex.properties.clone();
        let low = dv_coverage(&mut props, &ex.summaries, &dv, lo).unwrap();
        let high = dv_coverage(&mut props, &ex.summaries, &dv, hi).unwrap();
        for r in [&low, &high] {
            prop_assert_eq!(r.total.covered + r.total.not_covered, r.total.properties);
            for d in &r.documents {
                prop_assert_eq!(d.counts.covered + d.counts.not_covered, d.counts.properties);
            }
        }
        prop_assert!(high.total.covered <= low.total.covered);
    }

    #[test]
    fn metrics_match_a_recount(scores in prop::collection::vec((0.0f64..1.0, 0u8..2), 1..40)) {
        let set: Vec<LabeledExample> = scores
            .iter()
            .enumerate()
            .map(|(i, (_, l))| LabeledExample::new(rec(i, &format!("sentence number {i}")), *l).unwrap())
            .collect();
        let scorer = Fixed(set.iter().zip(&scores).map(|(e, (s, _))| (e.record.text.clone(), *s)).collect());
        let m = evaluate(&scorer, &set, 0.5).unwrap();
        let count = |pred: bool, label: u8| scores.iter().filter(|(s, l)| (*s > 0.5) == pred && *l == label).count() as u64;
        prop_assert_eq!(m, Metrics::from_counts(count(true, 1), count(true, 0), count(false, 1), count(false, 0), 0.5));
        prop_assert_eq!(m.total(), set.len() as u64);
    }
}
