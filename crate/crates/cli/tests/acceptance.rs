//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nspg_core::assertgen::{
    generate_all, generate_assertion, load_properties, load_register_map, load_verb_table, validate_sva,
    TemplateConfig, VerbOperatorTable,
};
use nspg_core::augment::{random_deletion, random_insertion, random_swap, synonym_replacement, AugOp};
use nspg_core::classify::{
    cross_validate, load_model, majority_rate, save_model, train_logreg, ClassifyError, Hyperparameters, Metrics,
    ModelKind, Scorer,
};
use nspg_core::corpus::{filter_short, load_labeled, LabeledExample, SentenceRecord};
use nspg_core::extract::{dv_coverage, extract_properties, ExtractOptions, PropertyLine};
use nspg_core::formalize::{
    build_variant, formalize_sentence, join, split_fragments, DatasetVariant, RulesFiller, VariantOptions,
};
use nspg_core::{text, Lexicon};

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn expect_eq(got: &str, want: &str, label: &str) -> Result<(), String> {
    check(got == want, || format!("{label}: got {got:?}, want {want:?}"))
}

fn rec(id: &str, text: &str) -> SentenceRecord {
    SentenceRecord::new(id, "x", "", text)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let lex = Lexicon::default();
    let hang = rec(
        "h#1",
        "If some hang condition were to occur when in this mode, the main state machine debug register should be read.",
    );
    let rows = [
        (AugOp::RandomSwap, "If some hang condition were to occur, the main state machine debug register should be read when in this mode."),
        (AugOp::RandomDeletion, "If hang condition were to occur when in this mode, the main state machine debug register should be read."),
        (AugOp::SynonymReplacement, "If some hang condition were to happen when in this mode, the main state machine debug register should be read."),
        (AugOp::RandomInsertion, "If some hang condition were to occur when in this mode, the main state machine debug register should be read immediately."),
    ];
    for (op, want) in rows {
        let got = op.apply(&hang, &lex, 657).map(|v| v.text).unwrap_or_default();
        expect_eq(&got, want, op.code())?;
    }

    let fifo = rec(
        "f#1",
        "When resetting, if 0, allow requests to pass through the host-side FIFO with no clock delay.",
    );
    let out = formalize_sentence(&fifo, &RulesFiller, &lex).map_err(|e| e.to_string())?;
    expect_eq(
        &out.text,
        "When system is resetting, if value is set 0, module allows requests to pass through the host-side FIFO with no clock delay.",
        "formalization",
    )?;

    let dir = fixtures().join("assertgen/aes");
    let map = load_register_map(&dir.join("regmap.json")).map_err(|e| e.to_string())?;
    let table = load_verb_table(&dir.join("verbs.json")).map_err(|e| e.to_string())?;
    let props = load_properties(&dir.join("properties.jsonl")).map_err(|e| e.to_string())?;
    let a = generate_assertion(&props[0], &map, &table, &TemplateConfig::for_design(&map), &lex)
        .map_err(|e| e.to_string())?;
    expect_eq(&a.body, "aes.done |-> aes.out == $past(aes.key)", "assertion body")?;
    expect_eq(&a.error_message, "previous key has not been read", "error message")?;

    let elapsed = start.elapsed();
    check(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "4 augmentation rows, formalization and assertion exact in {elapsed:.2?}"
    ))
}

/// Metrics computed straight from their definitions.
fn recount(scores: &[f64], labels: &[u8], threshold: f64) -> [f64; 4] {
    let mut c = [[0u64; 2]; 2];
    for (s, l) in scores.iter().zip(labels) {
        c[usize::from(*s > threshold)][usize::from(*l)] += 1;
    }
    let (tp, fp, fn_, tn) = (c[1][1] as f64, c[1][0] as f64, c[0][1] as f64, c[0][0] as f64);
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let recall = div(tp, tp + fn_);
    let precision = div(tp, tp + fp);
    [
        div(tp + tn, tp + fp + fn_ + tn),
        recall,
        precision,
        div(2.0 * precision * recall, precision + recall),
    ]
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.gen_range(0..200);
        let pos_rate: f64 = rng.gen();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(pos_rate))).collect();
        let scores: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.1) { 0.5 } else { rng.gen() })
            .collect();
        let threshold = if rng.gen_bool(0.2) { 0.5 } else { rng.gen() };
        let m = Metrics::from_scores(&scores, &labels, threshold);
        let want = recount(&scores, &labels, threshold);
        let got = [m.accuracy, m.recall, m.precision, m.f1];
        check(m.total() == n as u64, || {
            format!("case {case}: total {} != {n}", m.total())
        })?;
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
        check(worst <= 1e-12, || format!("case {case}: {got:?} vs {want:?}"))?;
    }
    Ok(format!("1000 configurations, max deviation {worst:e}"))
}

const WORDS: &str = "\
    the some a this module register FIFO CTRL.EN key value data requests unit AES mode state is are set cleared \
    read when if to while before after until unless upon once whenever resetting occur allow stays remains \
    immediately must should be 0 1 in with no delay pass through hang";

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
        out[n - 1].push('.');
        out.join(" ")
    })
}

fn labeled_set() -> impl Strategy<Value = Vec<LabeledExample>> {
    prop::collection::vec((sentence(), 0u8..2), 0..10).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (s, l))| LabeledExample::new(rec(&format!("x#{i}"), &s), l).expect("binary label"))
            .collect()
    })
}

fn cores(s: &str) -> Vec<String> {
    let mut v: Vec<String> = s
        .split_whitespace()
        .map(|t| text::core(t).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    v.sort();
    v
}

struct Table(std::collections::HashMap<String, f64>);

impl Scorer for Table {
    fn score(&self, text: &str) -> Result<f64, ClassifyError> {
        Ok(self.0.get(text).copied().unwrap_or(0.0))
    }
}

fn run<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn criterion_3() -> Outcome {
    let lex = Lexicon::default();
    run("fragment round trip", sentence(), |s| {
        prop_assert_eq!(join(&split_fragments(&rec("x#1", &s), &lex)), s);
        Ok(())
    })?;
    run("formalization", sentence(), |s| {
        let once = formalize_sentence(&rec("x#1", &s), &RulesFiller, &lex).unwrap();
        let twice = formalize_sentence(&once, &RulesFiller, &lex).unwrap();
        prop_assert_eq!(&twice.text, &once.text);
        prop_assert!(split_fragments(&once, &lex).iter().all(|f| f.is_complete()));
        Ok(())
    })?;
    run("augmentation deltas", (sentence(), any::<u64>()), |(s, seed)| {
        let r = rec("x#1", &s);
        let n = s.split_whitespace().count();
        if let Some(v) = random_swap(&r, &lex, seed) {
            prop_assert_eq!(cores(&v.text), cores(&s));
        }
        if let Some(v) = random_deletion(&r, &lex, seed) {
            prop_assert_eq!(v.text.split_whitespace().count() + 1, n);
        }
        if let Some(v) = random_insertion(&r, &lex, seed) {
            prop_assert_eq!(v.text.split_whitespace().count(), n + 1);
        }
        if let Some(v) = synonym_replacement(&r, &lex, seed) {
            let a: Vec<&str> = s.split_whitespace().collect();
            let b: Vec<&str> = v.text.split_whitespace().collect();
            prop_assert_eq!(a.len(), b.len());
            prop_assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 1);
        }
        Ok(())
    })?;
    run("variant sizes", (labeled_set(), labeled_set()), |(train, test)| {
        for v in DatasetVariant::ALL {
            let (tr, te) =
                build_variant(&train, &test, v, &RulesFiller, &lex, VariantOptions { dedup: false }).unwrap();
            let doubled = matches!(v, DatasetVariant::Mot | DatasetVariant::Motmt);
            prop_assert_eq!(tr.len(), if doubled { 2 * train.len() } else { train.len() });
            prop_assert_eq!(te.len(), test.len());
        }
        Ok(())
    })?;
    run(
        "filter idempotence",
        (prop::collection::vec(sentence(), 0..20), 1usize..15),
        |(ss, min)| {
            let recs: Vec<SentenceRecord> = ss.iter().enumerate().map(|(i, s)| rec(&format!("x#{i}"), s)).collect();
            let once = filter_short(&recs, min);
            prop_assert_eq!(filter_short(&once, min), once);
            Ok(())
        },
    )?;
    let coverage_input = (
        prop::collection::vec((sentence(), 0.0f64..1.0), 1..12),
        prop::collection::vec(sentence(), 0..5),
        0.01f64..1.0,
        0.01f64..1.0,
    );
    run("coverage accounting", coverage_input, |(ss, dv, a, b)| {
        let (lo, hi) = (a.min(b), a.max(b));
        let recs: Vec<SentenceRecord> = ss
            .iter()
            .enumerate()
            .map(|(i, (s, _))| SentenceRecord::new(format!("d{}#{i}", i % 2), format!("d{}", i % 2), "", s))
            .collect();
        let scorer = Table(ss.iter().map(|(s, p)| (text::normalize_whitespace(s), *p)).collect());
        let dv: Vec<SentenceRecord> = dv.iter().enumerate().map(|(i, s)| rec(&format!("dv#{i}"), s)).collect();
        let ex = extract_properties(
            &scorer,
            &recs,
            ExtractOptions {
                min_words: 1,
                threshold: 0.5,
            },
        );
        let mut props = ex.properties.clone();
        let low = dv_coverage(&mut props, &ex.summaries, &dv, lo).unwrap();
        let high = dv_coverage(&mut props, &ex.summaries, &dv, hi).unwrap();
        for r in [&low, &high] {
            prop_assert_eq!(r.total.covered + r.total.not_covered, r.total.properties);
        }
        prop_assert!(high.total.covered <= low.total.covered);
        Ok(())
    })?;
    Ok("6 invariant groups, 500 cases each".into())
}

fn nspg(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nspg"))
        .args(args)
        .env_remove("NSPG_ADAPTER")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "nspg {args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(out.stdout)
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn criterion_4() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let f = fixtures();
    nspg(&[
        "ingest",
        "--doc",
        p(&f.join("aes.txt")),
        "--filter",
        "--out",
        p(&d.join("kept.jsonl")),
    ])?;
    let kept = std::fs::read_to_string(d.join("kept.jsonl")).map_err(|e| e.to_string())?;
    check(!kept.contains("It hangs and does not drop data."), || {
        "7-word sentence survived the filter".into()
    })?;
    nspg(&[
        "extract",
        "--oracle",
        p(&f.join("aes_labels.jsonl")),
        "--doc",
        p(&f.join("aes.txt")),
        "--out",
        p(&d.join("props.jsonl")),
    ])?;
    let text = std::fs::read_to_string(d.join("props.jsonl")).map_err(|e| e.to_string())?;
    let ids: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<PropertyLine>(l).map(|p| p.id))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check(ids == ["aes#2", "aes#5", "aes#7"], || format!("extracted {ids:?}"))?;
    Ok("7-word sentence filtered, extracted aes#2 aes#5 aes#7".into())
}

fn mean_accuracy(folds: &[Metrics]) -> f64 {
    folds.iter().map(|m| m.accuracy).sum::<f64>() / folds.len() as f64
}

fn criterion_5() -> Outcome {
    let data = load_labeled(&fixtures().join("mini_corpus.jsonl")).map_err(|e| e.to_string())?;
    let majority = majority_rate(&data);
    let cv = |kind, hp: Hyperparameters| {
        cross_validate(&data, kind, hp, 5, 1)
            .map(|f| mean_accuracy(&f))
            .map_err(|e| e.to_string())
    };
    let tuned = Hyperparameters {
        learning_rate: 1.0,
        epochs: 1000,
        ..Hyperparameters::default()
    };
    let tfidf = cv(ModelKind::TfidfLogreg, tuned)?;
    let bow = cv(ModelKind::BowLogreg, tuned)?;
    let d_tfidf = cv(ModelKind::TfidfLogreg, Hyperparameters::default())?;
    let d_bow = cv(ModelKind::BowLogreg, Hyperparameters::default())?;
    let summary = format!(
        "majority {majority:.3}, tfidf {tfidf:.3}, bow {bow:.3} (lr 1.0, 1000 epochs); \
         defaults: tfidf {d_tfidf:.3}, bow {d_bow:.3}"
    );
    check(tfidf >= majority + 0.10 && bow <= tfidf, || summary.clone())?;
    Ok(summary)
}

fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let corpus = fixtures().join("mini_corpus.jsonl");
    let mut stdouts = Vec::new();
    for r in ["a", "b"] {
        let o = |name: &str| d.join(format!("{r}_{name}"));
        nspg(&[
            "augment",
            "--input",
            p(&corpus),
            "--seed",
            "11",
            "--out",
            p(&o("aug.jsonl")),
        ])?;
        nspg(&[
            "split",
            "--input",
            p(&corpus),
            "--seed",
            "11",
            "--out-dir",
            p(&o("split")),
        ])?;
        nspg(&[
            "formalize",
            "--variant",
            "mot",
            "--train",
            p(&o("split").join("train.jsonl")),
            "--test",
            p(&o("split").join("test.jsonl")),
            "--out-dir",
            p(&o("mot")),
        ])?;
        nspg(&[
            "train",
            "--dataset",
            p(&o("mot")),
            "--seed",
            "11",
            "--out",
            p(&o("model.json")),
        ])?;
        stdouts.push(nspg(&[
            "eval",
            "--dataset",
            p(&o("split")),
            "--cv",
            "3",
            "--seed",
            "11",
            "--kind",
            "bow-logreg",
        ])?);
    }
    let files = [
        "aug.jsonl",
        "split/train.jsonl",
        "split/test.jsonl",
        "mot/train.jsonl",
        "mot/test.jsonl",
        "model.json",
    ];
    for f in files {
        let a = std::fs::read(d.join(format!("a_{f}"))).map_err(|e| e.to_string())?;
        let b = std::fs::read(d.join(format!("b_{f}"))).map_err(|e| e.to_string())?;
        check(a == b, || format!("{f} differs between runs"))?;
    }
    check(stdouts[0] == stdouts[1], || "cross-validation output differs".into())?;
    Ok(format!("{} outputs and cv report byte-identical", files.len()))
}

fn criterion_7() -> Outcome {
    let lex = Lexicon::default();
    let mut checked = 0;
    for design in ["aes", "keymgr", "otp_ctrl"] {
        let dir = fixtures().join("assertgen").join(design);
        let map = load_register_map(&dir.join("regmap.json")).map_err(|e| e.to_string())?;
        let verbs = dir.join("verbs.json");
        let table = if verbs.exists() {
            load_verb_table(&verbs).map_err(|e| e.to_string())?
        } else {
            VerbOperatorTable::default()
        };
        let props = load_properties(&dir.join("properties.jsonl")).map_err(|e| e.to_string())?;
        for (id, r) in generate_all(&props, &map, &table, &TemplateConfig::for_design(&map), &lex) {
            let a = r.map_err(|e| format!("{id}: {e}"))?;
            validate_sva(&a.sva_text).map_err(|e| format!("{id}: {e:?}"))?;
            checked += 1;
        }
    }

    let data = load_labeled(&fixtures().join("mini_corpus.jsonl")).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for kind in [ModelKind::TfidfLogreg, ModelKind::BowLogreg] {
        let model = train_logreg(&data, kind, Hyperparameters::default())
            .map_err(|e| e.to_string())?
            .model;
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&model, &path).map_err(|e| e.to_string())?;
        let loaded = load_model(&path).map_err(|e| e.to_string())?;
        for e in &data {
            let (a, b) = (model.score(&e.record.text), loaded.score(&e.record.text));
            let same = matches!((&a, &b), (Ok(x), Ok(y)) if x.to_bits() == y.to_bits());
            check(same, || format!("{kind}: prediction changed for {:?}", e.record.id))?;
        }
    }
    Ok(format!(
        "{checked} assertions valid, {} predictions preserved per model",
        data.len()
    ))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {n}: PASS {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
