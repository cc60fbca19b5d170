use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use nspg_core::adapter::AdapterClient;
use nspg_core::assertgen::{
    generate_all, load_properties, load_register_map, load_verb_table, validate_sva_file, TemplateConfig,
    VerbOperatorTable,
};
use nspg_core::augment::{augment_corpus, AugOp};
use nspg_core::classify::{
    cross_validate, evaluate, load_model, majority_rate, save_model, train_logreg, AdapterScorer, ClassifierModel,
    LabelOracle, Metrics, ModelKind, Scorer, DEFAULT_THRESHOLD,
};
use nspg_core::corpus::{
    filter_short, ingest_documents, load_labeled, load_records, read_lines, save_labeled, save_records, split_dataset,
    write_lines, DocFormat, RecordLine, SentenceRecord, DEFAULT_MIN_WORDS,
};
use nspg_core::extract::{
    dv_coverage, extract_properties, CoverageReport, DocSummary, ExtractOptions, PropertyLine, DEFAULT_SIM_THRESHOLD,
};
use nspg_core::formalize::{
    build_variant, export_modification_examples, formalize_sentence, AdapterFiller, DatasetVariant, MaskFiller,
    RulesFiller, VariantOptions,
};
use nspg_core::Lexicon;

use crate::cli::*;
use crate::config::RunConfig;

/// Failure after inputs were accepted: adapter trouble or unwritable output.
#[derive(Debug)]
pub struct RuntimeFailure(pub String);

impl std::fmt::Display for RuntimeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RuntimeFailure {}

fn runtime(e: impl std::fmt::Display) -> anyhow::Error {
    RuntimeFailure(e.to_string()).into()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))
}

fn filler(cfg: &RunConfig, adapter: Option<&str>) -> Result<Box<dyn MaskFiller>> {
    Ok(match cfg.adapter_endpoint(adapter)? {
        Some(ep) => {
            let f = AdapterFiller::connect(&ep, cfg.adapter_timeout()?);
            if !f.is_connected() {
                log::warn!("adapter {ep} unavailable; formalizing with the rules filler");
            }
            Box::new(f)
        }
        None => Box::new(RulesFiller),
    })
}

/// `<dir>/<name>` for a dataset directory, the path itself for a file.
fn dataset_file(path: &Path, name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(name)
    } else {
        path.to_path_buf()
    }
}

pub fn ingest(cfg: &RunConfig, args: &IngestArgs) -> Result<()> {
    let format = args.format.as_deref().map(str::parse::<DocFormat>).transpose()?;
    let mut records = ingest_documents(&args.doc, format)?;
    let total = records.len();
    if let Some(min) = args.min_words.or(if args.filter {
        cfg.min_words.or(Some(DEFAULT_MIN_WORDS))
    } else {
        None
    }) {
        if min == 0 {
            bail!("--min-words must be at least 1");
        }
        records = filter_short(&records, min);
    }
    save_records(&records, &args.out).map_err(runtime)?;
    println!(
        "ingested {} sentence(s) from {} document(s); wrote {} to {}",
        total,
        args.doc.len(),
        records.len(),
        args.out.display()
    );
    Ok(())
}

pub fn split(cfg: &RunConfig, args: &SplitArgs) -> Result<()> {
    let seed = cfg.seed(args.seed)?;
    let examples = load_labeled(&args.input)?;
    let pair = split_dataset(&examples, args.fraction, seed)?;
    create_dir(&args.out_dir)?;
    save_labeled(&pair.train, &args.out_dir.join("train.jsonl")).map_err(runtime)?;
    save_labeled(&pair.validation, &args.out_dir.join("test.jsonl")).map_err(runtime)?;
    println!("train {} / test {}", pair.train.len(), pair.validation.len());
    Ok(())
}

pub fn augment(cfg: &RunConfig, lex: &Lexicon, args: &AugmentArgs) -> Result<()> {
    let op_names: Vec<String> = match (&args.ops, &cfg.augment.ops) {
        (Some(ops), _) => ops.split(',').map(str::to_string).collect(),
        (None, Some(ops)) => ops.clone(),
        (None, None) => AugOp::ALL.iter().map(|o| o.code().to_string()).collect(),
    };
    let ops: Vec<AugOp> = op_names
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<AugOp>())
        .collect::<Result<_, _>>()?;
    let multiplicity = args.multiplicity.or(cfg.augment.multiplicity).unwrap_or(1);

    let lines = read_lines(&args.input)?;
    let records: Vec<SentenceRecord> = lines.iter().map(|(n, l)| l.to_record(*n)).collect::<Result<_, _>>()?;
    nspg_core::corpus::validate_corpus(&records)?;
    let labels: HashMap<&str, Option<i64>> = lines.iter().map(|(_, l)| (l.id.as_str(), l.label)).collect();

    let report = augment_corpus(&records, &ops, lex, cfg.seed(args.seed)?, multiplicity)?;
    let out: Vec<RecordLine> = report
        .records
        .iter()
        .map(|r| {
            let mut line = r.to_line();
            let key = r.origin.as_ref().map(|(o, _)| o.as_str()).unwrap_or(&r.record.id);
            line.label = labels.get(key).copied().flatten();
            line
        })
        .collect();
    write_lines(&out, &args.out).map_err(runtime)?;
    let per_op: Vec<String> = report.per_op.iter().map(|(op, n)| format!("{op}={n}")).collect();
    println!(
        "{} original(s), {} variant(s) [{}]; wrote {}",
        report.originals,
        out.len() - report.originals,
        per_op.join(" "),
        args.out.display()
    );
    Ok(())
}

pub fn formalize(cfg: &RunConfig, lex: &Lexicon, args: &FormalizeArgs) -> Result<()> {
    let fill = filler(cfg, args.adapter.as_deref())?;
    if let Some(variant) = &args.variant {
        let variant: DatasetVariant = variant.parse()?;
        let train_path = args.train.as_ref().ok_or_else(|| anyhow!("--variant needs --train"))?;
        let out_dir = args
            .out_dir
            .as_ref()
            .ok_or_else(|| anyhow!("--variant needs --out-dir"))?;
        let train = load_labeled(train_path)?;
        let test = match &args.test {
            Some(p) => load_labeled(p)?,
            None => Vec::new(),
        };
        let opts = VariantOptions { dedup: !args.no_dedup };
        let (train_out, test_out) = build_variant(&train, &test, variant, fill.as_ref(), lex, opts)?;
        create_dir(out_dir)?;
        save_labeled(&train_out, &out_dir.join("train.jsonl")).map_err(runtime)?;
        if args.test.is_some() {
            save_labeled(&test_out, &out_dir.join("test.jsonl")).map_err(runtime)?;
        }
        println!(
            "{variant}: train {} -> {}, test {} -> {}",
            train.len(),
            train_out.len(),
            test.len(),
            test_out.len()
        );
        return Ok(());
    }

    let input = args
        .input
        .as_ref()
        .ok_or_else(|| anyhow!("pass --input, or --variant with --train"))?;
    let out = args.out.as_ref().ok_or_else(|| anyhow!("--input needs --out"))?;
    let lines = read_lines(input)?;
    let records: Vec<SentenceRecord> = lines.iter().map(|(n, l)| l.to_record(*n)).collect::<Result<_, _>>()?;
    nspg_core::corpus::validate_corpus(&records)?;
    if args.table {
        let mut text = String::new();
        for r in &records {
            let ex = export_modification_examples(r, lex);
            text.push_str(&serde_json::to_string(&ex)?);
            text.push('\n');
        }
        write_text(out, &text)?;
        println!(
            "wrote modification examples for {} sentence(s) to {}",
            records.len(),
            out.display()
        );
        return Ok(());
    }
    let mut changed = 0;
    let mut out_lines = Vec::with_capacity(records.len());
    for ((_, line), rec) in lines.iter().zip(&records) {
        let new = formalize_sentence(rec, fill.as_ref(), lex)?;
        if new.text != rec.text {
            changed += 1;
        }
        let mut l = RecordLine::from_record(&new);
        l.label = line.label;
        l.origin_id = line.origin_id.clone();
        l.aug_op = line.aug_op.clone();
        out_lines.push(l);
    }
    write_lines(&out_lines, out).map_err(runtime)?;
    println!(
        "formalized {} sentence(s), {} changed; wrote {}",
        records.len(),
        changed,
        out.display()
    );
    Ok(())
}

pub fn train(cfg: &RunConfig, lex: &Lexicon, args: &TrainArgs) -> Result<()> {
    let kind = match &args.kind {
        Some(k) => k.parse::<ModelKind>().map_err(anyhow::Error::msg)?,
        None => cfg.kind()?.unwrap_or(ModelKind::TfidfLogreg),
    };
    if kind == ModelKind::Adapter {
        let ep = cfg
            .adapter_endpoint(args.adapter.as_deref())?
            .ok_or_else(|| anyhow!("an adapter model needs an endpoint (--adapter, NSPG_ADAPTER or config)"))?;
        save_model(&ClassifierModel::adapter(&ep.to_string()), &args.out).map_err(runtime)?;
        println!("wrote adapter model for {ep} to {}", args.out.display());
        return Ok(());
    }
    let mut hp = cfg.hyperparameters(cfg.seed(args.seed)?);
    if let Some(lr) = args.learning_rate {
        hp.learning_rate = lr;
    }
    if let Some(e) = args.epochs {
        hp.epochs = e;
    }
    if let Some(l2) = args.l2 {
        hp.l2 = l2;
    }
    let train = load_labeled(&dataset_file(&args.dataset, "train.jsonl"))?;
    let variant: DatasetVariant = match args.variant.as_deref().or(cfg.variant.as_deref()) {
        Some(v) => v.parse()?,
        None => DatasetVariant::Baseline,
    };
    let train = if variant == DatasetVariant::Baseline {
        train
    } else {
        let fill = filler(cfg, args.adapter.as_deref())?;
        build_variant(&train, &[], variant, fill.as_ref(), lex, VariantOptions::default())?.0
    };
    let outcome = train_logreg(&train, kind, hp)?;
    save_model(&outcome.model, &args.out).map_err(runtime)?;
    println!(
        "trained {kind} on {} example(s) ({variant}); final loss {:.6}; wrote {}",
        train.len(),
        outcome.losses.last().copied().unwrap_or(f64::NAN),
        args.out.display()
    );
    Ok(())
}

/// Built-in model, or a connection to the adapter the model points at.
fn scorer_for(cfg: &RunConfig, model: ClassifierModel, adapter: Option<&str>) -> Result<Box<dyn Scorer>> {
    if model.kind != ModelKind::Adapter {
        return Ok(Box::new(model));
    }
    let ep = match cfg.adapter_endpoint(adapter)? {
        Some(ep) => ep,
        None => model
            .endpoint
            .as_deref()
            .ok_or_else(|| anyhow!("adapter model has no endpoint"))?
            .parse()?,
    };
    let client = AdapterClient::connect(&ep, cfg.adapter_timeout()?)?;
    Ok(Box::new(AdapterScorer::new(client)))
}

#[derive(Serialize)]
struct CvReport {
    kind: ModelKind,
    folds: Vec<Metrics>,
    mean_accuracy: f64,
    majority_rate: f64,
}

pub fn eval(cfg: &RunConfig, lex: &Lexicon, args: &EvalArgs) -> Result<()> {
    let threshold = args.threshold.or(cfg.threshold).unwrap_or(DEFAULT_THRESHOLD);
    let json = if let Some(k) = args.cv {
        let seed = cfg.seed(args.seed)?;
        let kind = match &args.kind {
            Some(k) => k.parse::<ModelKind>().map_err(anyhow::Error::msg)?,
            None => cfg.kind()?.unwrap_or(ModelKind::TfidfLogreg),
        };
        let examples = load_labeled(&dataset_file(&args.dataset, "train.jsonl"))?;
        let folds = cross_validate(&examples, kind, cfg.hyperparameters(seed), k, seed)?;
        let mean_accuracy = folds.iter().map(|m| m.accuracy).sum::<f64>() / folds.len() as f64;
        serde_json::to_string_pretty(&CvReport {
            kind,
            folds,
            mean_accuracy,
            majority_rate: majority_rate(&examples),
        })?
    } else {
        let model_path = args
            .model
            .as_ref()
            .ok_or_else(|| anyhow!("pass --model, or --cv with --kind"))?;
        let model = load_model(model_path)?;
        let mut set = load_labeled(&dataset_file(&args.dataset, "test.jsonl"))?;
        if let Some(v) = &args.variant {
            let variant: DatasetVariant = v.parse()?;
            let fill = filler(cfg, args.adapter.as_deref())?;
            set = build_variant(&[], &set, variant, fill.as_ref(), lex, VariantOptions::default())?.1;
        }
        let scorer = scorer_for(cfg, model, args.adapter.as_deref())?;
        serde_json::to_string_pretty(&evaluate(scorer.as_ref(), &set, threshold)?)?
    };
    if let Some(out) = &args.out {
        write_text(out, &(json.clone() + "\n"))?;
    }
    println!("{json}");
    Ok(())
}

#[derive(Serialize)]
struct ExtractSummary<'a> {
    documents: &'a [DocSummary],
    total: DocSummary,
    failure: Option<&'a str>,
}

pub fn extract(cfg: &RunConfig, args: &ExtractArgs) -> Result<()> {
    let records = match (&args.corpus, args.doc.is_empty()) {
        (Some(c), true) => load_records(c)?,
        (None, false) => {
            let format = args.format.as_deref().map(str::parse::<DocFormat>).transpose()?;
            ingest_documents(&args.doc, format)?
        }
        _ => bail!("pass either --doc or --corpus"),
    };
    let scorer: Box<dyn Scorer> = match (&args.model, &args.oracle) {
        (Some(m), None) => scorer_for(cfg, load_model(m)?, args.adapter.as_deref())?,
        (None, Some(o)) => Box::new(LabelOracle::new(&load_labeled(o)?)?),
        _ => bail!("pass either --model or --oracle"),
    };
    let opts = ExtractOptions {
        min_words: args.min_words.or(cfg.min_words).unwrap_or(DEFAULT_MIN_WORDS),
        threshold: args.threshold.or(cfg.threshold).unwrap_or(DEFAULT_THRESHOLD),
    };
    if opts.min_words == 0 {
        bail!("--min-words must be at least 1");
    }
    let ex = extract_properties(scorer.as_ref(), &records, opts);
    let lines: Vec<PropertyLine> = ex.properties.iter().map(PropertyLine::from).collect();
    let mut text = String::new();
    for l in &lines {
        text.push_str(&serde_json::to_string(l)?);
        text.push('\n');
    }
    write_text(&args.out, &text)?;

    let mut total = DocSummary {
        doc: "total".into(),
        ..Default::default()
    };
    for s in &ex.summaries {
        total.sentences += s.sentences;
        total.processed += s.processed;
        total.extracted += s.extracted;
        total.properties += s.properties;
    }
    let summary = ExtractSummary {
        documents: &ex.summaries,
        total,
        failure: ex.failure.as_deref(),
    };
    if let Some(p) = &args.summary {
        write_json(p, &summary)?;
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(f) = &ex.failure {
        return Err(runtime(format!("extraction stopped early: {f}")));
    }
    Ok(())
}

pub fn coverage(cfg: &RunConfig, args: &CoverageArgs) -> Result<()> {
    let mut properties = Vec::new();
    let text = std::fs::read_to_string(&args.properties)
        .with_context(|| format!("cannot read {}", args.properties.display()))?;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let p: PropertyLine = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: not a property line", args.properties.display(), i + 1))?;
        properties.push(p.into_record());
    }
    let summaries: Vec<DocSummary> = match &args.summary {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            serde_json::from_value(v.get("documents").cloned().unwrap_or_default())
                .with_context(|| format!("{}: no documents list", p.display()))?
        }
        None => Vec::new(),
    };
    let dv = match (&args.dv_corpus, args.dv.is_empty()) {
        (Some(c), true) => load_records(c)?,
        (None, false) => ingest_documents(&args.dv, None)?,
        _ => bail!("pass either --dv or --dv-corpus"),
    };
    let sim = args
        .sim_threshold
        .or(cfg.sim_threshold)
        .unwrap_or(DEFAULT_SIM_THRESHOLD);
    let report = dv_coverage(&mut properties, &summaries, &dv, sim)?;
    write_json(&args.out, &report)?;
    if let Some(p) = &args.annotated {
        let mut text = String::new();
        for prop in &properties {
            text.push_str(&serde_json::to_string(&PropertyLine::from(prop))?);
            text.push('\n');
        }
        write_text(p, &text)?;
    }
    println!(
        "{} properties: {} covered by DV, {} not covered (threshold {sim})",
        report.total.properties, report.total.covered, report.total.not_covered
    );
    Ok(())
}

pub fn assertgen(cfg: &RunConfig, lex: &Lexicon, args: &AssertgenArgs) -> Result<()> {
    if let Some(check) = &args.check {
        let text = std::fs::read_to_string(check).with_context(|| format!("cannot read {}", check.display()))?;
        let results = validate_sva_file(&text);
        let mut bad = 0;
        for (offset, r) in &results {
            if let Err(errs) = r {
                bad += 1;
                for e in errs {
                    eprintln!("{}: block at byte {offset}: {e}", check.display());
                }
            }
        }
        println!("{} assertion(s), {} invalid", results.len(), bad);
        if bad > 0 || results.is_empty() {
            bail!("{} failed validation", check.display());
        }
        return Ok(());
    }
    let props_path = args
        .properties
        .as_ref()
        .ok_or_else(|| anyhow!("--properties is required"))?;
    let map_path = args.map.as_ref().ok_or_else(|| anyhow!("--map is required"))?;
    let out = args.out.as_ref().ok_or_else(|| anyhow!("--out is required"))?;
    let map = load_register_map(map_path)?;
    let table = match &args.verbs {
        Some(p) => load_verb_table(p)?,
        None => VerbOperatorTable::default(),
    };
    let mut tcfg = TemplateConfig::for_design(&map);
    if let Some(c) = args.clock.clone().or(cfg.assertgen.clock.clone()) {
        tcfg.clock = c;
    }
    if let Some(r) = args.reset.clone().or(cfg.assertgen.reset.clone()) {
        tcfg.reset = r;
    }
    let props = load_properties(props_path)?;
    let results = generate_all(&props, &map, &table, &tcfg, lex);
    let mut sva = String::new();
    let mut bindings = Vec::new();
    let mut failed = 0;
    for (id, r) in &results {
        match r {
            Ok(a) => {
                if !sva.is_empty() {
                    sva.push('\n');
                }
                sva.push_str(&a.render());
                bindings.push(a);
            }
            Err(e) => {
                failed += 1;
                eprintln!("{id}: {e}");
            }
        }
    }
    write_text(out, &sva)?;
    if let Some(p) = &args.bindings {
        write_json(p, &bindings)?;
    }
    println!(
        "{} assertion(s) written to {}, {} failed",
        bindings.len(),
        out.display(),
        failed
    );
    if failed > 0 {
        bail!("{failed} of {} properties could not be compiled", results.len());
    }
    Ok(())
}

const COLUMNS: [&str; 6] = [
    "IP",
    "Sentences",
    "Extracted",
    "Properties",
    "Covered by DV",
    "Not covered by DV",
];

/// The coverage table with one row per document and a total row.
pub fn render_report(report: &CoverageReport, markdown: bool) -> String {
    let mut rows: Vec<[String; 6]> = report
        .documents
        .iter()
        .map(|d| (d.doc.clone(), &d.counts))
        .chain(std::iter::once(("Total".to_string(), &report.total)))
        .map(|(name, c)| {
            [
                name,
                c.processed.to_string(),
                c.extracted.to_string(),
                c.properties.to_string(),
                c.covered.to_string(),
                c.not_covered.to_string(),
            ]
        })
        .collect();
    let header = COLUMNS.map(str::to_string);
    let mut out = String::new();
    if markdown {
        let line = |r: &[String; 6]| format!("| {} |\n", r.join(" | "));
        out.push_str(&line(&header));
        out.push_str(&format!("|{}\n", "---|".repeat(6)));
        for r in &rows {
            out.push_str(&line(r));
        }
        return out;
    }
    rows.insert(0, header);
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for r in &rows {
        let mut line = format!("{:<w$}", r[0], w = widths[0]);
        for c in 1..6 {
            let _ = write!(line, "  {:>w$}", r[c], w = widths[c]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let text =
        std::fs::read_to_string(&args.coverage).with_context(|| format!("cannot read {}", args.coverage.display()))?;
    let report: CoverageReport =
        serde_json::from_str(&text).with_context(|| format!("{} is not a coverage report", args.coverage.display()))?;
    let table = render_report(&report, args.markdown);
    match &args.out {
        Some(p) => write_text(p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}
