use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "nspg",
    version,
    about = "Mine security properties from hardware design documentation"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Log more (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment documents into a sentence corpus.
    Ingest(IngestArgs),
    /// Stratified train/test split of a labeled corpus.
    Split(SplitArgs),
    /// Add RS/RD/SR/RI variants to a corpus.
    Augment(AugmentArgs),
    /// Formalize sentences, build a dataset variant or export rewrite examples.
    Formalize(FormalizeArgs),
    /// Train a classifier.
    Train(TrainArgs),
    /// Evaluate a classifier, or cross-validate a classifier kind.
    Eval(EvalArgs),
    /// Extract property sentences from documents.
    Extract(ExtractArgs),
    /// Match extracted properties against DV test descriptions.
    Coverage(CoverageArgs),
    /// Compile properties into assertions, or check an assertion file.
    Assertgen(AssertgenArgs),
    /// Render a coverage report as a table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub doc: Vec<PathBuf>,
    /// plain or markdown; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Drop sentences shorter than this many words.
    #[arg(long)]
    pub min_words: Option<usize>,
    /// Apply the configured (default 10) word filter.
    #[arg(long)]
    pub filter: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub fraction: f64,
    /// Required unless the config sets `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Receives train.jsonl and test.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Required unless the config sets `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated operators (RS,RD,SR,RI).
    #[arg(long)]
    pub ops: Option<String>,
    /// Distinct variants per sentence and operator.
    #[arg(long)]
    pub multiplicity: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FormalizeArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write verb/noun swap and fragment delete/add rewrites instead.
    #[arg(long, requires = "input")]
    pub table: bool,
    /// baseline, mt, mot, mtt or motmt.
    #[arg(long, conflicts_with = "input")]
    pub variant: Option<String>,
    #[arg(long, requires = "variant")]
    pub train: Option<PathBuf>,
    #[arg(long, requires = "variant")]
    pub test: Option<PathBuf>,
    #[arg(long, requires = "variant")]
    pub out_dir: Option<PathBuf>,
    /// Keep formalized copies identical to their original.
    #[arg(long)]
    pub no_dedup: bool,
    /// Mask-filling adapter endpoint (tcp://host:port or exec:command).
    #[arg(long)]
    pub adapter: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled file, or a directory holding train.jsonl.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub variant: Option<String>,
    /// bow-logreg, tfidf-logreg or adapter.
    #[arg(long)]
    pub kind: Option<String>,
    /// Required unless the config sets `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub adapter: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled file, or a directory holding test.jsonl (train.jsonl with --cv).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Formalize the evaluation set as this variant does (mtt, motmt).
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// k-fold cross-validation of --kind instead of evaluating --model.
    #[arg(long, conflicts_with = "model")]
    pub cv: Option<usize>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub adapter: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled file used as a perfect scorer.
    #[arg(long, conflicts_with = "model")]
    pub oracle: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub doc: Vec<PathBuf>,
    #[arg(long, conflicts_with = "doc")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the per-document summary here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub min_words: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub adapter: Option<String>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub properties: PathBuf,
    /// DV documents.
    #[arg(long, num_args = 1..)]
    pub dv: Vec<PathBuf>,
    #[arg(long, conflicts_with = "dv")]
    pub dv_corpus: Option<PathBuf>,
    /// Summary written by extract, for processed-sentence counts.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub sim_threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Properties file with coverage fields filled in.
    #[arg(long)]
    pub annotated: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssertgenArgs {
    /// JSONL of {"id","text","message"?} or an extract properties file.
    #[arg(long, required_unless_present = "check")]
    pub properties: Option<PathBuf>,
    #[arg(long, required_unless_present = "check")]
    pub map: Option<PathBuf>,
    /// Verb table merged over the defaults.
    #[arg(long)]
    pub verbs: Option<PathBuf>,
    #[arg(long, required_unless_present = "check")]
    pub out: Option<PathBuf>,
    /// Bindings per assertion, as JSON.
    #[arg(long)]
    pub bindings: Option<PathBuf>,
    #[arg(long)]
    pub clock: Option<String>,
    #[arg(long)]
    pub reset: Option<String>,
    /// Validate an existing assertion file instead.
    #[arg(long, conflicts_with_all = ["properties", "map", "out"])]
    pub check: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub coverage: PathBuf,
    #[arg(long)]
    pub markdown: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
